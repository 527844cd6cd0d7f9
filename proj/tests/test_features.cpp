#include "dsmt/error.hpp"
#include "dsmt/features.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace dsmt;

namespace {

Box3D car(double x, double y, double length = 4.0, double width = 2.0, double yaw = 0.0) {
    return {x, y, 0.0, length, width, 1.5, yaw};
}

std::pair<int, int> column_span(const OccupancyGrid& g) {
    int lo = g.cols, hi = -1;
    for (int idx : g.cells.active) {
        lo = std::min(lo, idx % g.cols);
        hi = std::max(hi, idx % g.cols);
    }
    return {lo, hi};
}

} // namespace

TEST(Sparse, MultiplyAndDense) {
    const SparseBinary a{6, {0, 2, 3, 5}}, b{6, {1, 2, 5}};
    EXPECT_EQ(multiply(a, b), (SparseBinary{6, {2, 5}}));
    EXPECT_EQ(a.dense(), (std::vector<double>{1, 0, 1, 1, 0, 1}));
    EXPECT_TRUE(a.at(3));
    EXPECT_FALSE(a.at(4));
    EXPECT_THROW(multiply(a, SparseBinary{5, {}}), StructuralError);
}

TEST(Bev, AxisAlignedCellCount) {
    const auto g = rasterize_bev(car(20.0, 0.0), BevGridConfig{});
    EXPECT_EQ(g.rows, 180);
    EXPECT_EQ(g.cols, 200);
    EXPECT_EQ(g.active_count(), 200u); // 20 x 10 cells of 0.2 m
}

TEST(Bev, OutsideExtentIsEmpty) {
    EXPECT_EQ(rasterize_bev(car(-10.0, 0.0), BevGridConfig{}).active_count(), 0u);
    EXPECT_EQ(rasterize_bev(car(20.0, 40.0), BevGridConfig{}).active_count(), 0u);
}

TEST(Bev, ClippedAtEdge) {
    // Half of the footprint lies behind x_min.
    EXPECT_EQ(rasterize_bev(car(0.0, 0.0), BevGridConfig{}).active_count(), 100u);
}

TEST(Bev, QuarterTurnSwapsFootprint) {
    const auto turned = rasterize_bev(car(20.0, 0.0, 4.0, 2.0, -kPi / 2.0), BevGridConfig{});
    const auto transposed = rasterize_bev(car(20.0, 0.0, 2.0, 4.0), BevGridConfig{});
    EXPECT_EQ(turned.active_count(), transposed.active_count());
    EXPECT_EQ(turned.cells, transposed.cells);
}

TEST(Ego, CompensationTranslates) {
    const Box3D b = car(20.0, 1.0);
    EXPECT_NEAR(compensate_ego(b, {10.0, 0.0, 0.1}).center_x, 19.0, 1e-12);
    EXPECT_EQ(compensate_ego(b, {0.0, 0.0, 0.1}), b);
    const Box3D there = compensate_ego(compensate_ego(b, {7.3, -1.1, 0.1}), {-7.3, 1.1, 0.1});
    EXPECT_NEAR(there.center_x, b.center_x, 1e-12);
    EXPECT_NEAR(there.center_y, b.center_y, 1e-12);
}

TEST(Fv, BehindCameraIsEmpty) {
    EXPECT_EQ(rasterize_fv(car(-5.0, 0.0), CameraModel{}, FvGridConfig{}).active_count(), 0u);
    EXPECT_LE(project_box(car(-5.0, 0.0), CameraModel{}).width(), 0.0);
}

TEST(Fv, CenteredOnAxisIsSymmetric) {
    CameraModel cam;
    cam.principal_u = cam.image_width / 2.0;
    cam.principal_v = cam.image_height / 2.0;
    const FvGridConfig cfg;
    const auto g = rasterize_fv(car(15.0, 0.0), cam, cfg);
    ASSERT_GT(g.active_count(), 0u);
    const auto [lo, hi] = column_span(g);
    EXPECT_LE(std::abs((lo + hi) - (cfg.cols - 1)), 1);
}

TEST(Fv, DoublingDistanceHalvesWidth) {
    const FvGridConfig cfg;
    const auto near_span = column_span(rasterize_fv(car(10.0, 0.0, 0.1, 1.8), CameraModel{}, cfg));
    const auto far_span = column_span(rasterize_fv(car(20.0, 0.0, 0.1, 1.8), CameraModel{}, cfg));
    const double near_w = near_span.second - near_span.first + 1;
    const double far_w = far_span.second - far_span.first + 1;
    EXPECT_NEAR(far_w, near_w / 2.0, 1.0);
}

TEST(Fv, ProjectionOfCenteredBox) {
    const CameraModel cam;
    const Box2D r = project_box(car(10.0, 0.0, 0.1, 2.0), cam);
    // Near face at x = 9.95, half width 1 m.
    EXPECT_NEAR(r.left, cam.principal_u - cam.focal_u * 1.0 / 9.95, 1e-9);
    EXPECT_NEAR(r.right, cam.principal_u + cam.focal_u * 1.0 / 9.95, 1e-9);
}

TEST(Pair, IdenticalDetectionsNoMotion) {
    const FeatureConfig cfg;
    Detection a = fixtures::car_at(0, 0, {20.0, 0.0}, 2, 3);
    a.appearance = Appearance(2, 3, {1, 2, 3, 0.5, 0.5, 1});
    Detection b = a;
    b.frame_idx = 1;
    const auto p = pair_features(a, b, EgoMotion{}, CameraModel{}, cfg);
    EXPECT_EQ(p.bev_product, rasterize_bev(a.box3d, cfg.bev).cells);
    EXPECT_EQ(p.fv_product, rasterize_fv(a.box3d, CameraModel{}, cfg.fv).cells);
    ASSERT_EQ(p.appearance_sim.size(), 2u);
    EXPECT_DOUBLE_EQ(p.appearance_sim[0], 14.0);
    EXPECT_DOUBLE_EQ(p.appearance_sim[1], 1.5);
}

TEST(Pair, DisjointFootprints) {
    const auto p = pair_features(fixtures::car_at(0, 0, {10.0, 0.0}), fixtures::car_at(1, 1, {30.0, 0.0}), EgoMotion{},
                                 CameraModel{}, FeatureConfig{});
    EXPECT_EQ(p.bev_product.count(), 0u);
}

TEST(Pair, HalfOverlapCountsIntersection) {
    const FeatureConfig cfg;
    Detection a = fixtures::car_at(0, 0, {20.0, 0.0}), b = fixtures::car_at(1, 1, {22.0, 0.0});
    a.box3d.width = b.box3d.width = 2.0;
    const auto p = pair_features(a, b, EgoMotion{}, CameraModel{}, cfg);
    EXPECT_EQ(p.bev_product.count(), 100u); // x in [20, 22], y in [-1, 1]
}

TEST(Pair, EgoMotionCompensatesEarlierDetection) {
    const FeatureConfig cfg;
    // Static object; the ego advanced 1 m, so it was 1 m farther ahead.
    const auto moved = pair_features(fixtures::car_at(0, 0, {21.0, 0.0}), fixtures::car_at(1, 1, {20.0, 0.0}),
                                     EgoMotion{10.0, 0.0, 0.1}, CameraModel{}, cfg);
    EXPECT_EQ(moved.bev_product, rasterize_bev(car(20.0, 0.0, 4.0, 1.8), cfg.bev).cells);
}

TEST(Pair, RequiresAdjacentFrames) {
    EXPECT_THROW(pair_features(fixtures::car_at(0, 0, {}), fixtures::car_at(1, 2, {}), EgoMotion{}, CameraModel{},
                               FeatureConfig{}),
                 StructuralError);
    EXPECT_THROW(pair_features(fixtures::car_at(0, 0, {}), fixtures::car_at(1, 1, {}, 2, 3), EgoMotion{},
                               CameraModel{}, FeatureConfig{}),
                 StructuralError);
}

TEST(Grid, ConfigValidation) {
    BevGridConfig bad;
    bad.meters_per_cell = 0.0;
    EXPECT_THROW(bad.validate(), ConfigError);
    FvGridConfig fv;
    fv.rows = 0;
    EXPECT_THROW(fv.validate(), ConfigError);
}
