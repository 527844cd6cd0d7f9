#include "dsmt/features.hpp"

#include "dsmt/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <string>

namespace dsmt {

void BevGridConfig::validate() const {
    if (rows <= 0 || cols <= 0 || !(meters_per_cell > 0.0)) {
        throw ConfigError("bird's-eye grid needs positive rows, cols and meters_per_cell");
    }
}

void FvGridConfig::validate() const {
    if (rows <= 0 || cols <= 0) throw ConfigError("frontal-view grid needs positive rows and cols");
}

bool SparseBinary::at(int index) const {
    return std::binary_search(active.begin(), active.end(), static_cast<std::int32_t>(index));
}

std::vector<double> SparseBinary::dense() const {
    std::vector<double> out(static_cast<std::size_t>(length), 0.0);
    for (auto i : active) out[static_cast<std::size_t>(i)] = 1.0;
    return out;
}

SparseBinary multiply(const SparseBinary& a, const SparseBinary& b) {
    if (a.length != b.length) throw StructuralError("binary vectors differ in length");
    SparseBinary out;
    out.length = a.length;
    std::set_intersection(a.active.begin(), a.active.end(), b.active.begin(), b.active.end(),
                          std::back_inserter(out.active));
    return out;
}

OccupancyGrid rasterize_bev(const Box3D& box, const BevGridConfig& config) {
    config.validate();
    OccupancyGrid grid;
    grid.rows = config.rows;
    grid.cols = config.cols;
    grid.meters_per_cell = config.meters_per_cell;
    grid.extent_x0 = config.x_min;
    grid.extent_y0 = config.y_min;
    grid.extent_x1 = config.x_max();
    grid.extent_y1 = config.y_max();
    grid.cells.length = config.cell_count();

    const double c = std::cos(box.yaw), s = std::sin(box.yaw);
    const double hl = 0.5 * box.length, hw = 0.5 * box.width;
    const double ex = std::abs(hl * c) + std::abs(hw * s);
    const double ey = std::abs(hl * s) + std::abs(hw * c);
    const double mpc = config.meters_per_cell;

    const int c_lo = std::max(0, static_cast<int>(std::floor((box.center_x - ex - config.x_min) / mpc - 0.5)));
    const int c_hi = std::min(config.cols - 1, static_cast<int>(std::ceil((box.center_x + ex - config.x_min) / mpc - 0.5)));
    const int r_lo = std::max(0, static_cast<int>(std::floor((box.center_y - ey - config.y_min) / mpc - 0.5)));
    const int r_hi = std::min(config.rows - 1, static_cast<int>(std::ceil((box.center_y + ey - config.y_min) / mpc - 0.5)));

    for (int r = r_lo; r <= r_hi; ++r) {
        const double dy = config.y_min + (r + 0.5) * mpc - box.center_y;
        for (int col = c_lo; col <= c_hi; ++col) {
            const double dx = config.x_min + (col + 0.5) * mpc - box.center_x;
            const double along = dx * c + dy * s;
            const double across = -dx * s + dy * c;
            if (std::abs(along) <= hl && std::abs(across) <= hw) {
                grid.cells.active.push_back(r * config.cols + col);
            }
        }
    }
    return grid;
}

Box3D compensate_ego(const Box3D& box, const EgoMotion& ego) {
    Box3D out = box;
    out.center_x -= ego.vx * ego.frame_dt;
    out.center_y -= ego.vy * ego.frame_dt;
    return out;
}

Box2D project_box(const Box3D& box, const CameraModel& camera) {
    if (!(box.center_x > 0.0)) return Box2D{0.0, 0.0, 0.0, 0.0};
    const double c = std::cos(box.yaw), s = std::sin(box.yaw);
    double u_min = INFINITY, u_max = -INFINITY, v_min = INFINITY, v_max = -INFINITY;
    for (int i = 0; i < 8; ++i) {
        const double lx = ((i & 1) ? 0.5 : -0.5) * box.length;
        const double ly = ((i & 2) ? 0.5 : -0.5) * box.width;
        const double lz = ((i & 4) ? 0.5 : -0.5) * box.height;
        const double x = std::max(kMinProjectionDepth, box.center_x + lx * c - ly * s);
        const double y = box.center_y + lx * s + ly * c;
        const double z = box.center_z + lz;
        const double u = camera.principal_u - camera.focal_u * y / x;
        const double v = camera.principal_v - camera.focal_v * z / x;
        u_min = std::min(u_min, u);
        u_max = std::max(u_max, u);
        v_min = std::min(v_min, v);
        v_max = std::max(v_max, v);
    }
    return Box2D{u_min, v_min, u_max, v_max};
}

OccupancyGrid rasterize_fv(const Box3D& box, const CameraModel& camera, const FvGridConfig& config) {
    config.validate();
    OccupancyGrid grid;
    grid.rows = config.rows;
    grid.cols = config.cols;
    grid.extent_x1 = camera.image_width;
    grid.extent_y1 = camera.image_height;
    grid.cells.length = config.cell_count();

    const Box2D rect = project_box(box, camera);
    if (!(rect.right > rect.left)) return grid;

    const double su = camera.image_width / config.cols;
    const double sv = camera.image_height / config.rows;
    const int c_lo = std::max(0, static_cast<int>(std::floor(rect.left / su - 0.5)));
    const int c_hi = std::min(config.cols - 1, static_cast<int>(std::ceil(rect.right / su - 0.5)));
    const int r_lo = std::max(0, static_cast<int>(std::floor(rect.top / sv - 0.5)));
    const int r_hi = std::min(config.rows - 1, static_cast<int>(std::ceil(rect.bottom / sv - 0.5)));
    for (int r = r_lo; r <= r_hi; ++r) {
        const double cv = (r + 0.5) * sv;
        if (cv < rect.top || cv > rect.bottom) continue;
        for (int col = c_lo; col <= c_hi; ++col) {
            const double cu = (col + 0.5) * su;
            if (cu >= rect.left && cu <= rect.right) grid.cells.active.push_back(r * config.cols + col);
        }
    }
    return grid;
}

std::vector<double> appearance_similarity(const Appearance& a, const Appearance& b) {
    if (a.block_count() != b.block_count() || a.block_length() != b.block_length()) {
        throw StructuralError("appearance shapes differ");
    }
    std::vector<double> sim(a.block_count(), 0.0);
    for (std::size_t l = 0; l < a.block_count(); ++l) {
        const auto x = a.block(l), y = b.block(l);
        double d = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) d += x[i] * y[i];
        sim[l] = d;
    }
    return sim;
}

PairFeatures pair_features(const Detection& a, const Detection& b, const EgoMotion& ego,
                           const CameraModel& camera, const FeatureConfig& config) {
    if (b.frame_idx != a.frame_idx + 1) {
        throw StructuralError("pair features need consecutive frames, got " + std::to_string(a.frame_idx) +
                              " and " + std::to_string(b.frame_idx));
    }
    const Box3D moved = compensate_ego(a.box3d, ego);
    PairFeatures f;
    f.appearance_sim = appearance_similarity(a.appearance, b.appearance);
    f.bev_product = multiply(rasterize_bev(moved, config.bev).cells, rasterize_bev(b.box3d, config.bev).cells);
    f.fv_product = multiply(rasterize_fv(moved, camera, config.fv).cells, rasterize_fv(b.box3d, camera, config.fv).cells);
    return f;
}

} // namespace dsmt
