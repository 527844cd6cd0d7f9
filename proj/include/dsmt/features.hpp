#pragma once

// Matching-network inputs: occupancy grids in bird's-eye and frontal view,
// their per-pair products, and blocked appearance similarities.

#include "dsmt/core.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dsmt {

// Bird's-eye grid. Row r covers lateral y, column c covers forward x; the
// cell center is (x_min + (c + 0.5) * mpc, y_min + (r + 0.5) * mpc).
struct BevGridConfig {
    int rows = 180;
    int cols = 200;
    double meters_per_cell = 0.2;
    double x_min = 0.0;
    double y_min = -18.0;

    double x_max() const { return x_min + cols * meters_per_cell; }
    double y_max() const { return y_min + rows * meters_per_cell; }
    int cell_count() const { return rows * cols; }
    void validate() const;
};

// Frontal-view grid: the image plane scaled to rows x cols.
struct FvGridConfig {
    int rows = 120;
    int cols = 300;

    int cell_count() const { return rows * cols; }
    void validate() const;
};

struct FeatureConfig {
    BevGridConfig bev;
    FvGridConfig fv;
};

// Binary vector of fixed length stored as sorted active indices.
struct SparseBinary {
    int length = 0;
    std::vector<std::int32_t> active;

    bool at(int index) const;
    std::vector<double> dense() const;
    std::size_t count() const { return active.size(); }
    friend bool operator==(const SparseBinary&, const SparseBinary&) = default;
};

// Element-wise product of two binary vectors of equal length.
SparseBinary multiply(const SparseBinary& a, const SparseBinary& b);

struct OccupancyGrid {
    int rows = 0;
    int cols = 0;
    double meters_per_cell = 0.0; // bird's-eye only, 0 for frontal view
    double extent_x0 = 0.0, extent_y0 = 0.0, extent_x1 = 0.0, extent_y1 = 0.0;
    SparseBinary cells; // row-major flattening, rows * cols

    bool at(int r, int c) const { return cells.at(r * cols + c); }
    std::size_t active_count() const { return cells.count(); }
};

// Cells whose center lies inside the yaw-rotated length x width footprint;
// everything outside the grid extent is clipped.
OccupancyGrid rasterize_bev(const Box3D& box, const BevGridConfig& config);

// Expresses a box observed one frame earlier in the coordinates of the frame
// that ends the ego motion interval: translated by -(vx, vy) * dt.
Box3D compensate_ego(const Box3D& box, const EgoMotion& ego);

// Pinhole image-plane rectangle of the eight corners. Camera sits at the ego
// origin looking along +x: u = cu - fu * y / x, v = cv - fv * z / x. Corner
// depths are clamped to kMinProjectionDepth. Returns a degenerate rectangle
// (right <= left) when the box center is not in front of the camera.
inline constexpr double kMinProjectionDepth = 0.1;
Box2D project_box(const Box3D& box, const CameraModel& camera);

// Projected rectangle scaled from image to grid size and filled (cell
// center test). All-zero when the box center is not in front of the camera.
OccupancyGrid rasterize_fv(const Box3D& box, const CameraModel& camera, const FvGridConfig& config);

struct PairFeatures {
    std::vector<double> appearance_sim; // one dot product per block
    SparseBinary bev_product;
    SparseBinary fv_product;
};

// `ego` is the motion between frame(a) and frame(b); `a` is compensated into
// b's frame before rasterizing. Throws StructuralError unless
// frame(b) == frame(a) + 1 and the appearance shapes agree.
PairFeatures pair_features(const Detection& a, const Detection& b, const EgoMotion& ego,
                           const CameraModel& camera, const FeatureConfig& config);

// Per-block dot products of two appearance vectors.
std::vector<double> appearance_similarity(const Appearance& a, const Appearance& b);

} // namespace dsmt
