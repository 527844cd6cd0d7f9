#pragma once

// Domain types shared across the tracker.
//
// Coordinates: ego frame with x forward, y left, z up (meters); yaw is the
// rotation about z in radians, normalized to [-pi, pi).

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dsmt {

inline constexpr double kPi = 3.14159265358979323846;

// Wraps an angle into [-pi, pi).
double wrap_angle(double radians);

struct Box3D {
    double center_x = 0.0;
    double center_y = 0.0;
    double center_z = 0.0;
    double length = 1.0;
    double width = 1.0;
    double height = 1.0;
    double yaw = 0.0;

    double volume() const { return length * width * height; }
    // Throws StructuralError on non-positive dimensions or yaw out of range.
    void validate() const;

    friend bool operator==(const Box3D&, const Box3D&) = default;
};

struct Box2D {
    double left = 0.0;
    double top = 0.0;
    double right = 1.0;
    double bottom = 1.0;

    double width() const { return right - left; }
    double height() const { return bottom - top; }
    double area() const { return width() * height(); }
    void validate() const;

    friend bool operator==(const Box2D&, const Box2D&) = default;
};

// Intersection over union of two image-plane boxes; 0 for disjoint boxes.
double iou(const Box2D& a, const Box2D& b);

// Blocked appearance vector: `block_count` blocks of `block_length` values,
// stored contiguously.
class Appearance {
public:
    Appearance() = default;
    Appearance(std::size_t block_count, std::size_t block_length);
    Appearance(std::size_t block_count, std::size_t block_length, std::vector<double> values);

    std::size_t block_count() const { return block_count_; }
    std::size_t block_length() const { return block_length_; }
    std::span<const double> block(std::size_t l) const;
    std::span<double> block(std::size_t l);
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    friend bool operator==(const Appearance&, const Appearance&) = default;

private:
    std::size_t block_count_ = 0;
    std::size_t block_length_ = 0;
    std::vector<double> values_;
};

using DetId = std::int64_t;

struct Detection {
    DetId det_id = 0;
    int frame_idx = 0;
    Box3D box3d;
    Box2D box2d;
    Appearance appearance;
    double raw_score = 0.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

// Ego velocity over the interval that ends at a frame. ego[i] describes the
// motion between frame i-1 and frame i; ego[0] is carried but unused.
struct EgoMotion {
    double vx = 0.0;
    double vy = 0.0;
    double frame_dt = 0.1;

    friend bool operator==(const EgoMotion&, const EgoMotion&) = default;
};

struct CameraModel {
    double focal_u = 721.5377;
    double focal_v = 721.5377;
    double principal_u = 609.5593;
    double principal_v = 172.854;
    double image_width = 1242.0;
    double image_height = 375.0;

    void validate() const;
    friend bool operator==(const CameraModel&, const CameraModel&) = default;
};

struct TrackSequence {
    std::vector<std::vector<Detection>> frames;
    std::vector<EgoMotion> ego;
    CameraModel camera;

    std::size_t frame_count() const { return frames.size(); }
    std::size_t detection_count() const;
    // Checks frame indices, per-frame ego entries and appearance shapes.
    void validate() const;

    friend bool operator==(const TrackSequence&, const TrackSequence&) = default;
};

struct TrajectoryEntry {
    int frame_idx = 0;
    DetId det_id = 0;
    friend bool operator==(const TrajectoryEntry&, const TrajectoryEntry&) = default;
};

// Frames strictly consecutive, nonempty.
struct Trajectory {
    int track_id = 0;
    std::vector<TrajectoryEntry> entries;
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// A box with a track identity, used for ground truth and tracker output.
struct TrackedBox {
    int frame_idx = 0;
    int track_id = 0;
    Box2D box2d;
    Box3D box3d;
    double score = 1.0;
    bool dont_care = false;
};

struct Assignment;
struct AssociationGraph;

// Turns a flow-feasible assignment into trajectories, in order of the first
// detection of each trajectory. Throws StructuralError naming the offending
// detection when the assignment violates flow conservation.
std::vector<Trajectory> decode_trajectories(const Assignment& assignment,
                                            const AssociationGraph& graph);

} // namespace dsmt
