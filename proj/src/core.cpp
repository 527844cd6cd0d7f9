#include "dsmt/core.hpp"

#include "dsmt/assoc.hpp"
#include "dsmt/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dsmt {

double wrap_angle(double radians) {
    double a = std::fmod(radians + kPi, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    a -= kPi;
    // fmod can land exactly on +pi after the shift for inputs just below -pi.
    if (a >= kPi) a -= 2.0 * kPi;
    return a;
}

void Box3D::validate() const {
    if (!(length > 0.0 && width > 0.0 && height > 0.0)) {
        throw StructuralError("Box3D dimensions must be positive");
    }
    if (!(yaw >= -kPi && yaw < kPi)) {
        throw StructuralError("Box3D yaw must lie in [-pi, pi), got " + std::to_string(yaw));
    }
}

void Box2D::validate() const {
    if (!(right > left && bottom > top)) {
        throw StructuralError("Box2D requires right > left and bottom > top");
    }
}

double iou(const Box2D& a, const Box2D& b) {
    const double iw = std::min(a.right, b.right) - std::max(a.left, b.left);
    const double ih = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

Appearance::Appearance(std::size_t block_count, std::size_t block_length)
    : block_count_(block_count), block_length_(block_length), values_(block_count * block_length, 0.0) {}

Appearance::Appearance(std::size_t block_count, std::size_t block_length, std::vector<double> values)
    : block_count_(block_count), block_length_(block_length), values_(std::move(values)) {
    if (values_.size() != block_count_ * block_length_) {
        throw StructuralError("appearance expects " + std::to_string(block_count_ * block_length_) +
                              " values, got " + std::to_string(values_.size()));
    }
}

std::span<const double> Appearance::block(std::size_t l) const {
    return std::span<const double>(values_).subspan(l * block_length_, block_length_);
}

std::span<double> Appearance::block(std::size_t l) {
    return std::span<double>(values_).subspan(l * block_length_, block_length_);
}

void CameraModel::validate() const {
    if (!(focal_u > 0.0 && focal_v > 0.0)) throw StructuralError("camera focal lengths must be positive");
    if (!(principal_u >= 0.0 && principal_u <= image_width && principal_v >= 0.0 &&
          principal_v <= image_height)) {
        throw StructuralError("camera principal point must lie inside the image");
    }
}

std::size_t TrackSequence::detection_count() const {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.size();
    return n;
}

void TrackSequence::validate() const {
    if (ego.size() != frames.size()) {
        throw StructuralError("sequence has " + std::to_string(frames.size()) + " frames but " +
                              std::to_string(ego.size()) + " ego-motion entries");
    }
    camera.validate();
    std::size_t blocks = 0, block_len = 0;
    bool shape_set = false;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (!(ego[i].frame_dt > 0.0)) throw StructuralError("ego frame_dt must be positive");
        for (const auto& d : frames[i]) {
            if (d.frame_idx != static_cast<int>(i)) {
                throw StructuralError("detection " + std::to_string(d.det_id) + " has frame_idx " +
                                      std::to_string(d.frame_idx) + " but sits in frame " + std::to_string(i));
            }
            d.box3d.validate();
            d.box2d.validate();
            if (!shape_set) {
                blocks = d.appearance.block_count();
                block_len = d.appearance.block_length();
                shape_set = true;
            } else if (d.appearance.block_count() != blocks || d.appearance.block_length() != block_len) {
                throw StructuralError("detection " + std::to_string(d.det_id) + " has inconsistent appearance shape");
            }
        }
    }
}

std::vector<Trajectory> decode_trajectories(const Assignment& y, const AssociationGraph& graph) {
    const auto feas = check_feasible(graph, y);
    if (!feas.feasible) throw StructuralError(feas.message);

    const auto& layout = graph.layout;
    std::vector<Trajectory> out;
    for (int j = 0; j < layout.detection_count(); ++j) {
        if (!y[layout.new_var(j)]) continue;
        Trajectory t;
        t.track_id = static_cast<int>(out.size());
        int cur = j;
        while (true) {
            const auto& d = layout.detections()[cur];
            t.entries.push_back({d.frame_idx, d.det_id});
            if (y[layout.end_var(cur)]) break;
            int next = -1;
            for (int l : layout.outgoing(cur)) {
                if (y[layout.link_var(l)]) {
                    next = layout.links()[l].to;
                    break;
                }
            }
            cur = next; // feasibility guarantees exactly one active outgoing link
        }
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace dsmt
