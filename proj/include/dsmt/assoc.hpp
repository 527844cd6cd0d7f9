#pragma once

// The association problem for one temporal window.
//
// Variables are laid out as y = (det, link, new, end):
//   det_j  at j                     j in [0, n)
//   link_l at n + l                 l in [0, m)
//   new_j  at n + m + j
//   end_j  at 2n + m + j
// Flow conservation per detection j:
//   new_j + sum(incoming links) = det_j = end_j + sum(outgoing links)

#include "dsmt/core.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsmt {

enum class VariableKind { det, link, new_track, end_track };

const char* to_string(VariableKind kind);

struct DetRef {
    int frame_idx = 0;
    int index_in_frame = 0;
    DetId det_id = 0;
};

struct LinkVar {
    int from = 0; // local detection index, frame f
    int to = 0;   // local detection index, frame f + 1
};

class VariableLayout {
public:
    VariableLayout() = default;
    VariableLayout(std::vector<DetRef> detections, std::vector<LinkVar> links);

    int detection_count() const { return static_cast<int>(detections_.size()); }
    int link_count() const { return static_cast<int>(links_.size()); }
    int size() const { return 3 * detection_count() + link_count(); }

    int det_var(int j) const { return j; }
    int link_var(int l) const { return detection_count() + l; }
    int new_var(int j) const { return detection_count() + link_count() + j; }
    int end_var(int j) const { return 2 * detection_count() + link_count() + j; }

    VariableKind kind(int var) const;
    // Detection index for det/new/end variables, link index for links.
    int owner(int var) const;

    const std::vector<DetRef>& detections() const { return detections_; }
    const std::vector<LinkVar>& links() const { return links_; }
    // Link indices entering / leaving detection j.
    const std::vector<int>& incoming(int j) const { return incoming_[j]; }
    const std::vector<int>& outgoing(int j) const { return outgoing_[j]; }
    std::optional<int> find_link(int from, int to) const;
    std::optional<int> find_detection(DetId id) const;

private:
    std::vector<DetRef> detections_;
    std::vector<LinkVar> links_;
    std::vector<std::vector<int>> incoming_;
    std::vector<std::vector<int>> outgoing_;
};

struct AssociationGraph {
    VariableLayout layout;
    std::vector<double> costs; // theta, aligned with layout
    int first_frame = 0;
    int end_frame = 0; // one past the last frame
};

struct Assignment {
    std::vector<std::uint8_t> values;

    Assignment() = default;
    explicit Assignment(std::size_t n) : values(n, 0) {}
    std::size_t size() const { return values.size(); }
    std::uint8_t operator[](std::size_t i) const { return values[i]; }
    std::uint8_t& operator[](std::size_t i) { return values[i]; }
    friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Dot product theta . y, summed in variable order.
double objective(std::span<const double> costs, const Assignment& y);

// Half-open frame range [begin, end).
struct FrameWindow {
    int begin = 0;
    int end = 0;
};

struct GateConfig {
    std::optional<double> radius_m; // unset: every adjacent-frame pair is linkable
};

// Enumerates variables for the detections inside `window`. Costs are zero.
AssociationGraph build_graph(const TrackSequence& seq, FrameWindow window, const GateConfig& gate = {});
AssociationGraph build_graph(const TrackSequence& seq, const GateConfig& gate = {});

struct Feasibility {
    bool feasible = true;
    int detection = -1;   // local index of the first violating detection
    DetId det_id = 0;
    int equality = 0;     // 1: new + in = det, 2: end + out = det
    std::string message;
};

Feasibility check_feasible(const AssociationGraph& graph, const Assignment& y);

// Inverse of decode_trajectories: re-encodes trajectories over the layout.
Assignment encode_trajectories(std::span<const Trajectory> trajectories, const AssociationGraph& graph);

struct GoldAssignment {
    Assignment assignment;
    int unmatched_gt_count = 0;
    // Ground-truth track matched to each local detection, or -1.
    std::vector<int> matched_track;
};

// Matches candidates to ground-truth boxes per frame (maximum total IoU,
// pairs below `iou_threshold` discarded) and sets det/link/new/end so that
// matched candidates of one track form flow-feasible chains. Don't-care
// boxes are ignored.
GoldAssignment derive_gold(const AssociationGraph& graph, const TrackSequence& seq,
                           std::span<const TrackedBox> ground_truth, double iou_threshold = 0.5);

} // namespace dsmt
