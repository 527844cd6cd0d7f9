#include "dsmt/assoc.hpp"

#include "dsmt/error.hpp"
#include "dsmt/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace dsmt {

const char* to_string(VariableKind kind) {
    switch (kind) {
    case VariableKind::det: return "det";
    case VariableKind::link: return "link";
    case VariableKind::new_track: return "new";
    case VariableKind::end_track: return "end";
    }
    return "?";
}

VariableLayout::VariableLayout(std::vector<DetRef> detections, std::vector<LinkVar> links)
    : detections_(std::move(detections)), links_(std::move(links)),
      incoming_(detections_.size()), outgoing_(detections_.size()) {
    const int n = detection_count();
    for (int l = 0; l < link_count(); ++l) {
        const auto& lk = links_[l];
        if (lk.from < 0 || lk.from >= n || lk.to < 0 || lk.to >= n) {
            throw StructuralError("link " + std::to_string(l) + " references a missing detection");
        }
        if (detections_[lk.to].frame_idx != detections_[lk.from].frame_idx + 1) {
            throw StructuralError("link " + std::to_string(l) + " does not join adjacent frames");
        }
        outgoing_[lk.from].push_back(l);
        incoming_[lk.to].push_back(l);
    }
}

VariableKind VariableLayout::kind(int var) const {
    const int n = detection_count();
    const int m = link_count();
    if (var < 0 || var >= size()) throw StructuralError("variable index out of range");
    if (var < n) return VariableKind::det;
    if (var < n + m) return VariableKind::link;
    if (var < 2 * n + m) return VariableKind::new_track;
    return VariableKind::end_track;
}

int VariableLayout::owner(int var) const {
    const int n = detection_count();
    const int m = link_count();
    switch (kind(var)) {
    case VariableKind::det: return var;
    case VariableKind::link: return var - n;
    case VariableKind::new_track: return var - n - m;
    case VariableKind::end_track: return var - 2 * n - m;
    }
    return -1;
}

std::optional<int> VariableLayout::find_link(int from, int to) const {
    if (from < 0 || from >= detection_count()) return std::nullopt;
    for (int l : outgoing_[from]) {
        if (links_[l].to == to) return l;
    }
    return std::nullopt;
}

std::optional<int> VariableLayout::find_detection(DetId id) const {
    for (int j = 0; j < detection_count(); ++j) {
        if (detections_[j].det_id == id) return j;
    }
    return std::nullopt;
}

double objective(std::span<const double> costs, const Assignment& y) {
    if (costs.size() != y.size()) throw StructuralError("cost vector and assignment differ in length");
    double s = 0.0;
    for (std::size_t i = 0; i < costs.size(); ++i) {
        if (y[i]) s += costs[i];
    }
    return s;
}

AssociationGraph build_graph(const TrackSequence& seq, FrameWindow window, const GateConfig& gate) {
    if (window.end <= window.begin) throw StructuralError("empty frame window");
    if (window.begin < 0 || window.end > static_cast<int>(seq.frame_count())) {
        throw StructuralError("frame window [" + std::to_string(window.begin) + ", " +
                              std::to_string(window.end) + ") exceeds sequence of " +
                              std::to_string(seq.frame_count()) + " frames");
    }

    std::vector<DetRef> dets;
    std::vector<int> frame_start; // local index of the first detection per window frame
    for (int f = window.begin; f < window.end; ++f) {
        frame_start.push_back(static_cast<int>(dets.size()));
        const auto& frame = seq.frames[f];
        for (int i = 0; i < static_cast<int>(frame.size()); ++i) {
            dets.push_back({f, i, frame[i].det_id});
        }
    }
    frame_start.push_back(static_cast<int>(dets.size()));

    std::vector<LinkVar> links;
    for (int f = window.begin; f + 1 < window.end; ++f) {
        const int a0 = frame_start[f - window.begin], a1 = frame_start[f - window.begin + 1];
        const int b1 = frame_start[f - window.begin + 2];
        for (int j = a0; j < a1; ++j) {
            for (int k = a1; k < b1; ++k) {
                if (gate.radius_m) {
                    const auto& ba = seq.frames[f][dets[j].index_in_frame].box3d;
                    const auto& bb = seq.frames[f + 1][dets[k].index_in_frame].box3d;
                    const double dist = std::sqrt(std::pow(ba.center_x - bb.center_x, 2) +
                                                  std::pow(ba.center_y - bb.center_y, 2) +
                                                  std::pow(ba.center_z - bb.center_z, 2));
                    if (dist > *gate.radius_m) continue;
                }
                links.push_back({j, k});
            }
        }
    }

    AssociationGraph g;
    g.layout = VariableLayout(std::move(dets), std::move(links));
    g.costs.assign(static_cast<std::size_t>(g.layout.size()), 0.0);
    g.first_frame = window.begin;
    g.end_frame = window.end;
    return g;
}

AssociationGraph build_graph(const TrackSequence& seq, const GateConfig& gate) {
    return build_graph(seq, FrameWindow{0, static_cast<int>(seq.frame_count())}, gate);
}

Feasibility check_feasible(const AssociationGraph& graph, const Assignment& y) {
    const auto& layout = graph.layout;
    if (static_cast<int>(y.size()) != layout.size()) {
        throw StructuralError("assignment has " + std::to_string(y.size()) + " values, layout expects " +
                              std::to_string(layout.size()));
    }
    Feasibility out;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] > 1) {
            const int j = layout.kind(static_cast<int>(i)) == VariableKind::link
                              ? layout.links()[layout.owner(static_cast<int>(i))].from
                              : layout.owner(static_cast<int>(i));
            out.feasible = false;
            out.detection = j;
            out.det_id = layout.detections()[j].det_id;
            out.message = "variable " + std::to_string(i) + " is not binary";
            return out;
        }
    }
    for (int j = 0; j < layout.detection_count(); ++j) {
        const int det = y[layout.det_var(j)];
        int in = y[layout.new_var(j)];
        for (int l : layout.incoming(j)) in += y[layout.link_var(l)];
        int out_flow = y[layout.end_var(j)];
        for (int l : layout.outgoing(j)) out_flow += y[layout.link_var(l)];
        const int which = in != det ? 1 : (out_flow != det ? 2 : 0);
        if (which != 0) {
            out.feasible = false;
            out.detection = j;
            out.det_id = layout.detections()[j].det_id;
            out.equality = which;
            out.message = "flow conservation violated at detection " + std::to_string(out.det_id) +
                          (which == 1 ? " (new + incoming links != det)" : " (end + outgoing links != det)");
            return out;
        }
    }
    return out;
}

Assignment encode_trajectories(std::span<const Trajectory> trajectories, const AssociationGraph& graph) {
    const auto& layout = graph.layout;
    Assignment y(static_cast<std::size_t>(layout.size()));
    for (const auto& t : trajectories) {
        if (t.entries.empty()) throw StructuralError("empty trajectory");
        int prev = -1;
        for (std::size_t e = 0; e < t.entries.size(); ++e) {
            const auto j = layout.find_detection(t.entries[e].det_id);
            if (!j) throw StructuralError("trajectory references unknown detection " + std::to_string(t.entries[e].det_id));
            if (y[layout.det_var(*j)]) {
                throw StructuralError("detection " + std::to_string(t.entries[e].det_id) + " used twice");
            }
            y[layout.det_var(*j)] = 1;
            if (prev < 0) {
                y[layout.new_var(*j)] = 1;
            } else {
                const auto l = layout.find_link(prev, *j);
                if (!l) throw StructuralError("trajectory uses a link absent from the layout");
                y[layout.link_var(*l)] = 1;
            }
            prev = *j;
        }
        y[layout.end_var(prev)] = 1;
    }
    return y;
}

GoldAssignment derive_gold(const AssociationGraph& graph, const TrackSequence& seq,
                           std::span<const TrackedBox> ground_truth, double iou_threshold) {
    const auto& layout = graph.layout;
    GoldAssignment gold;
    gold.assignment = Assignment(static_cast<std::size_t>(layout.size()));
    gold.matched_track.assign(static_cast<std::size_t>(layout.detection_count()), -1);

    std::map<int, std::vector<const TrackedBox*>> gt_by_frame;
    for (const auto& b : ground_truth) {
        if (b.dont_care) continue;
        if (b.frame_idx < graph.first_frame || b.frame_idx >= graph.end_frame) continue;
        gt_by_frame[b.frame_idx].push_back(&b);
    }

    std::map<int, std::vector<int>> dets_by_frame;
    for (int j = 0; j < layout.detection_count(); ++j) {
        dets_by_frame[layout.detections()[j].frame_idx].push_back(j);
    }

    for (int f = graph.first_frame; f < graph.end_frame; ++f) {
        const auto& gts = gt_by_frame[f];
        const auto& dets = dets_by_frame[f];
        WeightMatrix w(dets.size(), gts.size());
        for (std::size_t r = 0; r < dets.size(); ++r) {
            const auto& ref = layout.detections()[dets[r]];
            const auto& box = seq.frames[f][ref.index_in_frame].box2d;
            for (std::size_t c = 0; c < gts.size(); ++c) w(r, c) = iou(box, gts[c]->box2d);
        }
        const auto pairs = max_weight_matching(w, iou_threshold);
        for (const auto& [r, c] : pairs) gold.matched_track[dets[r]] = gts[c]->track_id;
        gold.unmatched_gt_count += static_cast<int>(gts.size() - pairs.size());
    }

    auto& y = gold.assignment;
    for (int j = 0; j < layout.detection_count(); ++j) {
        if (gold.matched_track[j] >= 0) y[layout.det_var(j)] = 1;
    }
    for (int l = 0; l < layout.link_count(); ++l) {
        const auto& lk = layout.links()[l];
        const int ta = gold.matched_track[lk.from];
        if (ta >= 0 && ta == gold.matched_track[lk.to]) y[layout.link_var(l)] = 1;
    }
    for (int j = 0; j < layout.detection_count(); ++j) {
        if (!y[layout.det_var(j)]) continue;
        bool has_in = false, has_out = false;
        for (int l : layout.incoming(j)) has_in = has_in || y[layout.link_var(l)];
        for (int l : layout.outgoing(j)) has_out = has_out || y[layout.link_var(l)];
        y[layout.new_var(j)] = has_in ? 0 : 1;
        y[layout.end_var(j)] = has_out ? 0 : 1;
    }
    return gold;
}

} // namespace dsmt
