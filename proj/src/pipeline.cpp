#include "dsmt/pipeline.hpp"

#include "dsmt/error.hpp"

#include <algorithm>
#include <map>

namespace dsmt {

LabeledSequence to_labeled(const Scenario& scenario) {
    return {scenario.name, scenario.sequence, scenario.ground_truth};
}

std::vector<LabeledSequence> to_labeled(std::span<const Scenario> scenarios) {
    std::vector<LabeledSequence> out;
    out.reserve(scenarios.size());
    for (const auto& s : scenarios) out.push_back(to_labeled(s));
    return out;
}

std::vector<FrameWindow> split_windows(int frame_count, int length) {
    std::vector<FrameWindow> out;
    if (frame_count <= 0) return out;
    if (length <= 0) length = frame_count;
    for (int b = 0; b < frame_count; b += length) out.push_back({b, std::min(frame_count, b + length)});
    return out;
}

std::vector<TrainingWindow> prepare_windows(std::span<const LabeledSequence> data, const WindowConfig& windows,
                                            const ModelConfig& model) {
    std::vector<TrainingWindow> out;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const auto& seq = data[s].sequence;
        seq.validate();
        for (const auto& w : split_windows(static_cast<int>(seq.frame_count()), windows.window_length)) {
            auto graph = std::make_shared<AssociationGraph>(build_graph(seq, w, windows.gate));
            if (graph->layout.detection_count() == 0) continue;
            TrainingWindow tw;
            tw.sequence = static_cast<int>(s);
            tw.gold = derive_gold(*graph, seq, data[s].ground_truth, windows.gold_iou_threshold);
            tw.features = std::make_shared<const GraphFeatures>(compute_graph_features(*graph, seq, model));
            tw.graph = std::move(graph);
            out.push_back(std::move(tw));
        }
    }
    return out;
}

std::vector<TrackedBox> trajectories_to_boxes(const TrackSequence& seq, std::span<const Trajectory> trajectories,
                                              int first_track_id) {
    std::map<DetId, const Detection*> by_id;
    for (const auto& frame : seq.frames) {
        for (const auto& d : frame) by_id[d.det_id] = &d;
    }
    std::vector<TrackedBox> out;
    int id = first_track_id;
    for (const auto& t : trajectories) {
        for (const auto& e : t.entries) {
            auto it = by_id.find(e.det_id);
            if (it == by_id.end()) throw StructuralError("trajectory references unknown detection " + std::to_string(e.det_id));
            TrackedBox b;
            b.frame_idx = e.frame_idx;
            b.track_id = id;
            b.box2d = it->second->box2d;
            b.box3d = it->second->box3d;
            out.push_back(b);
        }
        ++id;
    }
    std::stable_sort(out.begin(), out.end(), [](const TrackedBox& a, const TrackedBox& b) {
        return a.frame_idx != b.frame_idx ? a.frame_idx < b.frame_idx : a.track_id < b.track_id;
    });
    return out;
}

std::vector<TrackedBox> track_sequence(const CostModel& model, const TrackSequence& seq, const TrackConfig& config) {
    seq.validate();
    std::vector<TrackedBox> out;
    int next_id = 1;
    for (const auto& w : split_windows(static_cast<int>(seq.frame_count()), config.window_length)) {
        AssociationGraph graph = build_graph(seq, w, config.gate);
        if (graph.layout.detection_count() == 0) continue;
        graph.costs = score_graph(model, graph, seq).theta;
        const Solution sol = solve(graph);
        auto boxes = trajectories_to_boxes(seq, sol.trajectories, next_id);
        next_id += static_cast<int>(sol.trajectories.size());
        out.insert(out.end(), boxes.begin(), boxes.end());
    }
    return out;
}

} // namespace dsmt
