#pragma once

// Glue between the association graph, the scorers and the solver: labeled
// data, temporal windows and full-sequence tracking.

#include "dsmt/assoc.hpp"
#include "dsmt/datagen.hpp"
#include "dsmt/scoring.hpp"
#include "dsmt/solver.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dsmt {

struct LabeledSequence {
    std::string name;
    TrackSequence sequence;
    std::vector<TrackedBox> ground_truth;
};

LabeledSequence to_labeled(const Scenario& scenario);
std::vector<LabeledSequence> to_labeled(std::span<const Scenario> scenarios);

// Non-overlapping windows of `length` frames covering [0, frame_count); the
// last one may be shorter. length <= 0 gives a single window.
std::vector<FrameWindow> split_windows(int frame_count, int length);

// One association problem with everything that does not depend on the
// model parameters precomputed.
struct TrainingWindow {
    int sequence = 0; // index into the source list
    std::shared_ptr<const AssociationGraph> graph;
    std::shared_ptr<const GraphFeatures> features;
    GoldAssignment gold;
};

struct WindowConfig {
    int window_length = 10;
    GateConfig gate{5.0};
    double gold_iou_threshold = 0.5;
};

// Windows without detections are skipped.
std::vector<TrainingWindow> prepare_windows(std::span<const LabeledSequence> data, const WindowConfig& windows,
                                            const ModelConfig& model);

struct TrackConfig {
    int window_length = 0; // 0: solve the whole sequence at once
    GateConfig gate{5.0};
};

// Boxes of decoded trajectories; track ids are first_track_id, +1, ...
std::vector<TrackedBox> trajectories_to_boxes(const TrackSequence& seq, std::span<const Trajectory> trajectories,
                                              int first_track_id = 1);

// Scores and solves each window, returning tracked boxes with ids unique
// across the sequence.
std::vector<TrackedBox> track_sequence(const CostModel& model, const TrackSequence& seq, const TrackConfig& config);

} // namespace dsmt
