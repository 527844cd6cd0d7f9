#pragma once

// CLEAR MOT evaluation with mostly-tracked / mostly-lost coverage, and the
// pair matching error rate.

#include "dsmt/core.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dsmt {

enum class MatchCriterion {
    iou_2d,             // image-plane IoU >= iou_threshold
    center_distance_3d, // 3D center distance <= distance_threshold_m
};

struct EvalConfig {
    MatchCriterion criterion = MatchCriterion::iou_2d;
    double iou_threshold = 0.5;
    double distance_threshold_m = 1.0;
};

struct FrameMatch {
    int gt_track = 0;
    int hyp_track = 0;
    double overlap = 0.0; // 2D IoU of the pair
    bool id_switch = false;
    friend bool operator==(const FrameMatch&, const FrameMatch&) = default;
};

struct FrameMatches {
    int frame_idx = 0;
    std::vector<FrameMatch> matches;
};

struct MotReport {
    double mota = 0.0;
    double motp = 0.0;
    int ids = 0;
    int frag = 0;
    int fp = 0;
    int fn = 0;
    int tp = 0;
    int gt_boxes = 0;
    int gt_tracks = 0;
    int mostly_tracked = 0;
    int mostly_lost = 0;
    double mt_fraction = 0.0;
    double ml_fraction = 0.0;
    std::vector<FrameMatches> per_frame;
};

// Per frame: matches from the previous frame are kept while they still pass
// the criterion, the rest are assigned by maximum total IoU (or minimum total
// distance). An id switch is counted when a ground-truth track is matched to
// a hypothesis other than the one it was last matched to. FRAG counts every
// resumption of coverage after a gap inside a ground-truth track's lifetime.
// Unmatched hypotheses overlapping a don't-care box are not false positives.
// Throws DataError when there are no ground-truth boxes, or when a track id
// occurs twice in one frame.
MotReport evaluate(std::span<const TrackedBox> hypotheses, std::span<const TrackedBox> ground_truth,
                   const EvalConfig& config = {});

// Sums counts over several sequences. MOTA and MOTP are recomputed from the
// totals and MT/ML from the track counts; per-frame matches are dropped.
MotReport combine_reports(std::span<const MotReport> reports);

// Fraction of pairs where (score > 0) disagrees with the label.
double matching_accuracy(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Flat `key value` lines, and a JSON document with the same scalars plus the
// per-frame matches.
std::string report_to_text(const MotReport& report);
std::string report_to_json(const MotReport& report);

} // namespace dsmt
