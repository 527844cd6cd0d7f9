#pragma once

// Pair-matching comparison: every affinity baseline with a fitted threshold
// against the learned match scorer (threshold 0) on held-out pairs.

#include "dsmt/baselines.hpp"
#include "dsmt/pipeline.hpp"
#include "dsmt/scoring.hpp"

#include <span>
#include <string>
#include <vector>

namespace dsmt {

// Candidate links of every window with their detections and same-track
// label (both endpoints matched to one ground-truth track).
struct LabeledPair {
    const Detection* a = nullptr;
    const Detection* b = nullptr;
    PairFeatures features;
    bool same = false;
};

std::vector<LabeledPair> labeled_pairs(std::span<const LabeledSequence> data, const WindowConfig& windows,
                                       const FeatureConfig& features);

struct MatchBenchRow {
    std::string method;
    double threshold = 0.0;
    double error = 0.0;
};

struct MatchBench {
    std::vector<MatchBenchRow> baselines; // in kAllAffinities order
    MatchBenchRow learned;
    std::size_t fit_pairs = 0;
    std::size_t test_pairs = 0;

    double best_baseline_error() const;
};

// Thresholds are fit on `fit` pairs; errors are measured on `test` pairs.
MatchBench match_bench(const CostModel& model, std::span<const LabeledSequence> fit,
                       std::span<const LabeledSequence> test, const WindowConfig& windows);

std::string format_match_bench(const MatchBench& bench);

} // namespace dsmt
