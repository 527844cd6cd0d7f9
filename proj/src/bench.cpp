#include "dsmt/bench.hpp"

#include "dsmt/error.hpp"

#include <algorithm>
#include <cstdio>

namespace dsmt {

std::vector<LabeledPair> labeled_pairs(std::span<const LabeledSequence> data, const WindowConfig& windows,
                                       const FeatureConfig& features) {
    std::vector<LabeledPair> out;
    for (const auto& ls : data) {
        const auto& seq = ls.sequence;
        for (const auto& w : split_windows(static_cast<int>(seq.frame_count()), windows.window_length)) {
            const AssociationGraph g = build_graph(seq, w, windows.gate);
            if (g.layout.detection_count() == 0) continue;
            const GoldAssignment gold = derive_gold(g, seq, ls.ground_truth, windows.gold_iou_threshold);
            for (const auto& lk : g.layout.links()) {
                const auto& ra = g.layout.detections()[lk.from];
                const auto& rb = g.layout.detections()[lk.to];
                LabeledPair p;
                p.a = &seq.frames[ra.frame_idx][ra.index_in_frame];
                p.b = &seq.frames[rb.frame_idx][rb.index_in_frame];
                p.features = pair_features(*p.a, *p.b, seq.ego[rb.frame_idx], seq.camera, features);
                const int t = gold.matched_track[lk.from];
                p.same = t >= 0 && t == gold.matched_track[lk.to];
                out.push_back(std::move(p));
            }
        }
    }
    return out;
}

double MatchBench::best_baseline_error() const {
    double best = 1.0;
    for (const auto& r : baselines) best = std::min(best, r.error);
    return best;
}

MatchBench match_bench(const CostModel& model, std::span<const LabeledSequence> fit,
                       std::span<const LabeledSequence> test, const WindowConfig& windows) {
    const auto fit_pairs = labeled_pairs(fit, windows, model.config.features);
    const auto test_pairs = labeled_pairs(test, windows, model.config.features);
    if (fit_pairs.empty() || test_pairs.empty()) throw DataError("match bench needs candidate pairs on both splits");

    std::vector<std::uint8_t> fit_labels, test_labels;
    for (const auto& p : fit_pairs) fit_labels.push_back(p.same);
    for (const auto& p : test_pairs) test_labels.push_back(p.same);

    MatchBench bench;
    bench.fit_pairs = fit_pairs.size();
    bench.test_pairs = test_pairs.size();
    for (auto kind : kAllAffinities) {
        const double sign = higher_is_similar(kind) ? 1.0 : -1.0;
        std::vector<double> fs, ts;
        for (const auto& p : fit_pairs) fs.push_back(sign * affinity(*p.a, *p.b, kind));
        for (const auto& p : test_pairs) ts.push_back(sign * affinity(*p.a, *p.b, kind));
        const ThresholdFit t = fit_threshold(fs, fit_labels);
        bench.baselines.push_back({to_string(kind), sign * t.threshold, threshold_error(ts, test_labels, t.threshold)});
    }
    std::vector<double> scores;
    for (const auto& p : test_pairs) scores.push_back(score_link(model, p.features));
    bench.learned = {"learned", 0.0, threshold_error(scores, test_labels, 0.0)};
    return bench;
}

std::string format_match_bench(const MatchBench& bench) {
    std::string out = "# fit_pairs=" + std::to_string(bench.fit_pairs) +
                      " test_pairs=" + std::to_string(bench.test_pairs) + "\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-14s %12s %10s\n", "method", "threshold", "error");
    out += buf;
    auto row = [&](const MatchBenchRow& r) {
        std::snprintf(buf, sizeof buf, "%-14s %12.6g %10.6f\n", r.method.c_str(), r.threshold, r.error);
        out += buf;
    };
    for (const auto& r : bench.baselines) row(r);
    row(bench.learned);
    return out;
}

} // namespace dsmt
