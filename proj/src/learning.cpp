#include "dsmt/learning.hpp"

#include "dsmt/error.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace dsmt {

namespace {

double logistic_loss(double s, bool label) {
    return std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s))) - (label ? s : 0.0);
}

double sigmoid(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Mutable graph copies whose costs are refreshed every iteration.
std::vector<AssociationGraph> graph_copies(std::span<const TrainingWindow> windows) {
    std::vector<AssociationGraph> out;
    out.reserve(windows.size());
    for (const auto& w : windows) out.push_back(*w.graph);
    return out;
}

struct BatchEval {
    double loss = 0.0;
    Gradient grad;
};

BatchEval evaluate_batch(const CostModel& model, std::span<const TrainingWindow> windows,
                         std::vector<AssociationGraph>& graphs, std::span<const int> batch,
                         const HammingWeights& weights, bool want_grad) {
    std::vector<ScoreCache> caches;
    std::vector<HingeInstance> instances;
    caches.reserve(batch.size());
    for (int b : batch) {
        ScoredGraph sg = score_graph(model, graphs[b], windows[b].features);
        graphs[b].costs = std::move(sg.theta);
        caches.push_back(std::move(sg.cache));
        instances.push_back({&graphs[b], &windows[b].gold.assignment});
    }
    const HingeResult h = hinge_loss(instances, weights);
    BatchEval out;
    out.loss = h.loss;
    if (want_grad) {
        out.grad = model.zeros_like();
        if (h.loss > 0.0) {
            for (std::size_t i = 0; i < batch.size(); ++i) backward_accumulate(model, caches[i], h.dtheta[i], out.grad);
        }
    }
    return out;
}

void write_header(std::ostream* log, const char* mode, const TrainConfig& c, std::size_t windows) {
    if (!log) return;
    *log << "# mode=" << mode << " lr=" << c.adam.lr << " beta1=" << c.adam.beta1 << " beta2=" << c.adam.beta2
         << " epsilon=" << c.adam.epsilon << " iterations=" << c.iterations << " batch_size=" << c.batch_size
         << " windows=" << windows << " seed=" << c.seed << " init_stddev=" << c.init_stddev << "\n";
}

void write_iteration(std::ostream* log, int it, double loss, const Stopwatch& clock) {
    if (!log) return;
    char buf[128];
    std::snprintf(buf, sizeof buf, "iter=%d loss=%.10g wall_s=%.3f\n", it, loss, clock.seconds());
    *log << buf << std::flush;
}

} // namespace

double HammingWeights::weight(VariableKind kind) const {
    switch (kind) {
    case VariableKind::det: return det;
    case VariableKind::link: return link;
    case VariableKind::new_track: return new_track;
    case VariableKind::end_track: return end_track;
    }
    return 1.0;
}

LossAugmentedSolution loss_augmented_solve(const AssociationGraph& graph, const Assignment& gold,
                                           const HammingWeights& weights, double scale) {
    const auto feas = check_feasible(graph, gold);
    if (!feas.feasible) throw StructuralError("gold assignment is infeasible: " + feas.message);

    AssociationGraph augmented = graph;
    double constant = 0.0;
    std::vector<double> w(graph.costs.size());
    for (std::size_t i = 0; i < graph.costs.size(); ++i) {
        w[i] = scale * weights.weight(graph.layout.kind(static_cast<int>(i)));
        augmented.costs[i] = graph.costs[i] + w[i] * (1.0 - 2.0 * gold[i]);
        constant += w[i] * gold[i];
    }
    LossAugmentedSolution out;
    Solution s = solve(augmented);
    out.augmented_objective = s.objective + constant;
    s.objective = objective(graph.costs, s.assignment);
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (s.assignment[i] != gold[i]) out.hamming += w[i];
    }
    out.solution = std::move(s);
    return out;
}

HingeResult hinge_loss(std::span<const HingeInstance> batch, const HammingWeights& weights) {
    HingeResult r;
    for (const auto& inst : batch) {
        const auto la = loss_augmented_solve(*inst.graph, *inst.gold, weights);
        const double term = la.augmented_objective - objective(inst.graph->costs, *inst.gold);
        r.terms.push_back(term);
        r.loss += term;
        r.argmax.push_back(la.solution.assignment);
    }
    for (std::size_t b = 0; b < batch.size(); ++b) {
        std::vector<double> d(batch[b].gold->size(), 0.0);
        if (r.loss > 0.0) {
            for (std::size_t i = 0; i < d.size(); ++i) {
                d[i] = static_cast<double>(r.argmax[b][i]) - static_cast<double>((*batch[b].gold)[i]);
            }
        }
        r.dtheta.push_back(std::move(d));
    }
    return r;
}

AdamState::AdamState(const CostModel& like, const AdamConfig& config)
    : config_(config), first_(like.zeros_like()), second_(like.zeros_like()) {
    if (!(config.lr > 0.0) || !(config.beta1 >= 0.0 && config.beta1 < 1.0) ||
        !(config.beta2 >= 0.0 && config.beta2 < 1.0) || !(config.epsilon > 0.0)) {
        throw ConfigError("Adam needs lr > 0, beta in [0, 1) and epsilon > 0");
    }
}

void AdamState::step(CostModel& model, const Gradient& grad) {
    ++steps_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    auto params = model.tensors();
    auto m = first_.tensors();
    auto v = second_.tensors();
    const auto g = grad.tensors();
    if (params.size() != g.size()) throw StructuralError("gradient does not match the model");
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (params[t].data.size() != g[t].data.size()) throw StructuralError("gradient tensor " + g[t].name + " has the wrong size");
        auto p = params[t].data;
        auto mt = m[t].data;
        auto vt = v[t].data;
        const auto gt = g[t].data;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (gt[i] == 0.0 && mt[i] == 0.0 && vt[i] == 0.0) continue;
            mt[i] = config_.beta1 * mt[i] + (1.0 - config_.beta1) * gt[i];
            vt[i] = config_.beta2 * vt[i] + (1.0 - config_.beta2) * gt[i] * gt[i];
            p[i] -= config_.lr * (mt[i] / c1) / (std::sqrt(vt[i] / c2) + config_.epsilon);
        }
    }
}

CostModel initial_model(const ModelConfig& model, const TrainConfig& config) {
    if (!(config.init_stddev >= 0.0)) throw ConfigError("init stddev must be nonnegative");
    CostModel m = CostModel::create(model);
    std::mt19937_64 rng(config.seed);
    if (config.init_stddev > 0.0) init_truncated_normal(m, config.init_stddev, rng);
    return m;
}

double structured_loss(const CostModel& model, std::span<const TrainingWindow> windows, const HammingWeights& weights) {
    auto graphs = graph_copies(windows);
    std::vector<int> all(windows.size());
    std::iota(all.begin(), all.end(), 0);
    return evaluate_batch(model, windows, graphs, all, weights, false).loss;
}

TrainResult train_end_to_end(std::span<const TrainingWindow> windows, const ModelConfig& model,
                             const TrainConfig& config, std::ostream* log) {
    if (config.iterations < 0 || config.batch_size < 0) throw ConfigError("iterations and batch size must be nonnegative");
    if (windows.empty()) throw StructuralError("no training windows");
    TrainResult result;
    result.model = initial_model(model, config);
    AdamState adam(result.model, config.adam);
    auto graphs = graph_copies(windows);

    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<int> order(windows.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t batch = config.batch_size == 0 ? windows.size()
                                                     : std::min<std::size_t>(config.batch_size, windows.size());
    std::size_t cursor = windows.size();
    std::vector<int> current = order;

    auto next_batch = [&] {
        if (batch == windows.size()) return;
        current.clear();
        while (current.size() < batch) {
            if (cursor == order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            current.push_back(order[cursor++]);
        }
    };

    write_header(log, "end2end", config, windows.size());
    Stopwatch clock;
    for (int it = 0; it < config.iterations; ++it) {
        next_batch();
        BatchEval e = evaluate_batch(result.model, windows, graphs, current, config.hamming, true);
        result.loss_trace.push_back(e.loss);
        write_iteration(log, it, e.loss, clock);
        if (!std::isfinite(e.loss)) throw DivergenceError("training loss became non-finite", result.loss_trace);
        adam.step(result.model, e.grad);
        result.model.check_finite();
    }
    if (config.iterations == 0) next_batch();
    const double final_loss = evaluate_batch(result.model, windows, graphs, current, config.hamming, false).loss;
    result.loss_trace.push_back(final_loss);
    write_iteration(log, config.iterations, final_loss, clock);
    if (!std::isfinite(final_loss)) throw DivergenceError("training loss became non-finite", result.loss_trace);
    return result;
}

std::vector<PairSample> pair_samples(std::span<const TrainingWindow> windows) {
    std::vector<PairSample> out;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const auto& layout = windows[w].graph->layout;
        const auto& matched = windows[w].gold.matched_track;
        for (int l = 0; l < layout.link_count(); ++l) {
            const auto& lk = layout.links()[l];
            const bool same = matched[lk.from] >= 0 && matched[lk.from] == matched[lk.to];
            out.push_back({&windows[w].features->links[l], same, static_cast<int>(w), l});
        }
    }
    return out;
}

TrainResult train_piecewise(std::span<const TrainingWindow> windows, std::span<const LabeledSequence> validation,
                            const ModelConfig& model, const TrainConfig& config, const TrackConfig& tracking,
                            const EvalConfig& eval, std::ostream* log) {
    if (config.iterations < 0) throw ConfigError("iterations must be nonnegative");
    if (windows.empty()) throw StructuralError("no training windows");
    TrainResult result;
    result.model = initial_model(model, config);
    AdamState adam(result.model, config.adam);

    std::size_t det_count = 0, link_count = 0;
    for (const auto& w : windows) {
        det_count += static_cast<std::size_t>(w.graph->layout.detection_count());
        link_count += static_cast<std::size_t>(w.graph->layout.link_count());
    }

    write_header(log, "piecewise", config, windows.size());
    Stopwatch clock;
    for (int it = 0; it < config.iterations; ++it) {
        Gradient grad = result.model.zeros_like();
        double det_loss = 0.0, link_loss = 0.0;
        for (const auto& w : windows) {
            const auto& layout = w.graph->layout;
            const int n = layout.detection_count();
            ScoredGraph sg = score_graph(result.model, *w.graph, w.features);
            std::vector<double> d(sg.theta.size(), 0.0);
            for (int j = 0; j < n; ++j) {
                const bool label = w.gold.matched_track[j] >= 0;
                const double s = sg.theta[layout.det_var(j)];
                det_loss += logistic_loss(s, label);
                d[layout.det_var(j)] = (sigmoid(s) - (label ? 1.0 : 0.0)) / static_cast<double>(det_count);
            }
            for (int l = 0; l < layout.link_count(); ++l) {
                const auto& lk = layout.links()[l];
                const int t = w.gold.matched_track[lk.from];
                const bool label = t >= 0 && t == w.gold.matched_track[lk.to];
                const double s = sg.theta[layout.link_var(l)];
                link_loss += logistic_loss(s, label);
                d[layout.link_var(l)] = (sigmoid(s) - (label ? 1.0 : 0.0)) / static_cast<double>(link_count);
            }
            backward_accumulate(result.model, sg.cache, d, grad);
        }
        const double loss = det_loss / std::max<std::size_t>(det_count, 1) +
                            (link_count ? link_loss / static_cast<double>(link_count) : 0.0);
        result.loss_trace.push_back(loss);
        write_iteration(log, it, loss, clock);
        if (!std::isfinite(loss)) throw DivergenceError("training loss became non-finite", result.loss_trace);
        adam.step(result.model, grad);
        result.model.check_finite();
    }

    if (validation.empty()) return result;
    if (!(config.search_step > 0.0) || config.search_max < config.search_min) {
        throw ConfigError("line search needs search_step > 0 and search_max >= search_min");
    }

    // Scores do not depend on theta_new / theta_end, so each validation graph
    // is scored once and only the new/end entries change per candidate.
    struct Scored {
        const LabeledSequence* data;
        AssociationGraph graph;
    };
    std::vector<Scored> scored;
    for (const auto& v : validation) {
        for (const auto& w : split_windows(static_cast<int>(v.sequence.frame_count()), tracking.window_length)) {
            AssociationGraph g = build_graph(v.sequence, w, tracking.gate);
            if (g.layout.detection_count() == 0) continue;
            g.costs = score_graph(result.model, g, v.sequence).theta;
            scored.push_back({&v, std::move(g)});
        }
    }
    const int steps = static_cast<int>(std::floor((config.search_max - config.search_min) / config.search_step + 1e-9));
    double best_mota = -std::numeric_limits<double>::infinity();
    double best_c = 0.0;
    for (int k = 0; k <= steps; ++k) {
        const double c = config.search_min + k * config.search_step;
        std::vector<MotReport> reports;
        std::size_t i = 0;
        for (const auto& v : validation) {
            std::vector<TrackedBox> boxes;
            int next_id = 1;
            for (; i < scored.size() && scored[i].data == &v; ++i) {
                auto& g = scored[i].graph;
                const int n = g.layout.detection_count();
                for (int j = 0; j < n; ++j) {
                    g.costs[g.layout.new_var(j)] = c;
                    g.costs[g.layout.end_var(j)] = c;
                }
                const Solution sol = solve(g);
                auto b = trajectories_to_boxes(v.sequence, sol.trajectories, next_id);
                next_id += static_cast<int>(sol.trajectories.size());
                boxes.insert(boxes.end(), b.begin(), b.end());
            }
            bool has_gt = false;
            for (const auto& b : v.ground_truth) has_gt = has_gt || !b.dont_care;
            if (has_gt) reports.push_back(evaluate(boxes, v.ground_truth, eval));
        }
        if (reports.empty()) break;
        const double mota = combine_reports(reports).mota;
        if (mota > best_mota) {
            best_mota = mota;
            best_c = c;
        }
    }
    result.model.theta_new = best_c;
    result.model.theta_end = best_c;
    result.selected_new_end = best_c;
    result.validation_mota = std::isfinite(best_mota) ? best_mota : 0.0;
    if (log) *log << "# line_search new_end=" << best_c << " validation_mota=" << result.validation_mota << "\n";
    return result;
}

} // namespace dsmt
