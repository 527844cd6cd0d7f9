#pragma once

// Structured hinge training through the flow solver, Adam, and the
// piecewise (independently trained classifiers) baseline.
//
//   loss(W) = sum_b max_y [ Delta(y, gold_b) + theta_b(W) . (y - gold_b) ]
//   dloss/dtheta_b = y*_b - gold_b   if the batch sum S > 0, else 0

#include "dsmt/error.hpp"
#include "dsmt/metrics.hpp"
#include "dsmt/pipeline.hpp"
#include "dsmt/scoring.hpp"
#include "dsmt/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <span>
#include <vector>

namespace dsmt {

// Per-kind weights of the Hamming task loss.
struct HammingWeights {
    double det = 1.0;
    double link = 1.0;
    double new_track = 1.0;
    double end_track = 1.0;

    double weight(VariableKind kind) const;
};

struct LossAugmentedSolution {
    Solution solution;        // y*, with solution.objective = theta . y*
    double augmented_objective = 0.0; // theta . y* + scale * Delta(y*, gold)
    double hamming = 0.0;     // scale * Delta(y*, gold)
};

// Maximizes theta . y + scale * Delta(y, gold) by solving with
// theta'_i = theta_i + scale * w_i * (1 - 2 gold_i) and adding back
// scale * sum_i w_i gold_i. Throws StructuralError when gold is infeasible.
LossAugmentedSolution loss_augmented_solve(const AssociationGraph& graph, const Assignment& gold,
                                           const HammingWeights& weights = {}, double scale = 1.0);

// One batch member: a graph whose costs hold the current theta.
struct HingeInstance {
    const AssociationGraph* graph = nullptr;
    const Assignment* gold = nullptr;
};

struct HingeResult {
    double loss = 0.0;                      // S, the sum of the terms
    std::vector<double> terms;              // per instance
    std::vector<Assignment> argmax;         // y* per instance
    std::vector<std::vector<double>> dtheta; // per instance, zero when S <= 0
};

HingeResult hinge_loss(std::span<const HingeInstance> batch, const HammingWeights& weights = {});

struct AdamConfig {
    double lr = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class AdamState {
public:
    AdamState(const CostModel& like, const AdamConfig& config);

    // One descent step on `model` along `grad`.
    void step(CostModel& model, const Gradient& grad);
    long steps() const { return steps_; }
    const AdamConfig& config() const { return config_; }

private:
    AdamConfig config_;
    CostModel first_;
    CostModel second_;
    long steps_ = 0;
};

struct TrainConfig {
    int iterations = 200;
    int batch_size = 0; // windows per iteration, 0: every window
    std::uint64_t seed = 0;
    double init_stddev = 1e-3;
    AdamConfig adam;
    HammingWeights hamming;
    // Piecewise only: theta_new = theta_end = c is searched over
    // [search_min, search_max] in steps of search_step.
    double search_min = -10.0;
    double search_max = 10.0;
    double search_step = 0.25;
};

struct TrainResult {
    CostModel model;
    // End-to-end: batch loss before each update, plus the loss of the final
    // model on the last batch. Piecewise: mean logistic loss per iteration.
    std::vector<double> loss_trace;
    double selected_new_end = 0.0; // piecewise line-search result
    double validation_mota = 0.0;  // piecewise line-search score
};

// Thrown when the loss becomes non-finite; carries the trace so far.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, std::vector<double> trace)
        : NumericalError(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const { return trace_; }

private:
    std::vector<double> trace_;
};

// Model with init_truncated_normal(seed) applied.
CostModel initial_model(const ModelConfig& model, const TrainConfig& config);

// Writes one header line (`# key=value ...`) and one line per iteration
// (`iter=<i> loss=<value> wall_s=<seconds>`) to `log` when given.
TrainResult train_end_to_end(std::span<const TrainingWindow> windows, const ModelConfig& model,
                             const TrainConfig& config, std::ostream* log = nullptr);

// Sum of hinge terms of `model` on the windows (no update).
double structured_loss(const CostModel& model, std::span<const TrainingWindow> windows,
                       const HammingWeights& weights = {});

// Detection scorer and match scorer trained as logistic classifiers on
// matched-to-ground-truth and same-track labels, then theta_new = theta_end
// fit by maximizing MOTA when tracking `validation`.
TrainResult train_piecewise(std::span<const TrainingWindow> windows, std::span<const LabeledSequence> validation,
                            const ModelConfig& model, const TrainConfig& config, const TrackConfig& tracking,
                            const EvalConfig& eval, std::ostream* log = nullptr);

// Labeled links of the windows: score-ready pair features and same-track
// labels (both endpoints matched to the same ground-truth track).
struct PairSample {
    const PairFeatures* features = nullptr;
    bool same = false;
    int window = 0;
    int link = 0;
};
std::vector<PairSample> pair_samples(std::span<const TrainingWindow> windows);

} // namespace dsmt
