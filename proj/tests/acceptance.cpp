// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. `acceptance 1 4 7` runs a subset.

#include "dsmt/bench.hpp"
#include "dsmt/datagen.hpp"
#include "dsmt/features.hpp"
#include "dsmt/io.hpp"
#include "dsmt/learning.hpp"
#include "dsmt/metrics.hpp"
#include "dsmt/pipeline.hpp"
#include "dsmt/scoring.hpp"
#include "dsmt/solver.hpp"

#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace dsmt;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr int kInstances = 500;
constexpr int kGradientPairs = 20;
constexpr double kGradientRelTol = 1e-3;
constexpr double kFiniteStep = 1e-4;
constexpr double kTieNoise = 1e-6;
constexpr double kGradientFloor = 1e-6; // denominator floor for the relative error
constexpr int kTrainIterations = 200;
constexpr double kAcceptanceLr = 1e-3;
constexpr double kLossRatio = 0.5;
constexpr std::uint64_t kSeeds[] = {0, 1, 2};
constexpr double kMetricTol = 1e-12;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

bool binary_feasible(const AssociationGraph& g, const Assignment& y) {
    if (static_cast<int>(y.size()) != g.layout.size()) return false;
    for (auto v : y.values) {
        if (v > 1) return false;
    }
    return check_feasible(g, y).feasible;
}

// ---- 1, 2 ------------------------------------------------------------------

Outcome exactness() {
    std::mt19937_64 rng(1001);
    int mismatches = 0, infeasible = 0, vars = 0;
    for (int i = 0; i < kInstances; ++i) {
        const AssociationGraph g = fixtures::random_instance(rng);
        vars = std::max(vars, g.layout.size());
        const Solution ssp = solve(g, {.verify_residual = true});
        const Solution oracle = solve_exhaustive(g);
        if (!binary_feasible(g, ssp.assignment) || !binary_feasible(g, oracle.assignment)) ++infeasible;
        if (ssp.objective != oracle.objective) ++mismatches;
    }
    return {mismatches == 0 && infeasible == 0,
            std::to_string(kInstances) + " instances (<= " + std::to_string(vars) + " vars), objective mismatches " +
                std::to_string(mismatches) + ", infeasible " + std::to_string(infeasible)};
}

double direct_hamming(const Assignment& y, const Assignment& gold, const AssociationGraph& g, const HammingWeights& w) {
    double d = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != gold[i]) d += w.weight(g.layout.kind(static_cast<int>(i)));
    }
    return d;
}

Outcome loss_augmented_exactness() {
    std::mt19937_64 rng(2002);
    std::uniform_real_distribution<double> wdist(0.5, 2.0);
    int mismatches = 0, infeasible = 0;
    double worst_direct = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        const AssociationGraph g = fixtures::random_instance(rng);
        const Assignment gold = fixtures::random_feasible(g, rng);
        HammingWeights w;
        if (i % 2 == 1) w = {wdist(rng), wdist(rng), wdist(rng), wdist(rng)};
        const LossAugmentedSolution las = loss_augmented_solve(g, gold, w);

        // Oracle: enumerate the augmented problem, then score the winner
        // directly as theta . y + Delta(y, gold).
        AssociationGraph aug = g;
        double constant = 0.0;
        for (int v = 0; v < g.layout.size(); ++v) {
            const double wv = w.weight(g.layout.kind(v));
            aug.costs[v] = g.costs[v] + wv * (gold[v] ? -1.0 : 1.0);
            if (gold[v]) constant += wv;
        }
        const Solution oracle = solve_exhaustive(aug);
        const double oracle_aug = oracle.objective + constant;
        const double oracle_direct =
            objective(g.costs, oracle.assignment) + direct_hamming(oracle.assignment, gold, g, w);
        if (!binary_feasible(g, las.solution.assignment)) ++infeasible;
        if (las.augmented_objective != oracle_aug) ++mismatches;
        worst_direct = std::max(worst_direct, std::abs(oracle_aug - oracle_direct));
        worst_direct = std::max(worst_direct,
                                std::abs(las.augmented_objective - (las.solution.objective + las.hamming)));
    }
    const bool ok = mismatches == 0 && infeasible == 0 && worst_direct <= 1e-9;
    return {ok, std::to_string(kInstances) + " instances, augmented objective mismatches " + std::to_string(mismatches) +
                    ", infeasible " + std::to_string(infeasible) + ", direct-vs-linearized gap " +
                    fmt("%.3g", worst_direct) + " (tol 1e-9)"};
}

// ---- 3 ---------------------------------------------------------------------

ModelConfig small_model() {
    ModelConfig m;
    m.blocks = 2;
    m.block_length = 3;
    m.det_hidden = {4};
    m.bev_hidden = {3};
    m.fv_hidden = {3};
    m.features.bev = {40, 40, 0.25, 5.0, -5.0};
    m.features.fv = {8, 20};
    return m;
}

TrackSequence small_sequence(std::mt19937_64& rng, const ModelConfig& m) {
    std::uniform_real_distribution<double> x(8.0, 12.0), y(-3.0, 3.0), yaw(-0.4, 0.4), app(0.0, 1.0),
        speed(0.0, 5.0), jitter(-0.3, 0.3);
    std::uniform_int_distribution<int> count(1, 3);
    TrackSequence seq;
    const int frames = 3;
    DetId id = 0;
    std::vector<Box3D> anchors(3);
    for (auto& a : anchors) a = {x(rng), y(rng), 0.8, 4.0, 1.8, 1.6, yaw(rng)};
    for (int f = 0; f < frames; ++f) {
        EgoMotion e{speed(rng), 0.0, 0.1};
        seq.ego.push_back(e);
        std::vector<Detection> dets;
        const int c = count(rng);
        for (int i = 0; i < c; ++i) {
            Detection d;
            d.det_id = id++;
            d.frame_idx = f;
            d.box3d = anchors[static_cast<std::size_t>(i)];
            d.box3d.center_x += jitter(rng) - 0.2 * f;
            d.box3d.center_y += jitter(rng);
            d.box2d = project_box(d.box3d, seq.camera);
            d.appearance = Appearance(static_cast<std::size_t>(m.blocks), static_cast<std::size_t>(m.block_length));
            for (double& v : d.appearance.values()) v = app(rng);
            dets.push_back(std::move(d));
        }
        seq.frames.push_back(std::move(dets));
    }
    return seq;
}

double hinge_at(const CostModel& model, const AssociationGraph& g, const std::shared_ptr<const GraphFeatures>& feats,
                const std::vector<double>& noise, const Assignment& gold, HingeResult* out = nullptr) {
    AssociationGraph scored = g;
    scored.costs = score_graph(model, g, feats).theta;
    for (std::size_t i = 0; i < noise.size(); ++i) scored.costs[i] += noise[i];
    const HingeInstance inst{&scored, &gold};
    HingeResult r = hinge_loss(std::span(&inst, 1));
    if (out) *out = r;
    return r.loss;
}

Outcome gradient_correctness() {
    const ModelConfig mc = small_model();
    std::mt19937_64 rng(3003);
    double worst = 0.0;
    std::size_t checked = 0, active = 0;
    int zero_loss = 0;
    for (int p = 0; p < kGradientPairs; ++p) {
        const TrackSequence seq = small_sequence(rng, mc);
        AssociationGraph g = build_graph(seq);
        auto feats = std::make_shared<const GraphFeatures>(compute_graph_features(g, seq, mc));
        CostModel model = CostModel::create(mc);
        init_truncated_normal(model, 0.5, rng);
        // Zero biases put empty-product links exactly on the relu kink.
        std::uniform_real_distribution<double> bias(-0.5, 0.5);
        for (auto& t : model.tensors()) {
            if (t.name.ends_with(".bias")) {
                for (double& v : t.data) v = bias(rng);
            }
        }
        std::uniform_real_distribution<double> tie(-kTieNoise, kTieNoise);
        std::vector<double> noise(static_cast<std::size_t>(g.layout.size()));
        for (double& v : noise) v = tie(rng);
        const Assignment gold = fixtures::random_feasible(g, rng);

        HingeResult r;
        hinge_at(model, g, feats, noise, gold, &r);
        if (!(r.loss > 0.0)) ++zero_loss;
        const ScoredGraph sg = score_graph(model, g, feats);
        const Gradient grad = backward(model, sg.cache, r.dtheta.front());

        auto params = model.tensors();
        const auto grads = grad.tensors();
        for (std::size_t t = 0; t < params.size(); ++t) {
            for (std::size_t i = 0; i < params[t].data.size(); ++i) {
                double& w = params[t].data[i];
                const double w0 = w;
                w = w0 + kFiniteStep;
                const double up = hinge_at(model, g, feats, noise, gold);
                w = w0 - kFiniteStep;
                const double down = hinge_at(model, g, feats, noise, gold);
                w = w0;
                const double fd = (up - down) / (2.0 * kFiniteStep);
                const double an = grads[t].data[i];
                const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), kGradientFloor});
                worst = std::max(worst, rel);
                ++checked;
                if (an != 0.0) ++active;
            }
        }
    }
    return {worst <= kGradientRelTol && zero_loss == 0,
            std::to_string(kGradientPairs) + " pairs, " + std::to_string(checked) + " parameters (" +
                std::to_string(active) + " with nonzero gradient), max rel error " + fmt("%.3g", worst) + " (tol " +
                fmt("%g", kGradientRelTol) + ", step " + fmt("%g", kFiniteStep) + ", tie noise " +
                fmt("%g", kTieNoise) + "), zero-loss pairs " + std::to_string(zero_loss)};
}

// ---- 4, 5, 6 -----------------------------------------------------------------

struct Split {
    std::vector<LabeledSequence> train, validation, test;
};

// 12 training, 4 validation, 4 test sequences of the standard profile.
Split standard_split(std::uint64_t seed) {
    const auto all = to_labeled(make_benchmark("standard", seed).scenarios);
    Split s;
    for (std::size_t i = 0; i < all.size(); ++i) {
        (i < 12 ? s.train : i < 16 ? s.validation : s.test).push_back(all[i]);
    }
    return s;
}

TrainConfig acceptance_train_config(std::uint64_t seed) {
    TrainConfig c;
    c.iterations = kTrainIterations;
    c.seed = seed;
    c.adam.lr = kAcceptanceLr;
    return c;
}

struct SeedRun {
    std::optional<TrainResult> e2e;
    std::optional<TrainResult> piecewise;
    double e2e_seconds = 0.0;
    double piecewise_seconds = 0.0;
};

class Runs {
public:
    const Split& split(std::uint64_t seed) {
        auto it = splits_.find(seed);
        if (it == splits_.end()) it = splits_.emplace(seed, standard_split(seed)).first;
        return it->second;
    }
    const std::vector<TrainingWindow>& windows(std::uint64_t seed) {
        auto it = windows_.find(seed);
        if (it == windows_.end()) {
            it = windows_.emplace(seed, prepare_windows(split(seed).train, WindowConfig{}, ModelConfig{})).first;
        }
        return it->second;
    }
    SeedRun& e2e(std::uint64_t seed) {
        SeedRun& r = runs_[seed];
        if (!r.e2e) {
            const auto& w = windows(seed);
            const auto t0 = std::chrono::steady_clock::now();
            r.e2e = train_end_to_end(w, ModelConfig{}, acceptance_train_config(seed));
            r.e2e_seconds = seconds_since(t0);
            training_seconds_ += r.e2e_seconds;
        }
        return r;
    }
    SeedRun& piecewise(std::uint64_t seed) {
        SeedRun& r = runs_[seed];
        if (!r.piecewise) {
            const auto& w = windows(seed);
            const auto t0 = std::chrono::steady_clock::now();
            r.piecewise = train_piecewise(w, split(seed).validation, ModelConfig{}, acceptance_train_config(seed),
                                          TrackConfig{}, EvalConfig{});
            r.piecewise_seconds = seconds_since(t0);
            training_seconds_ += r.piecewise_seconds;
        }
        return r;
    }

    double training_seconds() const { return training_seconds_; }

private:
    double training_seconds_ = 0.0;
    std::map<std::uint64_t, Split> splits_;
    std::map<std::uint64_t, std::vector<TrainingWindow>> windows_;
    std::map<std::uint64_t, SeedRun> runs_;
};

Outcome training_progress(Runs& runs) {
    const auto& trace = runs.e2e(kSeeds[0]).e2e->loss_trace;
    const double initial = trace.front(), final_loss = trace.back();
    return {final_loss <= kLossRatio * initial,
            "standard benchmark, " + std::to_string(runs.windows(kSeeds[0]).size()) + " windows, " +
                std::to_string(kTrainIterations) + " iterations at lr " + fmt("%g", kAcceptanceLr) + ": loss " +
                fmt("%.6g", initial) + " -> " + fmt("%.6g", final_loss) + " (ratio " +
                fmt("%.4f", final_loss / initial) + ", need <= " + fmt("%g", kLossRatio) + ")"};
}

MotReport test_report(const CostModel& model, const std::vector<LabeledSequence>& test) {
    std::vector<MotReport> reports;
    for (const auto& s : test) {
        const auto boxes = track_sequence(model, s.sequence, TrackConfig{});
        reports.push_back(evaluate(boxes, s.ground_truth, EvalConfig{}));
    }
    return combine_reports(reports);
}

Outcome end_to_end_vs_piecewise(Runs& runs) {
    double e2e_mota = 0.0, pw_mota = 0.0, e2e_ids = 0.0, pw_ids = 0.0;
    std::string per_seed;
    const double n = static_cast<double>(std::size(kSeeds));
    for (auto seed : kSeeds) {
        SeedRun& r = runs.e2e(seed);
        runs.piecewise(seed);
        const auto& test = runs.split(seed).test;
        const MotReport e = test_report(r.e2e->model, test);
        const MotReport p = test_report(r.piecewise->model, test);
        e2e_mota += e.mota / n;
        pw_mota += p.mota / n;
        e2e_ids += e.ids / n;
        pw_ids += p.ids / n;
        per_seed += " [seed " + std::to_string(seed) + ": e2e " + fmt("%.4f", e.mota) + "/" + std::to_string(e.ids) +
                    " pw " + fmt("%.4f", p.mota) + "/" + std::to_string(p.ids) + "]";
    }
    return {e2e_mota >= pw_mota && e2e_ids <= pw_ids,
            "mean MOTA e2e " + fmt("%.4f", e2e_mota) + " vs piecewise " + fmt("%.4f", pw_mota) + ", mean IDS e2e " +
                fmt("%.3f", e2e_ids) + " vs piecewise " + fmt("%.3f", pw_ids) + ";" + per_seed};
}

Outcome learned_matcher(Runs& runs) {
    std::vector<double> baseline_mean(std::size(kAllAffinities), 0.0);
    double learned = 0.0;
    const double n = static_cast<double>(std::size(kSeeds));
    for (auto seed : kSeeds) {
        const auto& s = runs.split(seed);
        const MatchBench b = match_bench(runs.piecewise(seed).piecewise->model, s.train, s.test, WindowConfig{});
        for (std::size_t k = 0; k < b.baselines.size(); ++k) baseline_mean[k] += b.baselines[k].error / n;
        learned += b.learned.error / n;
    }
    const auto best = std::min_element(baseline_mean.begin(), baseline_mean.end());
    const auto best_kind = kAllAffinities[static_cast<std::size_t>(best - baseline_mean.begin())];
    return {learned < *best, "mean held-out error learned " + fmt("%.4f", learned) + " vs best baseline " +
                                 to_string(best_kind) + " " + fmt("%.4f", *best)};
}

// ---- 7 ---------------------------------------------------------------------

bool perfect(const MotReport& r) {
    return r.mota == 1.0 && std::abs(r.motp - 1.0) <= kMetricTol && r.ids == 0 && r.frag == 0 && r.fp == 0 &&
           r.fn == 0 && r.mostly_tracked == r.gt_tracks && r.mostly_lost == 0;
}

Outcome metric_correctness() {
    std::vector<TrackedBox> gt;
    for (int f = 0; f < 5; ++f) {
        gt.push_back(fixtures::gt_box(f, 1, 100.0 + 5.0 * f));
        gt.push_back(fixtures::gt_box(f, 2, 600.0 - 5.0 * f));
    }
    const MotReport same = evaluate(gt, gt, EvalConfig{});
    const bool ex1 = perfect(same) && same.mt_fraction == 1.0;

    const MotReport empty = evaluate({}, gt, EvalConfig{});
    const bool ex2 = empty.mota == 0.0 && empty.fn == static_cast<int>(gt.size()) && empty.ml_fraction == 1.0;

    std::vector<TrackedBox> track, split;
    for (int f = 0; f < 10; ++f) {
        track.push_back(fixtures::gt_box(f, 7, 200.0 + 3.0 * f));
        TrackedBox h = track.back();
        h.track_id = f < 5 ? 1 : 2;
        split.push_back(h);
    }
    const MotReport sp = evaluate(split, track, EvalConfig{});
    const bool ex3 = sp.ids == 1 && sp.frag <= 1 && sp.mt_fraction == 1.0 && std::abs(sp.mota - 0.9) <= kMetricTol;

    int scenarios = 0, imperfect = 0;
    for (const char* profile : {"smoke", "standard", "hard"}) {
        for (const auto& sc : make_benchmark(profile, 0).scenarios) {
            ++scenarios;
            if (!perfect(evaluate(sc.ground_truth, sc.ground_truth, EvalConfig{}))) ++imperfect;
        }
    }
    return {ex1 && ex2 && ex3 && imperfect == 0,
            std::string("identical ") + (ex1 ? "ok" : "FAIL") + ", empty " + (ex2 ? "ok" : "FAIL") + ", split (MOTA " +
                fmt("%.6f", sp.mota) + ", IDS " + std::to_string(sp.ids) + ") " + (ex3 ? "ok" : "FAIL") +
                ", GT-vs-GT imperfect " + std::to_string(imperfect) + "/" + std::to_string(scenarios)};
}

// ---- 8 ---------------------------------------------------------------------

// Cells of `cells` that touch the footprint boundary (8-neighborhood), on
// either side.
std::set<int> boundary_ring(const SparseBinary& cells, int rows, int cols) {
    std::set<int> on(cells.active.begin(), cells.active.end()), ring;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const bool inside = on.count(r * cols + c) > 0;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || cc < 0 || rr >= rows || cc >= cols) continue;
                    if ((on.count(rr * cols + cc) > 0) != inside) ring.insert(r * cols + c);
                }
            }
        }
    }
    return ring;
}

Outcome ego_invariance() {
    FeatureConfig fc;
    const auto& bev = fc.bev;
    std::mt19937_64 rng(8008);
    std::uniform_real_distribution<double> x(8.0, 30.0), y(-12.0, 12.0), yaw(-kPi, kPi), frac(0.05, 0.95);
    std::uniform_int_distribution<int> steps(1, 20);
    CameraModel cam;
    auto det = [&](const Box3D& b, int frame) {
        Detection d;
        d.frame_idx = frame;
        d.box3d = b;
        d.box2d = project_box(b, cam);
        d.appearance = Appearance(1, 1, {1.0});
        return d;
    };
    int integer_cases = 0, integer_bad = 0, fractional_cases = 0, fractional_bad = 0, fractional_identical = 0;
    for (int t = 0; t < 400; ++t) {
        // Static object seen at `now` in the later frame; with the ego moving
        // forward by d it was d farther ahead one frame earlier.
        const Box3D now{x(rng), y(rng), 0.8, 4.2, 1.8, 1.6, wrap_angle(yaw(rng))};
        const bool integer = t % 2 == 0;
        const double d = (steps(rng) + (integer ? 0.0 : frac(rng))) * bev.meters_per_cell;
        const double dt = 0.1;
        Box3D before = now;
        before.center_x += d;

        const auto still = pair_features(det(now, 0), det(now, 1), EgoMotion{0.0, 0.0, dt}, cam, fc).bev_product;
        const auto moved = pair_features(det(before, 0), det(now, 1), EgoMotion{d / dt, 0.0, dt}, cam, fc).bev_product;
        if (still.active.empty()) continue;
        if (integer) {
            ++integer_cases;
            if (!(moved == still)) ++integer_bad;
        } else {
            ++fractional_cases;
            if (moved == still) {
                ++fractional_identical;
                continue;
            }
            const auto ring = boundary_ring(still, bev.rows, bev.cols);
            std::vector<int> diff;
            std::set_symmetric_difference(moved.active.begin(), moved.active.end(), still.active.begin(),
                                          still.active.end(), std::back_inserter(diff));
            for (int cell : diff) {
                if (!ring.count(cell)) {
                    ++fractional_bad;
                    break;
                }
            }
        }
    }
    return {integer_bad == 0 && fractional_bad == 0 && integer_cases > 0 && fractional_cases > 0,
            "integer-cell displacements identical " + std::to_string(integer_cases - integer_bad) + "/" +
                std::to_string(integer_cases) + "; fractional within one ring " +
                std::to_string(fractional_cases - fractional_bad) + "/" + std::to_string(fractional_cases) + " (" +
                std::to_string(fractional_identical) + " identical)"};
}

// ---- 9 ---------------------------------------------------------------------

Outcome noiseless_closure() {
    int sequences = 0, failures = 0;
    double worst_mota = 1.0;
    for (const char* profile : {"smoke", "standard", "hard"}) {
        for (auto seed : kSeeds) {
            for (const auto& sc : make_benchmark(profile, seed, true).scenarios) {
                ++sequences;
                const AssociationGraph g = build_graph(sc.sequence, WindowConfig{}.gate);
                const GoldAssignment gold = derive_gold(g, sc.sequence, sc.ground_truth);
                const auto trajs = decode_trajectories(gold.assignment, g);
                const auto boxes = trajectories_to_boxes(sc.sequence, trajs);
                const MotReport r = evaluate(boxes, sc.ground_truth, EvalConfig{});
                worst_mota = std::min(worst_mota, r.mota);
                if (r.mota != 1.0 || r.ids != 0 || r.frag != 0 || r.fp != 0) ++failures;
            }
        }
    }
    return {failures == 0, std::to_string(sequences) + " noiseless sequences (3 profiles x 3 seeds), failures " +
                               std::to_string(failures) + ", worst MOTA " + fmt("%.6f", worst_mota)};
}

// ---- 10 --------------------------------------------------------------------

Outcome format_round_trips() {
    const fs::path dir = DSMT_GOLDEN_DIR;
    std::vector<std::string> bad;
    auto check = [&](const std::string& name, const std::function<std::string(const std::string&)>& round_trip) {
        const std::string original = read_file(dir / name);
        if (round_trip(original) != original) bad.push_back(name);
    };
    const AppearanceShape shape{2, 3};
    check("detections.txt", [&](const std::string& s) {
        std::istringstream in(s);
        return format_detections(parse_detections(in, shape));
    });
    check("labels.txt", [&](const std::string& s) {
        std::istringstream in(s);
        return format_kitti_labels(parse_kitti_labels(in, LabelFilter{{"Car", "Van", "Pedestrian", "Cyclist"}}));
    });
    check("checkpoint.bin", [](const std::string& s) { return serialize_model(deserialize_model(s)); });
    check("config.txt", [](const std::string& s) { return echo_config(parse_config(s)); });
    std::string detail = "detections, labels, checkpoint, config echo: ";
    if (bad.empty()) {
        detail += "byte-identical";
    } else {
        for (const auto& b : bad) detail += b + " differs; ";
    }
    return {bad.empty(), detail};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome(Runs&)> run;
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    const std::vector<Criterion> criteria = {
        {1, "exactness", 30.0, [](Runs&) { return exactness(); }},
        {2, "loss-augmented exactness", 30.0, [](Runs&) { return loss_augmented_exactness(); }},
        {3, "gradient correctness", 120.0, [](Runs&) { return gradient_correctness(); }},
        {4, "training progress", 600.0, training_progress},
        {5, "end-to-end vs piecewise", 1800.0, end_to_end_vs_piecewise},
        {6, "learned matcher vs affinities", 600.0, learned_matcher},
        {7, "metric correctness", 60.0, [](Runs&) { return metric_correctness(); }},
        {8, "ego invariance", 60.0, [](Runs&) { return ego_invariance(); }},
        {9, "noiseless closure", 60.0, [](Runs&) { return noiseless_closure(); }},
        {10, "format round-trips", 60.0, [](Runs&) { return format_round_trips(); }},
    };

    Runs runs;
    int failed = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        const double training_before = runs.training_seconds();
        Outcome o;
        try {
            o = c.run(runs);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        // Training shared between criteria is charged in full to each one
        // that uses it, whether it ran now or earlier.
        double elapsed = seconds_since(t0) - (runs.training_seconds() - training_before);
        if (c.id == 4) elapsed += runs.e2e(kSeeds[0]).e2e_seconds;
        for (auto seed : kSeeds) {
            if (c.id == 5) elapsed += runs.e2e(seed).e2e_seconds + runs.piecewise(seed).piecewise_seconds;
            if (c.id == 6) elapsed += runs.piecewise(seed).piecewise_seconds;
        }
        const bool in_budget = elapsed < c.budget_s;
        const bool pass = o.pass && in_budget;
        if (!pass) ++failed;
        std::printf("%s criterion %d (%s): %s; runtime %.1f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id,
                    c.name, o.detail.c_str(), elapsed, c.budget_s, in_budget ? "" : " OVER BUDGET");
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
