// dsmt: generate data, train, track, evaluate, compare matchers, plot.
//
// Exit codes: 0 ok, 1 usage or configuration error, 2 data error,
// 3 numerical failure.

#include "dsmt/bench.hpp"
#include "dsmt/datagen.hpp"
#include "dsmt/error.hpp"
#include "dsmt/io.hpp"
#include "dsmt/learning.hpp"
#include "dsmt/metrics.hpp"
#include "dsmt/pipeline.hpp"
#include "dsmt/plot.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace dsmt;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

RunConfig load_config(const std::string& path) { return path.empty() ? RunConfig{} : read_config(path); }

std::vector<TrackedBox> read_tracks(const fs::path& path, const LabelFilter& filter) {
    std::vector<TrackedBox> out;
    for (const auto& l : read_kitti_labels(path, filter)) out.push_back(kitti_to_tracked(l));
    return out;
}

std::string format_tracks(const std::vector<TrackedBox>& boxes) {
    std::vector<KittiLabel> labels;
    for (const auto& b : boxes) labels.push_back(tracked_to_kitti(b));
    return format_kitti_labels(labels);
}

int cmd_gen(const std::string& profile, const std::string& out, std::uint64_t seed, bool noiseless) {
    const Benchmark b = make_benchmark(profile, seed, noiseless);
    write_dataset(out, to_labeled(b.scenarios));
    std::cout << "wrote " << b.scenarios.size() << " sequences to " << out << "\n";
    return 0;
}

int cmd_train(const std::string& data, const std::string& config_path, const std::string& mode,
              const std::string& out, const std::string& validation, const std::string& log_path,
              std::optional<std::uint64_t> seed) {
    RunConfig config = load_config(config_path);
    if (seed) config.train.seed = *seed;
    const auto sequences = read_dataset(data, config.appearance(), config.labels);
    const auto windows = prepare_windows(sequences, config.windows, config.model);
    const fs::path log_file = log_path.empty() ? fs::path(out + ".log") : fs::path(log_path);
    std::ostringstream log;
    auto flush_log = [&] { write_file_atomic(log_file, log.str()); };
    try {
        TrainResult result;
        if (mode == "end2end") {
            result = train_end_to_end(windows, config.model, config.train, &log);
        } else {
            const auto val = validation.empty() ? sequences : read_dataset(validation, config.appearance(), config.labels);
            result = train_piecewise(windows, val, config.model, config.train, config.track, config.eval, &log);
        }
        flush_log();
        save_checkpoint(out, result.model);
        std::cout << "trained " << mode << " model on " << windows.size() << " windows; final loss "
                  << format_real(result.loss_trace.empty() ? 0.0 : result.loss_trace.back()) << "\n";
    } catch (const NumericalError&) {
        flush_log();
        throw;
    }
    return 0;
}

int cmd_track(const std::string& data, const std::string& model_path, const std::string& out,
              const std::string& config_path) {
    const RunConfig config = load_config(config_path);
    const CostModel model = load_checkpoint(model_path);
    const AppearanceShape shape{model.config.blocks, model.config.block_length};
    const bool single = fs::exists(fs::path(data) / "detections.txt");
    const auto sequences = read_dataset(data, shape, config.labels);
    for (const auto& s : sequences) {
        const auto boxes = track_sequence(model, s.sequence, config.track);
        const fs::path target = single ? fs::path(out) : fs::path(out) / (s.name + ".txt");
        write_file_atomic(target, format_tracks(boxes));
    }
    std::cout << "tracked " << sequences.size() << " sequences\n";
    return 0;
}

int cmd_eval(const std::string& hyp, const std::string& gt, const std::string& out, const std::string& config_path) {
    const RunConfig config = load_config(config_path);
    std::vector<MotReport> reports;
    if (fs::is_directory(gt)) {
        std::vector<fs::path> gt_files;
        if (fs::exists(fs::path(gt) / "labels.txt")) {
            gt_files.push_back(fs::path(gt) / "labels.txt");
        } else {
            for (const auto& e : fs::directory_iterator(gt)) {
                if (e.is_directory() && fs::exists(e.path() / "labels.txt")) gt_files.push_back(e.path() / "labels.txt");
            }
            std::sort(gt_files.begin(), gt_files.end());
        }
        if (gt_files.empty()) throw DataError(gt + " holds no labels.txt files");
        for (const auto& g : gt_files) {
            const fs::path h = fs::is_directory(hyp) ? fs::path(hyp) / (g.parent_path().filename().string() + ".txt")
                                                     : fs::path(hyp);
            const auto hyp_boxes = fs::exists(h) ? read_tracks(h, config.labels) : std::vector<TrackedBox>{};
            reports.push_back(evaluate(hyp_boxes, read_tracks(g, config.labels), config.eval));
        }
    } else {
        reports.push_back(evaluate(read_tracks(hyp, config.labels), read_tracks(gt, config.labels), config.eval));
    }
    MotReport total = reports.size() == 1 ? reports.front() : combine_reports(reports);
    write_file_atomic(out, report_to_text(total));
    write_file_atomic(out + ".json", report_to_json(total));
    std::cout << report_to_text(total);
    return 0;
}

int cmd_match_bench(const std::string& data, const std::string& model_path, const std::string& out,
                    const std::string& config_path) {
    const RunConfig config = load_config(config_path);
    const CostModel model = load_checkpoint(model_path);
    const auto sequences = read_dataset(data, {model.config.blocks, model.config.block_length}, config.labels);
    if (sequences.size() < 2) throw DataError("match-bench needs at least two sequences to split");
    std::size_t fit = sequences.size() * static_cast<std::size_t>(config.pair_split_percent) / 100;
    fit = std::clamp<std::size_t>(fit, 1, sequences.size() - 1);
    const std::span<const LabeledSequence> all(sequences);
    const MatchBench bench = match_bench(model, all.first(fit), all.subspan(fit), config.windows);
    const std::string table = format_match_bench(bench);
    write_file_atomic(out, table);
    std::cout << table;
    return 0;
}

int cmd_plot(const std::string& tracks, const std::string& out) {
    const LabelFilter any{{"Car", "Van", "Truck", "Pedestrian", "Person_sitting", "Cyclist", "Tram", "Misc"}};
    write_file_atomic(out, render_tracks_svg(read_tracks(tracks, any)));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep structured multi-object tracker"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string profile = "smoke", out, data, config_path, mode = "end2end", model_path, validation, log_path;
    std::string hyp, gt, tracks;
    std::uint64_t seed = 0;
    bool noiseless = false;

    auto* gen = app.add_subcommand("gen", "Write a synthetic benchmark to a dataset directory");
    gen->add_option("--profile", profile, "Benchmark profile")->check(CLI::IsMember({"smoke", "standard", "hard"}));
    gen->add_option("--out", out, "Output directory")->required();
    gen->add_option("--seed", seed, "Base seed");
    gen->add_flag("--noiseless", noiseless, "Zero noise, misses and clutter");

    auto* train = app.add_subcommand("train", "Train a cost model");
    train->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    train->add_option("--config", config_path, "Run configuration file")->check(CLI::ExistingFile);
    train->add_option("--mode", mode, "Training mode")->check(CLI::IsMember({"end2end", "piecewise"}));
    train->add_option("--out", out, "Checkpoint path")->required();
    train->add_option("--validation", validation,
                      "Dataset for the piecewise new/end line search (default: the training data)")
        ->check(CLI::ExistingDirectory);
    train->add_option("--log", log_path, "Loss log path (default: <out>.log)");
    auto* train_seed = train->add_option("--seed", seed, "Overrides train.seed");

    auto* track = app.add_subcommand("track", "Track every sequence of a dataset");
    track->add_option("--data", data, "Sequence or dataset directory")->required()->check(CLI::ExistingDirectory);
    track->add_option("--model", model_path, "Checkpoint")->required()->check(CLI::ExistingFile);
    track->add_option("--out", out, "Result file (one sequence) or directory")->required();
    track->add_option("--config", config_path, "Run configuration file")->check(CLI::ExistingFile);
    track->add_option("--seed", seed, "Unused; accepted for uniformity");

    auto* eval = app.add_subcommand("eval", "CLEAR MOT evaluation");
    eval->add_option("--hyp", hyp, "Result file or directory of <sequence>.txt")->required()->check(CLI::ExistingPath);
    eval->add_option("--gt", gt, "Label file, sequence directory or dataset directory")->required()->check(CLI::ExistingPath);
    eval->add_option("--out", out, "Report path (a .json twin is written too)")->required();
    eval->add_option("--config", config_path, "Run configuration file")->check(CLI::ExistingFile);
    eval->add_option("--seed", seed, "Unused; accepted for uniformity");

    auto* bench = app.add_subcommand("match-bench", "Compare affinity baselines with the learned matcher");
    bench->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    bench->add_option("--model", model_path, "Checkpoint")->required()->check(CLI::ExistingFile);
    bench->add_option("--out", out, "Table path")->required();
    bench->add_option("--config", config_path, "Run configuration file")->check(CLI::ExistingFile);
    bench->add_option("--seed", seed, "Unused; accepted for uniformity");

    auto* plot = app.add_subcommand("plot", "Bird's-eye SVG of tracked trajectories");
    plot->add_option("--tracks", tracks, "Result file")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", out, "SVG path")->required();
    plot->add_option("--seed", seed, "Unused; accepted for uniformity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gen) return cmd_gen(profile, out, seed, noiseless);
        if (*train) {
            const std::optional<std::uint64_t> s = train_seed->count() ? std::optional(seed) : std::nullopt;
            return cmd_train(data, config_path, mode, out, validation, log_path, s);
        }
        if (*track) return cmd_track(data, model_path, out, config_path);
        if (*eval) return cmd_eval(hyp, gt, out, config_path);
        if (*bench) return cmd_match_bench(data, model_path, out, config_path);
        if (*plot) return cmd_plot(tracks, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
