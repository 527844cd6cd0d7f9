#pragma once

// On-disk formats.
//
// KITTI label/result lines (17 fields, or 18 with a trailing score):
//   frame track_id type truncated occluded alpha
//   left top right bottom  h w l  x y z  rotation_y  [score]
// Camera frame: x right, y down, z forward; (x, y, z) is the bottom center.
// Conversion to the ego frame (x forward, y left, z up):
//
//   ego.center_x =  z
//   ego.center_y = -x
//   ego.center_z = -y + h / 2
//   ego.yaw      = wrap(-rotation_y - pi / 2)
//   ego.length, width, height = l, w, h
//
// Detections: one line per detection,
//   frame det_id cx cy cz length width height yaw left top right bottom a_1 .. a_D
// with every real printed as %.17g.
//
// Sequence directory: detections.txt, ego.txt (`frame vx vy dt` per frame),
// calib.txt (`key value` camera intrinsics), optional labels.txt.
// Dataset directory: one sequence directory per entry, visited in name order.

#include "dsmt/core.hpp"
#include "dsmt/datagen.hpp"
#include "dsmt/learning.hpp"
#include "dsmt/metrics.hpp"
#include "dsmt/pipeline.hpp"
#include "dsmt/scoring.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dsmt {

struct KittiLabel {
    int frame = 0;
    int track_id = 0;
    std::string type;
    double truncated = 0.0;
    double occluded = 0.0;
    double alpha = 0.0;
    Box2D bbox;
    double height = 0.0, width = 0.0, length = 0.0;
    double x = 0.0, y = 0.0, z = 0.0;
    double rotation_y = 0.0;
    std::optional<double> score;

    friend bool operator==(const KittiLabel&, const KittiLabel&) = default;
};

struct LabelFilter {
    std::vector<std::string> types{"Car"}; // DontCare lines are always kept
};

// Sorted by frame (stable). Throws DataError naming the line on malformed
// input.
std::vector<KittiLabel> parse_kitti_labels(std::istream& in, const LabelFilter& filter = {});
std::vector<KittiLabel> read_kitti_labels(const std::filesystem::path& path, const LabelFilter& filter = {});
std::string format_kitti_labels(const std::vector<KittiLabel>& labels);
void write_kitti_labels(const std::filesystem::path& path, const std::vector<KittiLabel>& labels);

Box3D kitti_to_ego(const KittiLabel& label);
TrackedBox kitti_to_tracked(const KittiLabel& label);
// Inverse conversion; alpha is the observation angle of the box center.
KittiLabel tracked_to_kitti(const TrackedBox& box, std::string type = "Car");

struct AppearanceShape {
    int blocks = 5;
    int block_length = 16;
};

// Throws DataError naming the expected and actual field counts on arity
// mismatches.
std::vector<Detection> parse_detections(std::istream& in, const AppearanceShape& shape);
std::vector<Detection> read_detections(const std::filesystem::path& path, const AppearanceShape& shape);
std::string format_detections(const std::vector<Detection>& detections);
void write_detections(const std::filesystem::path& path, const std::vector<Detection>& detections);

std::vector<EgoMotion> read_ego(const std::filesystem::path& path);
std::string format_ego(const std::vector<EgoMotion>& ego);
CameraModel read_calib(const std::filesystem::path& path);
std::string format_calib(const CameraModel& camera);

void write_sequence(const std::filesystem::path& dir, const LabeledSequence& seq);
LabeledSequence read_sequence(const std::filesystem::path& dir, const AppearanceShape& shape,
                              const LabelFilter& filter = {});
void write_dataset(const std::filesystem::path& dir, std::span<const LabeledSequence> sequences);
std::vector<LabeledSequence> read_dataset(const std::filesystem::path& dir, const AppearanceShape& shape,
                                          const LabelFilter& filter = {});

// Everything a run needs, read from `key = value` lines (`#` comments).
struct RunConfig {
    ModelConfig model;
    WindowConfig windows;
    TrainConfig train;
    TrackConfig track;
    EvalConfig eval;
    LabelFilter labels;
    int pair_split_percent = 50; // match-bench: share of sequences used to fit thresholds

    AppearanceShape appearance() const { return {model.blocks, model.block_length}; }
};

// Unknown keys, duplicate keys, missing values and malformed numbers throw
// ConfigError naming the key.
RunConfig parse_config(std::string_view text);
RunConfig read_config(const std::filesystem::path& path);
// Every key with its current value, one per line, in a fixed order.
std::string echo_config(const RunConfig& config);

void save_checkpoint(const std::filesystem::path& path, const CostModel& model);
CostModel load_checkpoint(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Shortest decimal text that reads back to the same double.
std::string format_real(double v);

} // namespace dsmt
