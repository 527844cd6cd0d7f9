#pragma once

// Seeded synthetic driving scenes: a straight multi-lane road, an ego car
// driving in lane 0 at constant speed, vehicles with lane-consistent motion,
// and noisy candidate detections with clutter and misses.

#include "dsmt/core.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dsmt {

// Lanes are centered at y = (i - 1) * lane_width for i in [0, lane_count);
// lanes with y <= 0 carry forward traffic, lanes with y > 0 oncoming traffic.
struct ScenarioConfig {
    int n_vehicles = 6;
    int n_frames = 40;
    std::uint64_t seed = 0;

    double lane_width_m = 3.5;
    int lane_count = 4;

    double frac_forward = 0.5;
    double frac_oncoming = 0.3;
    double frac_lane_change = 0.2;

    double ego_speed_mps = 10.0;
    double min_speed_mps = 8.0;
    double max_speed_mps = 14.0;
    double frame_dt = 0.1;

    double sigma_pos_m = 0.3;
    double sigma_size_m = 0.05;
    double sigma_yaw_rad = 0.05;
    double miss_probability = 0.1;
    double clutter_rate = 0.5; // false positives per frame

    int appearance_blocks = 5;
    int appearance_block_length = 16;
    double sigma_app = 0.3; // per element

    // Detection region in the ego frame: forward range and lateral half width.
    double min_range_m = 2.0;
    double max_range_m = 40.0;
    double max_lateral_m = 18.0;

    CameraModel camera;

    // Throws ConfigError on negative sigmas, probabilities outside [0, 1],
    // fractions that do not sum to 1, or non-positive counts.
    void validate() const;
    // Same scene with every noise source, miss and clutter set to zero.
    ScenarioConfig noiseless() const;
};

struct Scenario {
    std::string name;
    ScenarioConfig config;
    TrackSequence sequence;
    std::vector<TrackedBox> ground_truth;
    // Ground-truth track of each detection, indexed by det_id; -1 for clutter.
    std::vector<int> detection_track;
};

// Vehicles move at constant velocity; lane changers follow a smooth
// half-cosine lateral profile over three seconds. A vehicle is visible while
// its center is inside the detection region and its projected box overlaps
// the image; only the longest visible run of each vehicle is kept, so every
// ground-truth track is contiguous.
Scenario generate(const ScenarioConfig& config);

struct Benchmark {
    std::string profile;
    std::vector<Scenario> scenarios;
};

// Profiles:
//   smoke    2 sequences x 10 frames x 4 vehicles, default noise
//   standard 20 sequences x 40 frames x 6 vehicles, sigma_pos 0.3, miss 0.1,
//            clutter 0.5, sigma_app 0.3
//   hard     as standard with miss 0.25 and clutter 2
// Scenario i is generated with seed = base_seed * 1000 + i.
// Throws ConfigError on an unknown profile.
ScenarioConfig profile_config(std::string_view profile);
int profile_sequence_count(std::string_view profile);
Benchmark make_benchmark(std::string_view profile, std::uint64_t base_seed = 0, bool noiseless = false);

} // namespace dsmt
