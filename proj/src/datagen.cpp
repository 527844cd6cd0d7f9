#include "dsmt/datagen.hpp"

#include "dsmt/error.hpp"
#include "dsmt/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>

namespace dsmt {

namespace {

constexpr double kCameraHeight = 1.65;
constexpr double kLaneChangeSeconds = 3.0;
constexpr double kMinGap = 7.0;

struct Vehicle {
    double x0 = 0.0; // world x at t = 0
    double y0 = 0.0;
    double vx = 0.0;
    double lane_change_dy = 0.0;
    double lane_change_t0 = 0.0;
    double length = 4.2, width = 1.7, height = 1.5;
    std::vector<double> latent;

    double y(double t) const {
        if (lane_change_dy == 0.0) return y0;
        const double s = std::clamp((t - lane_change_t0) / kLaneChangeSeconds, 0.0, 1.0);
        return y0 + lane_change_dy * 0.5 * (1.0 - std::cos(kPi * s));
    }
    double yaw(double t) const {
        double vy = 0.0;
        if (lane_change_dy != 0.0) {
            const double s = (t - lane_change_t0) / kLaneChangeSeconds;
            if (s > 0.0 && s < 1.0) vy = lane_change_dy * kPi / (2.0 * kLaneChangeSeconds) * std::sin(kPi * s);
        }
        return wrap_angle(std::atan2(vy, vx));
    }
};

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    double normal(double sigma) { return sigma > 0.0 ? std::normal_distribution<double>(0.0, sigma)(rng_) : 0.0; }
    bool bernoulli(double p) { return p > 0.0 && std::bernoulli_distribution(p)(rng_); }
    int poisson(double rate) { return rate > 0.0 ? std::poisson_distribution<int>(rate)(rng_) : 0; }
    int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

std::optional<Box2D> visible_box(const Box3D& box, const ScenarioConfig& c) {
    const Box2D raw = project_box(box, c.camera);
    if (!(raw.right > raw.left)) return std::nullopt;
    Box2D clipped{std::max(raw.left, 0.0), std::max(raw.top, 0.0), std::min(raw.right, c.camera.image_width),
                  std::min(raw.bottom, c.camera.image_height)};
    if (clipped.width() < 1.0 || clipped.height() < 1.0) return std::nullopt;
    return clipped;
}

bool in_region(const Box3D& b, const ScenarioConfig& c) {
    return b.center_x >= c.min_range_m && b.center_x < c.max_range_m && std::abs(b.center_y) < c.max_lateral_m;
}

Box3D ego_box(const Vehicle& v, double t, const ScenarioConfig& c) {
    Box3D b;
    b.center_x = v.x0 + v.vx * t - c.ego_speed_mps * t;
    b.center_y = v.y(t);
    b.center_z = -kCameraHeight + 0.5 * v.height;
    b.length = v.length;
    b.width = v.width;
    b.height = v.height;
    b.yaw = v.yaw(t);
    return b;
}

std::vector<double> random_latent(Sampler& s, int dim) {
    std::vector<double> l(static_cast<std::size_t>(dim));
    double norm = 0.0;
    for (double& v : l) {
        v = std::abs(s.normal(1.0));
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : l) v /= norm;
    return l;
}

Appearance observe(const std::vector<double>& latent, const ScenarioConfig& c, Sampler& s) {
    std::vector<double> values(latent.size());
    for (std::size_t i = 0; i < latent.size(); ++i) values[i] = std::max(0.0, latent[i] + s.normal(c.sigma_app));
    return Appearance(static_cast<std::size_t>(c.appearance_blocks), static_cast<std::size_t>(c.appearance_block_length),
                      std::move(values));
}

bool conflicts(const Vehicle& v, const std::vector<Vehicle>& others, const ScenarioConfig& c) {
    for (int f = 0; f < c.n_frames; ++f) {
        const double t = f * c.frame_dt;
        const double x = v.x0 + v.vx * t;
        const double y = v.y(t);
        // The ego car is an obstacle in lane 0.
        if (std::abs(y) < 2.5 && std::abs(x - c.ego_speed_mps * t) < kMinGap) return true;
        for (const auto& o : others) {
            if (std::abs(y - o.y(t)) < 2.5 && std::abs(x - (o.x0 + o.vx * t)) < kMinGap) return true;
        }
    }
    return false;
}

int visible_frames(const Vehicle& v, const ScenarioConfig& c) {
    int n = 0;
    for (int f = 0; f < c.n_frames; ++f) {
        const Box3D b = ego_box(v, f * c.frame_dt, c);
        if (in_region(b, c) && visible_box(b, c)) ++n;
    }
    return n;
}

Vehicle sample_vehicle(Sampler& s, const ScenarioConfig& c, const std::vector<Vehicle>& placed) {
    std::vector<double> forward_lanes, oncoming_lanes;
    for (int i = 0; i < c.lane_count; ++i) {
        const double y = (i - 1) * c.lane_width_m;
        (y <= 0.0 ? forward_lanes : oncoming_lanes).push_back(y);
    }
    const double duration = c.n_frames * c.frame_dt;
    const double r = s.uniform(0.0, 1.0);
    enum { forward, oncoming, lane_change } behavior =
        r < c.frac_forward ? forward : (r < c.frac_forward + c.frac_oncoming ? oncoming : lane_change);
    if (behavior == oncoming && oncoming_lanes.empty()) behavior = forward;
    if (behavior == lane_change && forward_lanes.size() < 2) behavior = forward;

    Vehicle v;
    v.length = s.uniform(3.8, 4.8);
    v.width = s.uniform(1.6, 1.9);
    v.height = s.uniform(1.4, 1.7);
    v.latent = random_latent(s, c.appearance_blocks * c.appearance_block_length);

    Vehicle best = v;
    for (int attempt = 0; attempt < 200; ++attempt) {
        const double speed = s.uniform(c.min_speed_mps, c.max_speed_mps);
        if (behavior == oncoming) {
            v.y0 = oncoming_lanes[static_cast<std::size_t>(s.index(static_cast<int>(oncoming_lanes.size())))];
            v.vx = -speed;
            const double travel = (speed + c.ego_speed_mps) * duration;
            v.x0 = s.uniform(0.5 * c.max_range_m, c.max_range_m + 0.6 * travel);
            v.lane_change_dy = 0.0;
        } else {
            const int lane = s.index(static_cast<int>(forward_lanes.size()));
            v.y0 = forward_lanes[static_cast<std::size_t>(lane)];
            v.vx = speed;
            v.x0 = s.uniform(c.min_range_m + 3.0, c.max_range_m - 3.0);
            v.lane_change_dy = 0.0;
            if (behavior == lane_change) {
                const int target = lane == 0 ? 1 : lane - 1;
                v.lane_change_dy = forward_lanes[static_cast<std::size_t>(target)] - v.y0;
                v.lane_change_t0 = s.uniform(0.0, std::max(0.0, duration - 1.0));
            }
        }
        best = v;
        if (visible_frames(v, c) >= 3 && !conflicts(v, placed, c)) break;
    }
    return best;
}

} // namespace

void ScenarioConfig::validate() const {
    if (n_vehicles < 0 || n_frames <= 0 || lane_count <= 0) throw ConfigError("scenario counts must be positive");
    if (!(lane_width_m > 0.0 && frame_dt > 0.0)) throw ConfigError("lane width and frame dt must be positive");
    for (double p : {frac_forward, frac_oncoming, frac_lane_change, miss_probability}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("probabilities must lie in [0, 1]");
    }
    if (std::abs(frac_forward + frac_oncoming + frac_lane_change - 1.0) > 1e-9) {
        throw ConfigError("behavior fractions must sum to 1");
    }
    for (double sigma : {sigma_pos_m, sigma_size_m, sigma_yaw_rad, sigma_app, clutter_rate}) {
        if (!(sigma >= 0.0)) throw ConfigError("noise levels and clutter rate must be nonnegative");
    }
    if (!(min_speed_mps > 0.0 && max_speed_mps >= min_speed_mps)) throw ConfigError("bad vehicle speed range");
    if (appearance_blocks <= 0 || appearance_block_length <= 0) throw ConfigError("appearance shape must be positive");
    if (!(max_range_m > min_range_m && max_lateral_m > 0.0)) throw ConfigError("bad detection region");
    camera.validate();
}

ScenarioConfig ScenarioConfig::noiseless() const {
    ScenarioConfig c = *this;
    c.sigma_pos_m = c.sigma_size_m = c.sigma_yaw_rad = c.sigma_app = 0.0;
    c.miss_probability = 0.0;
    c.clutter_rate = 0.0;
    return c;
}

Scenario generate(const ScenarioConfig& c) {
    c.validate();
    Sampler s(c.seed);

    std::vector<Vehicle> vehicles;
    for (int i = 0; i < c.n_vehicles; ++i) vehicles.push_back(sample_vehicle(s, c, vehicles));

    // Longest visible run per vehicle.
    std::vector<std::pair<int, int>> runs;
    for (const auto& v : vehicles) {
        std::pair<int, int> best{0, 0};
        int start = -1;
        for (int f = 0; f <= c.n_frames; ++f) {
            bool vis = false;
            if (f < c.n_frames) {
                const Box3D b = ego_box(v, f * c.frame_dt, c);
                vis = in_region(b, c) && visible_box(b, c).has_value();
            }
            if (vis && start < 0) start = f;
            if (!vis && start >= 0) {
                if (f - start > best.second - best.first) best = {start, f};
                start = -1;
            }
        }
        runs.push_back(best);
    }

    Scenario out;
    out.config = c;
    out.sequence.camera = c.camera;
    out.sequence.frames.resize(static_cast<std::size_t>(c.n_frames));
    out.sequence.ego.assign(static_cast<std::size_t>(c.n_frames), EgoMotion{c.ego_speed_mps, 0.0, c.frame_dt});

    for (int f = 0; f < c.n_frames; ++f) {
        const double t = f * c.frame_dt;
        std::vector<std::pair<Detection, int>> dets;
        for (std::size_t i = 0; i < vehicles.size(); ++i) {
            if (f < runs[i].first || f >= runs[i].second) continue;
            const Box3D truth = ego_box(vehicles[i], t, c);
            TrackedBox gt;
            gt.frame_idx = f;
            gt.track_id = static_cast<int>(i);
            gt.box3d = truth;
            gt.box2d = *visible_box(truth, c);
            out.ground_truth.push_back(gt);

            if (s.bernoulli(c.miss_probability)) continue;
            Detection d;
            d.frame_idx = f;
            d.box3d = truth;
            d.box3d.center_x += s.normal(c.sigma_pos_m);
            d.box3d.center_y += s.normal(c.sigma_pos_m);
            d.box3d.length = std::max(0.5, d.box3d.length + s.normal(c.sigma_size_m));
            d.box3d.width = std::max(0.5, d.box3d.width + s.normal(c.sigma_size_m));
            d.box3d.height = std::max(0.5, d.box3d.height + s.normal(c.sigma_size_m));
            d.box3d.yaw = wrap_angle(d.box3d.yaw + s.normal(c.sigma_yaw_rad));
            d.appearance = observe(vehicles[i].latent, c, s);
            const auto box2d = visible_box(d.box3d, c);
            if (!box2d) continue;
            d.box2d = *box2d;
            d.raw_score = 1.0;
            dets.emplace_back(std::move(d), static_cast<int>(i));
        }
        const int clutter = s.poisson(c.clutter_rate);
        for (int k = 0; k < clutter; ++k) {
            for (int attempt = 0; attempt < 20; ++attempt) {
                Detection d;
                d.frame_idx = f;
                d.box3d.center_x = s.uniform(c.min_range_m + 3.0, c.max_range_m);
                d.box3d.center_y = s.uniform(-c.max_lateral_m, c.max_lateral_m);
                d.box3d.length = s.uniform(3.8, 4.8);
                d.box3d.width = s.uniform(1.6, 1.9);
                d.box3d.height = s.uniform(1.4, 1.7);
                d.box3d.center_z = -kCameraHeight + 0.5 * d.box3d.height;
                d.box3d.yaw = wrap_angle(s.uniform(-kPi, kPi));
                d.appearance = observe(random_latent(s, c.appearance_blocks * c.appearance_block_length), c, s);
                const auto box2d = visible_box(d.box3d, c);
                if (!box2d) continue;
                d.box2d = *box2d;
                d.raw_score = 0.0;
                dets.emplace_back(std::move(d), -1);
                break;
            }
        }
        std::shuffle(dets.begin(), dets.end(), s.engine());
        for (auto& [d, track] : dets) {
            d.det_id = static_cast<DetId>(out.detection_track.size());
            out.detection_track.push_back(track);
            out.sequence.frames[static_cast<std::size_t>(f)].push_back(std::move(d));
        }
    }
    return out;
}

ScenarioConfig profile_config(std::string_view profile) {
    ScenarioConfig c;
    if (profile == "smoke") {
        c.n_frames = 10;
        c.n_vehicles = 4;
    } else if (profile == "standard") {
        c.n_frames = 40;
        c.n_vehicles = 6;
        c.sigma_pos_m = 0.3;
        c.miss_probability = 0.1;
        c.clutter_rate = 0.5;
        c.sigma_app = 0.3;
    } else if (profile == "hard") {
        c.n_frames = 40;
        c.n_vehicles = 6;
        c.miss_probability = 0.25;
        c.clutter_rate = 2.0;
    } else {
        throw ConfigError("unknown benchmark profile '" + std::string(profile) + "' (smoke, standard, hard)");
    }
    return c;
}

int profile_sequence_count(std::string_view profile) {
    profile_config(profile);
    return profile == "smoke" ? 2 : 20;
}

Benchmark make_benchmark(std::string_view profile, std::uint64_t base_seed, bool noiseless) {
    const ScenarioConfig base = profile_config(profile);
    Benchmark b;
    b.profile = std::string(profile);
    const int count = profile_sequence_count(profile);
    for (int i = 0; i < count; ++i) {
        ScenarioConfig c = noiseless ? base.noiseless() : base;
        c.seed = base_seed * 1000 + static_cast<std::uint64_t>(i);
        Scenario sc = generate(c);
        char name[16];
        std::snprintf(name, sizeof name, "seq_%04d", i);
        sc.name = name;
        b.scenarios.push_back(std::move(sc));
    }
    return b;
}

} // namespace dsmt
