#pragma once

// Shared fixtures for unit and acceptance tests: random association
// instances, random feasible assignments and hand-built sequences.

#include "dsmt/assoc.hpp"
#include "dsmt/core.hpp"
#include "dsmt/features.hpp"
#include "dsmt/solver.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace dsmt::fixtures {

// Up to `max_dets` detections over up to `max_frames` frames with every
// adjacent-frame link, then links dropped at random until the layout fits
// `max_vars`. Costs uniform in [lo, hi].
inline AssociationGraph random_instance(std::mt19937_64& rng, int max_dets = 8, int max_frames = 4,
                                        int max_vars = kExhaustiveVariableCap, double lo = -2.0, double hi = 2.0) {
    std::uniform_int_distribution<int> n_dist(1, max_dets);
    const int n = n_dist(rng);
    const int frames = std::uniform_int_distribution<int>(1, std::min(max_frames, n))(rng);
    // Every frame gets at least one detection; the rest land anywhere.
    std::vector<int> per_frame(frames, 1);
    std::uniform_int_distribution<int> f_dist(0, frames - 1);
    for (int i = frames; i < n; ++i) ++per_frame[f_dist(rng)];

    std::vector<DetRef> dets;
    std::vector<int> start;
    DetId id = 0;
    for (int f = 0; f < frames; ++f) {
        start.push_back(static_cast<int>(dets.size()));
        for (int i = 0; i < per_frame[f]; ++i) dets.push_back({f, i, id++});
    }
    start.push_back(static_cast<int>(dets.size()));

    std::vector<LinkVar> links;
    for (int f = 0; f + 1 < frames; ++f) {
        for (int j = start[f]; j < start[f + 1]; ++j) {
            for (int k = start[f + 1]; k < start[f + 2]; ++k) links.push_back({j, k});
        }
    }
    while (3 * n + static_cast<int>(links.size()) > max_vars) {
        std::uniform_int_distribution<std::size_t> pick(0, links.size() - 1);
        links.erase(links.begin() + static_cast<std::ptrdiff_t>(pick(rng)));
    }

    AssociationGraph g;
    g.layout = VariableLayout(std::move(dets), std::move(links));
    std::uniform_real_distribution<double> cost(lo, hi);
    g.costs.resize(static_cast<std::size_t>(g.layout.size()));
    for (double& c : g.costs) c = cost(rng);
    g.first_frame = 0;
    g.end_frame = frames;
    return g;
}

// Random flow-feasible assignment built by growing chains frame by frame.
inline Assignment random_feasible(const AssociationGraph& g, std::mt19937_64& rng) {
    const auto& layout = g.layout;
    const int n = layout.detection_count();
    Assignment y(static_cast<std::size_t>(layout.size()));
    std::vector<bool> has_out(n, false);
    std::bernoulli_distribution active(0.7), extend(0.6);
    for (int j = 0; j < n; ++j) {
        if (!active(rng)) continue;
        y[layout.det_var(j)] = 1;
        std::vector<int> options;
        for (int l : layout.incoming(j)) {
            const int from = layout.links()[l].from;
            if (y[layout.det_var(from)] && !has_out[from]) options.push_back(l);
        }
        if (!options.empty() && extend(rng)) {
            const int l = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
            y[layout.link_var(l)] = 1;
            has_out[layout.links()[l].from] = true;
        } else {
            y[layout.new_var(j)] = 1;
        }
    }
    for (int j = 0; j < n; ++j) {
        if (y[layout.det_var(j)] && !has_out[j]) y[layout.end_var(j)] = 1;
    }
    return y;
}

inline TrackedBox gt_box(int frame, int track, double left, double top = 100.0, double size = 50.0) {
    TrackedBox b;
    b.frame_idx = frame;
    b.track_id = track;
    b.box2d = {left, top, left + size, top + size};
    b.box3d = {10.0 + left / 10.0, 0.0, 0.8, 4.0, 1.8, 1.6, 0.0};
    return b;
}

struct Spot {
    double x = 10.0;
    double y = 0.0;
};

// A car-sized detection centered at (x, y) with its projected 2D box and a
// constant appearance.
inline Detection car_at(DetId id, int frame, Spot s, std::size_t blocks = 1, std::size_t block_length = 2) {
    Detection d;
    d.det_id = id;
    d.frame_idx = frame;
    d.box3d = {s.x, s.y, 0.8, 4.0, 1.8, 1.6, 0.0};
    d.box2d = project_box(d.box3d, CameraModel{});
    d.appearance = Appearance(blocks, block_length, std::vector<double>(blocks * block_length, 0.5));
    return d;
}

// One frame per entry; det ids count up in frame order. No ego motion.
inline TrackSequence sequence_of(const std::vector<std::vector<Spot>>& frames) {
    TrackSequence seq;
    DetId id = 0;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        std::vector<Detection> dets;
        for (const auto& s : frames[f]) dets.push_back(car_at(id++, static_cast<int>(f), s));
        seq.frames.push_back(std::move(dets));
        seq.ego.push_back({});
    }
    return seq;
}

// Ground truth box identical to a detection.
inline TrackedBox truth_of(const Detection& d, int track) {
    TrackedBox b;
    b.frame_idx = d.frame_idx;
    b.track_id = track;
    b.box2d = d.box2d;
    b.box3d = d.box3d;
    return b;
}

} // namespace dsmt::fixtures
