#include "dsmt/baselines.hpp"

#include "dsmt/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dsmt {

namespace {

std::vector<double> histogram(const Appearance& a) {
    std::vector<double> p(a.values().begin(), a.values().end());
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0) throw StructuralError("histogram affinities need nonnegative appearance values");
        sum += v;
    }
    if (!(sum > 0.0)) throw StructuralError("histogram affinities need a nonzero appearance vector");
    for (double& v : p) v /= sum;
    return p;
}

void check_shapes(const Appearance& a, const Appearance& b) {
    if (a.values().size() != b.values().size()) throw StructuralError("appearance vectors differ in length");
}

} // namespace

const char* to_string(AffinityKind kind) {
    switch (kind) {
    case AffinityKind::cosine: return "cosine";
    case AffinityKind::correlation: return "correlation";
    case AffinityKind::bhattacharyya: return "bhattacharyya";
    case AffinityKind::chi_square: return "chi_square";
    case AffinityKind::bbox_size: return "bbox_size";
    case AffinityKind::bbox_position: return "bbox_position";
    case AffinityKind::bbox_overlap: return "bbox_overlap";
    case AffinityKind::orientation: return "orientation";
    }
    return "?";
}

AffinityKind parse_affinity(std::string_view name) {
    for (auto k : kAllAffinities) {
        if (name == to_string(k)) return k;
    }
    throw ConfigError("unknown affinity kind '" + std::string(name) + "'");
}

bool higher_is_similar(AffinityKind kind) { return kind != AffinityKind::chi_square; }

double affinity(const Detection& a, const Detection& b, AffinityKind kind) {
    switch (kind) {
    case AffinityKind::cosine: {
        check_shapes(a.appearance, b.appearance);
        const auto x = a.appearance.values(), y = b.appearance.values();
        double dot = 0.0, nx = 0.0, ny = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            dot += x[i] * y[i];
            nx += x[i] * x[i];
            ny += y[i] * y[i];
        }
        if (nx == 0.0 || ny == 0.0) return 0.0;
        return dot / std::sqrt(nx * ny);
    }
    case AffinityKind::correlation: {
        check_shapes(a.appearance, b.appearance);
        const auto x = a.appearance.values(), y = b.appearance.values();
        const double n = static_cast<double>(x.size());
        const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
        const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
            syy += (y[i] - my) * (y[i] - my);
        }
        if (sxx == 0.0 || syy == 0.0) return 0.0;
        return sxy / std::sqrt(sxx * syy);
    }
    case AffinityKind::bhattacharyya: {
        check_shapes(a.appearance, b.appearance);
        const auto p = histogram(a.appearance), q = histogram(b.appearance);
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += std::sqrt(p[i] * q[i]);
        return s;
    }
    case AffinityKind::chi_square: {
        check_shapes(a.appearance, b.appearance);
        const auto p = histogram(a.appearance), q = histogram(b.appearance);
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]) / (p[i] + q[i] + kChiSquareEpsilon);
        return s;
    }
    case AffinityKind::bbox_size: {
        const double x = a.box2d.area(), y = b.box2d.area();
        const double hi = std::max(x, y);
        return hi > 0.0 ? std::min(x, y) / hi : 0.0;
    }
    case AffinityKind::bbox_position:
        return -std::sqrt(std::pow(a.box3d.center_x - b.box3d.center_x, 2) +
                          std::pow(a.box3d.center_y - b.box3d.center_y, 2) +
                          std::pow(a.box3d.center_z - b.box3d.center_z, 2));
    case AffinityKind::bbox_overlap: return iou(a.box2d, b.box2d);
    case AffinityKind::orientation: return std::cos(a.box3d.yaw - b.box3d.yaw);
    }
    throw ConfigError("unknown affinity kind");
}

double threshold_error(std::span<const double> scores, std::span<const std::uint8_t> labels, double threshold) {
    if (scores.size() != labels.size()) throw StructuralError("scores and labels differ in length");
    if (scores.empty()) throw StructuralError("threshold error needs at least one pair");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if ((scores[i] > threshold) != (labels[i] != 0)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(scores.size());
}

ThresholdFit fit_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw StructuralError("scores and labels differ in length");
    const auto positives = std::count_if(labels.begin(), labels.end(), [](std::uint8_t l) { return l != 0; });
    if (positives == 0 || positives == static_cast<long>(labels.size())) {
        throw StructuralError("threshold fitting needs both classes");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sweep thresholds upward. Below the minimum everything is "same": the
    // errors are the negatives. Passing a group of equal scores flips them.
    const double total = static_cast<double>(scores.size());
    long errors = static_cast<long>(labels.size()) - positives;
    ThresholdFit best{scores[order.front()] - 1.0, static_cast<double>(errors) / total};
    std::size_t i = 0;
    while (i < order.size()) {
        const double value = scores[order[i]];
        while (i < order.size() && scores[order[i]] == value) {
            errors += labels[order[i]] ? 1 : -1;
            ++i;
        }
        const double t = i < order.size() ? 0.5 * (value + scores[order[i]]) : value + 1.0;
        const double err = static_cast<double>(errors) / total;
        if (err < best.error) best = {t, err};
    }
    return best;
}

} // namespace dsmt
