#include "dsmt/baselines.hpp"
#include "dsmt/error.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace dsmt;

namespace {

Detection with_appearance(std::vector<double> v) {
    Detection d = fixtures::car_at(0, 0, {});
    const std::size_t n = v.size();
    d.appearance = Appearance(1, n, std::move(v));
    return d;
}

Detection with_box(Box2D box) {
    Detection d = fixtures::car_at(0, 0, {});
    d.box2d = box;
    return d;
}

// Every candidate of a threshold sweep, lowest error first, then lowest
// threshold.
ThresholdFit sweep(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
    std::vector<double> s = scores;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::vector<double> candidates{s.front() - 1.0, s.back() + 1.0};
    for (std::size_t i = 0; i + 1 < s.size(); ++i) candidates.push_back((s[i] + s[i + 1]) / 2.0);
    ThresholdFit best{0.0, 2.0};
    for (double t : candidates) {
        int wrong = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) wrong += (scores[i] > t) != (labels[i] != 0);
        const double e = static_cast<double>(wrong) / scores.size();
        if (e < best.error || (e == best.error && t < best.threshold)) best = {t, e};
    }
    return best;
}

} // namespace

TEST(Affinity, HistogramKinds) {
    const auto a = with_appearance({1, 2, 3, 4});
    const auto b = with_appearance({2, 0, 0, 0});
    const auto c = with_appearance({0, 0, 5, 5});
    EXPECT_NEAR(affinity(a, a, AffinityKind::bhattacharyya), 1.0, 1e-12);
    EXPECT_NEAR(affinity(b, c, AffinityKind::bhattacharyya), 0.0, 1e-12);
    EXPECT_NEAR(affinity(a, a, AffinityKind::chi_square), 0.0, 1e-12);
    // p = (1, 0, 0, 0), q = (0, 0, .5, .5): every nonzero term is p_i or q_i.
    EXPECT_NEAR(affinity(b, c, AffinityKind::chi_square), 2.0, 1e-9);
    // Histograms normalize, so scale does not matter.
    const auto a2 = with_appearance({2, 4, 6, 8});
    EXPECT_NEAR(affinity(a, a2, AffinityKind::bhattacharyya), 1.0, 1e-12);
    EXPECT_THROW(affinity(with_appearance({-1, 1}), with_appearance({1, 1}), AffinityKind::chi_square),
                 StructuralError);
}

TEST(Affinity, VectorKinds) {
    const auto a = with_appearance({1, 2, 3, 4});
    const auto a2 = with_appearance({3, 6, 9, 12});
    const auto shifted = with_appearance({3, 5, 7, 9});
    const auto flipped = with_appearance({4, 3, 2, 1});
    EXPECT_NEAR(affinity(a, a2, AffinityKind::cosine), 1.0, 1e-12);
    EXPECT_NEAR(affinity(a, shifted, AffinityKind::correlation), 1.0, 1e-12);
    EXPECT_NEAR(affinity(a, flipped, AffinityKind::correlation), -1.0, 1e-12);
    EXPECT_NEAR(affinity(a, flipped, AffinityKind::cosine), 20.0 / 30.0, 1e-12);
}

TEST(Affinity, GeometryKinds) {
    const auto a = with_box({0, 0, 2, 2});
    const auto b = with_box({1, 0, 3, 2});
    EXPECT_NEAR(affinity(a, b, AffinityKind::bbox_overlap), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(affinity(a, with_box({0, 0, 4, 2}), AffinityKind::bbox_size), 0.5, 1e-12);

    Detection p = fixtures::car_at(0, 0, {10, 0}), q = fixtures::car_at(1, 1, {13, 4});
    EXPECT_NEAR(affinity(p, q, AffinityKind::bbox_position), -5.0, 1e-12);
    q.box3d.yaw = kPi / 3.0;
    EXPECT_NEAR(affinity(p, q, AffinityKind::orientation), 0.5, 1e-12);
}

TEST(Affinity, Symmetric) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        Detection a = fixtures::car_at(0, 0, {10 + 5 * u(rng), u(rng)}, 2, 3);
        Detection b = fixtures::car_at(1, 1, {10 + 5 * u(rng), u(rng)}, 2, 3);
        for (double& v : a.appearance.values()) v = u(rng);
        for (double& v : b.appearance.values()) v = u(rng);
        a.box3d.yaw = u(rng) - 0.5;
        for (AffinityKind k : kAllAffinities) {
            EXPECT_NEAR(affinity(a, b, k), affinity(b, a, k), 1e-12) << to_string(k);
        }
    }
}

TEST(Affinity, NamesRoundTrip) {
    for (AffinityKind k : kAllAffinities) EXPECT_EQ(parse_affinity(to_string(k)), k);
    EXPECT_THROW(parse_affinity("euclid"), ConfigError);
    EXPECT_FALSE(higher_is_similar(AffinityKind::chi_square));
    EXPECT_TRUE(higher_is_similar(AffinityKind::cosine));
}

TEST(Threshold, SeparableData) {
    const std::vector<double> scores{0.1, 0.2, 0.8, 0.9};
    const std::vector<std::uint8_t> labels{0, 0, 1, 1};
    const auto fit = fit_threshold(scores, labels);
    EXPECT_DOUBLE_EQ(fit.threshold, 0.5);
    EXPECT_EQ(fit.error, 0.0);
    EXPECT_EQ(threshold_error(scores, labels, 0.15), 0.25);
}

TEST(Threshold, MatchesScriptedSweep) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    std::bernoulli_distribution coin(0.4);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> scores;
        std::vector<std::uint8_t> labels;
        for (int i = 0; i < 30; ++i) {
            const bool same = coin(rng);
            labels.push_back(same);
            // Rounded so that ties occur.
            scores.push_back(std::round((n(rng) + (same ? 1.0 : 0.0)) * 4.0) / 4.0);
        }
        if (std::count(labels.begin(), labels.end(), 1) == 0) labels[0] = 1;
        if (std::count(labels.begin(), labels.end(), 0) == 0) labels[0] = 0;
        const auto fit = fit_threshold(scores, labels);
        const auto expect = sweep(scores, labels);
        EXPECT_DOUBLE_EQ(fit.error, expect.error);
        EXPECT_DOUBLE_EQ(fit.threshold, expect.threshold);
        EXPECT_DOUBLE_EQ(threshold_error(scores, labels, fit.threshold), fit.error);
    }
}

TEST(Threshold, SingleClassThrows) {
    const std::vector<double> scores{0.1, 0.2};
    EXPECT_THROW(fit_threshold(scores, std::vector<std::uint8_t>{1, 1}), StructuralError);
    EXPECT_THROW(fit_threshold(scores, std::vector<std::uint8_t>{0, 0}), StructuralError);
}
