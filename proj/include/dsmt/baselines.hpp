#pragma once

// Handcrafted pair affinities and threshold classifiers fit on them.

#include "dsmt/core.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsmt {

enum class AffinityKind {
    cosine,
    correlation,
    bhattacharyya,
    chi_square,
    bbox_size,
    bbox_position,
    bbox_overlap,
    orientation,
};

inline constexpr AffinityKind kAllAffinities[] = {
    AffinityKind::cosine,        AffinityKind::correlation,   AffinityKind::bhattacharyya,
    AffinityKind::chi_square,    AffinityKind::bbox_size,     AffinityKind::bbox_position,
    AffinityKind::bbox_overlap,  AffinityKind::orientation,
};

const char* to_string(AffinityKind kind);
// Throws ConfigError on an unknown name.
AffinityKind parse_affinity(std::string_view name);

// False only for chi_square, which is a distance.
bool higher_is_similar(AffinityKind kind);

inline constexpr double kChiSquareEpsilon = 1e-12;

// Histogram kinds (bhattacharyya, chi_square) normalize each concatenated
// appearance vector to sum 1 and require nonnegative entries.
// cosine:        a.b / (|a||b|)
// correlation:   Pearson correlation of the two vectors
// bhattacharyya: sum sqrt(p_i q_i)
// chi_square:    sum (p_i - q_i)^2 / (p_i + q_i + eps)
// bbox_size:     min / max of the 2D areas
// bbox_position: minus the 3D center distance
// bbox_overlap:  2D IoU
// orientation:   cos(yaw_a - yaw_b)
double affinity(const Detection& a, const Detection& b, AffinityKind kind);

struct ThresholdFit {
    double threshold = 0.0;
    double error = 0.0; // fraction misclassified on the fitting data
};

// Predicts "same" when score > threshold. Candidates are the midpoints
// between consecutive sorted distinct scores, plus one below the minimum and
// one above the maximum; the lowest threshold wins ties. Throws
// StructuralError unless both labels are present.
ThresholdFit fit_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Fraction misclassified by `score > threshold`.
double threshold_error(std::span<const double> scores, std::span<const std::uint8_t> labels, double threshold);

} // namespace dsmt
