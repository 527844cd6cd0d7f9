#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace dsmt {

// Dense row-major matrix of assignment weights.
struct WeightMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    WeightMatrix() = default;
    WeightMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
    double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Minimum-cost assignment on a rectangular matrix (Hungarian method with
// potentials, O(n^2 m)). Returns the column assigned to each row, or -1 when
// rows outnumber columns.
std::vector<int> linear_sum_assignment(const WeightMatrix& cost);

// Maximum-weight bipartite matching over pairs with weight >= min_weight.
// Pairs below the threshold are never returned. Result sorted by row.
std::vector<std::pair<int, int>> max_weight_matching(const WeightMatrix& weight, double min_weight);

} // namespace dsmt
