#include "dsmt/hungarian.hpp"

#include <algorithm>
#include <limits>

namespace dsmt {

std::vector<int> linear_sum_assignment(const WeightMatrix& cost) {
    const bool transposed = cost.rows > cost.cols;
    const std::size_t n = transposed ? cost.cols : cost.rows;
    const std::size_t m = transposed ? cost.rows : cost.cols;
    auto at = [&](std::size_t i, std::size_t j) { return transposed ? cost(j, i) : cost(i, j); };

    std::vector<int> result(cost.rows, -1);
    if (n == 0) return result;

    // 1-based potentials formulation; p[j] is the row matched to column j.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] == 0) continue;
        if (transposed) {
            result[j - 1] = static_cast<int>(p[j] - 1);
        } else {
            result[p[j] - 1] = static_cast<int>(j - 1);
        }
    }
    return result;
}

std::vector<std::pair<int, int>> max_weight_matching(const WeightMatrix& weight, double min_weight) {
    std::vector<std::pair<int, int>> pairs;
    if (weight.rows == 0 || weight.cols == 0) return pairs;
    // Forbidden pairs get weight 0, which a maximum-weight matching never
    // prefers over leaving both sides unmatched; they are dropped afterwards.
    WeightMatrix cost(weight.rows, weight.cols);
    for (std::size_t r = 0; r < weight.rows; ++r) {
        for (std::size_t c = 0; c < weight.cols; ++c) {
            const double w = weight(r, c);
            cost(r, c) = w >= min_weight ? -w : 0.0;
        }
    }
    const auto rows = linear_sum_assignment(cost);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int c = rows[r];
        if (c >= 0 && weight(r, static_cast<std::size_t>(c)) >= min_weight) {
            pairs.emplace_back(static_cast<int>(r), c);
        }
    }
    return pairs;
}

} // namespace dsmt
