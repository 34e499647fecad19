#include "xmc/matching.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace xmc {

Matrix cost_matrix(const PrototypeBank& bank_v, const PrototypeBank& bank_i) {
    if (bank_v.size() < 1 || bank_i.size() < 1)
        throw std::invalid_argument("cost_matrix: empty prototype bank");
    if (bank_v.dim() != bank_i.dim())
        throw std::invalid_argument("cost_matrix: prototype dimension mismatch");
    Matrix cost = gram(bank_v.prototypes, bank_i.prototypes);
    for (auto& x : cost.data()) x = 1.0 - x;
    return cost;
}

namespace {

// Kuhn-Munkres with potentials, shortest augmenting path per row; n <= m,
// 1-based with column 0 as the sentinel. Returns p where p[j] is the row
// matched to column j (0 = unmatched). Scans ascend, strict < comparisons,
// so equal-cost alternatives resolve toward low indices.
std::vector<int> solve_assignment(const Matrix& a, int n, int m) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = -1;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a.at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
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
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    return p;
}

}  // namespace

Matrix assign_one_to_one(const Matrix& cost) {
    const int rows = cost.rows();
    const int cols = cost.cols();
    if (rows < 1 || cols < 1) throw std::invalid_argument("assign_one_to_one: empty cost matrix");
    for (double x : cost.data())
        if (!std::isfinite(x))
            throw std::invalid_argument("assign_one_to_one: cost matrix has a non-finite entry");

    // The solver wants rows <= cols; transpose when the visible side is larger.
    const bool transposed = rows > cols;
    Matrix a = cost;
    if (transposed) {
        a = Matrix(cols, rows);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) a.at(c, r) = cost.at(r, c);
    }

    const auto p = solve_assignment(a, a.rows(), a.cols());
    Matrix match(rows, cols, 0.0);
    for (int j = 1; j <= a.cols(); ++j) {
        if (p[j] == 0) continue;
        const int r = p[j] - 1;
        const int c = j - 1;
        if (transposed)
            match.at(c, r) = 1.0;
        else
            match.at(r, c) = 1.0;
    }
    return match;
}

std::pair<std::vector<int>, std::vector<int>> progressive_complete(const Matrix& cost,
                                                                   const Matrix& match) {
    const int num_v = cost.rows();
    const int num_i = cost.cols();
    if (match.rows() != num_v || match.cols() != num_i)
        throw std::invalid_argument("progressive_complete: match/cost shape mismatch");

    std::vector<int> v_to_i(num_v, -1), i_to_v(num_i, -1);
    for (int k = 0; k < num_v; ++k)
        for (int l = 0; l < num_i; ++l)
            if (match.at(k, l) != 0.0) {
                v_to_i[k] = l;
                i_to_v[l] = k;
            }

    for (int k = 0; k < num_v; ++k) {
        if (v_to_i[k] >= 0) continue;
        int best = 0;
        for (int l = 1; l < num_i; ++l)
            if (cost.at(k, l) < cost.at(k, best)) best = l;
        v_to_i[k] = best;
    }
    for (int l = 0; l < num_i; ++l) {
        if (i_to_v[l] >= 0) continue;
        int best = 0;
        for (int k = 1; k < num_v; ++k)
            if (cost.at(k, l) < cost.at(best, l)) best = k;
        i_to_v[l] = best;
    }
    return {std::move(v_to_i), std::move(i_to_v)};
}

CrossModalMap build_cross_modal_map(const PrototypeBank& bank_v, const PrototypeBank& bank_i) {
    CrossModalMap map;
    map.cost = cost_matrix(bank_v, bank_i);
    map.match = assign_one_to_one(map.cost);
    auto transformers = progressive_complete(map.cost, map.match);
    map.v_to_i = std::move(transformers.first);
    map.i_to_v = std::move(transformers.second);
    return map;
}

}  // namespace xmc
