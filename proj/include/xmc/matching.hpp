#pragma once

#include <utility>
#include <vector>

#include "xmc/clustering.hpp"
#include "xmc/matrix.hpp"

namespace xmc {

// Cross-modality cluster association. `match` is the constrained one-to-one
// round (binary, row and column sums <= 1); v_to_i / i_to_v are the total
// label transformers after progressive completion.
struct CrossModalMap {
    Matrix cost;               // K x L cosine distances between prototypes
    Matrix match;              // K x L, entries 0 or 1
    std::vector<int> v_to_i;   // length K
    std::vector<int> i_to_v;   // length L
};

// D[k][l] = 1 - phi_k^v . phi_l^i; entries in [0, 2].
Matrix cost_matrix(const PrototypeBank& bank_v, const PrototypeBank& bank_i);

// Minimum-total-cost assignment of size min(K, L) under the one-to-one
// constraints, solved exactly (Kuhn-Munkres with potentials). Choices between
// equal-cost alternatives fall to the lowest (row, col) by scan order.
Matrix assign_one_to_one(const Matrix& cost);

// Matched clusters keep their partner in both directions; every unmatched
// visible cluster maps to its cheapest infrared column and vice versa
// (many-to-one allowed only in this completion round). Both transformers are
// total afterwards.
std::pair<std::vector<int>, std::vector<int>> progressive_complete(const Matrix& cost,
                                                                   const Matrix& match);

// cost_matrix + assign_one_to_one + progressive_complete in one step.
CrossModalMap build_cross_modal_map(const PrototypeBank& bank_v, const PrototypeBank& bank_i);

}  // namespace xmc
