#pragma once

#include <span>
#include <vector>

#include "xmc/dataspace.hpp"
#include "xmc/matrix.hpp"

namespace xmc {

struct ClusterAssignment {
    std::vector<int> labels;                // cluster index >= 0, or -1 for outliers
    int num_clusters = 0;
    std::vector<std::vector<int>> members;  // per cluster, ascending sample indices
};

// DBSCAN under cosine distance 1 - u.v on unit rows. Core points have at
// least min_pts neighbors within eps, self included. Scan order is ascending
// sample index, which also fixes which cluster claims a contested border
// point: the first one whose expansion reaches it.
ClusterAssignment dbscan(const FeatureSet& set, double eps, int min_pts);

struct PrototypeBank {
    Matrix prototypes;          // num_clusters x dim, unit rows
    double momentum = 0.2;
    double temperature = 0.05;

    int size() const { return prototypes.rows(); }
    int dim() const { return prototypes.cols(); }
};

// Per-cluster normalized mean of member rows; outliers take no part.
PrototypeBank compute_prototypes(const FeatureSet& set, const ClusterAssignment& assignment,
                                 double momentum = 0.2, double temperature = 0.05);

// phi <- normalize(m*phi + (1-m)*q); only the addressed row changes.
// m == 1 is the degenerate no-op.
void momentum_update(PrototypeBank& bank, int cluster_index, std::span<const double> query);

}  // namespace xmc
