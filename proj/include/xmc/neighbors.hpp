#pragma once

#include <span>
#include <vector>

#include "xmc/clustering.hpp"
#include "xmc/dataspace.hpp"

namespace xmc {

struct NeighborList {
    int query_index = -1;       // row inside the target set, or -1 for an external query
    Modality target_modality = Modality::Visible;
    int k = 0;                  // effective k after clamping
    std::vector<int> indices;   // descending similarity, ties by ascending sample_id
};

// k nearest targets of `query` by dot product (rows are unit-norm, so this is
// cosine similarity). `exclude_index` drops one target row; pass the query's
// own row when searching its home set, -1 otherwise. k is clamped to the
// number of available targets.
NeighborList knn(std::span<const double> query, const FeatureSet& targets, int k,
                 int exclude_index = -1);

// Same selection over a precomputed similarity row (sims[j] = query . target_j).
NeighborList knn_from_sims(std::span<const double> sims, const FeatureSet& targets, int k,
                           int exclude_index = -1);

struct Correlation {
    std::vector<double> raw;         // per-cluster Jaccard overlap, each in [0,1]
    std::vector<double> normalized;  // l1-normalized; an all-zero raw stays all-zero
};

// raw[l] = |N intersect C_l| / |N union C_l| where N is the neighbor index set.
// Outlier neighbors count toward N but belong to no cluster.
Correlation cluster_correlation(const NeighborList& neighbors, const ClusterAssignment& assignment);

}  // namespace xmc
