#include "xmc/neighbors.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace xmc {

NeighborList knn_from_sims(std::span<const double> sims, const FeatureSet& targets, int k,
                           int exclude_index) {
    const int n = targets.count();
    if (n == 0) throw std::invalid_argument("knn: empty target set");
    if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
    if (static_cast<int>(sims.size()) != n)
        throw std::invalid_argument("knn: similarity row length mismatch");

    std::vector<int> order;
    order.reserve(n);
    for (int j = 0; j < n; ++j)
        if (j != exclude_index) order.push_back(j);

    const int k_eff = std::min<int>(k, static_cast<int>(order.size()));
    const auto better = [&](int a, int b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        return targets.sample_ids[a] < targets.sample_ids[b];
    };
    if (k_eff < static_cast<int>(order.size()))
        std::nth_element(order.begin(), order.begin() + k_eff, order.end(), better);
    std::sort(order.begin(), order.begin() + k_eff, better);
    order.resize(k_eff);

    NeighborList out;
    out.query_index = exclude_index;
    out.target_modality = targets.modality;
    out.k = k_eff;
    out.indices = std::move(order);
    return out;
}

NeighborList knn(std::span<const double> query, const FeatureSet& targets, int k,
                 int exclude_index) {
    const int n = targets.count();
    if (n == 0) throw std::invalid_argument("knn: empty target set");
    if (static_cast<int>(query.size()) != targets.dim())
        throw std::invalid_argument("knn: query dimension mismatch");
    std::vector<double> sims(n);
    for (int j = 0; j < n; ++j) sims[j] = dot(query, targets.features.row(j));
    return knn_from_sims(sims, targets, k, exclude_index);
}

Correlation cluster_correlation(const NeighborList& neighbors, const ClusterAssignment& assignment) {
    const int num_clusters = assignment.num_clusters;
    const int n_samples = static_cast<int>(assignment.labels.size());

    std::vector<int> overlap(num_clusters, 0);
    for (int idx : neighbors.indices) {
        if (idx < 0 || idx >= n_samples)
            throw std::out_of_range("cluster_correlation: neighbor index " + std::to_string(idx) +
                                    " outside the assignment's sample set");
        const int label = assignment.labels[idx];
        if (label >= 0) ++overlap[label];   // outliers count in N but in no cluster
    }

    Correlation corr;
    corr.raw.assign(num_clusters, 0.0);
    const int n_neighbors = static_cast<int>(neighbors.indices.size());
    double sum = 0.0;
    for (int l = 0; l < num_clusters; ++l) {
        const int cluster_size = static_cast<int>(assignment.members[l].size());
        const int uni = n_neighbors + cluster_size - overlap[l];
        corr.raw[l] = uni > 0 ? static_cast<double>(overlap[l]) / uni : 0.0;
        sum += corr.raw[l];
    }
    corr.normalized.assign(num_clusters, 0.0);
    if (sum > 0.0)
        for (int l = 0; l < num_clusters; ++l) corr.normalized[l] = corr.raw[l] / sum;
    return corr;
}

}  // namespace xmc
