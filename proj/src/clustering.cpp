#include "xmc/clustering.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace xmc {

ClusterAssignment dbscan(const FeatureSet& set, double eps, int min_pts) {
    if (eps <= 0.0) throw std::invalid_argument("dbscan: eps must be > 0");
    if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");

    const int n = set.count();
    const double sim_floor = 1.0 - eps;   // dist = 1 - u.v <= eps

    // Symmetric epsilon-neighborhoods, self included.
    std::vector<std::vector<int>> neigh(n);
    for (int i = 0; i < n; ++i) neigh[i].push_back(i);
    for (int i = 0; i < n; ++i) {
        const auto ri = set.features.row(i);
        for (int j = i + 1; j < n; ++j) {
            if (dot(ri, set.features.row(j)) >= sim_floor) {
                neigh[i].push_back(j);
                neigh[j].push_back(i);
            }
        }
    }

    std::vector<char> is_core(n, 0);
    for (int i = 0; i < n; ++i) is_core[i] = static_cast<int>(neigh[i].size()) >= min_pts;

    constexpr int kUnvisited = -2;
    std::vector<int> labels(n, kUnvisited);
    int next_cluster = 0;

    // Classic expansion in ascending sample order. A border point reachable
    // from several clusters stays with the first cluster that reaches it.
    for (int i = 0; i < n; ++i) {
        if (labels[i] != kUnvisited) continue;
        if (!is_core[i]) {
            labels[i] = -1;
            continue;
        }
        const int cid = next_cluster++;
        labels[i] = cid;
        std::vector<int> frontier(neigh[i]);
        for (std::size_t f = 0; f < frontier.size(); ++f) {
            const int j = frontier[f];
            if (labels[j] == -1) labels[j] = cid;   // noise becomes a border point
            if (labels[j] != kUnvisited) continue;
            labels[j] = cid;
            if (is_core[j]) frontier.insert(frontier.end(), neigh[j].begin(), neigh[j].end());
        }
    }

    ClusterAssignment out;
    out.labels = std::move(labels);
    out.num_clusters = next_cluster;
    out.members.resize(next_cluster);
    for (int i = 0; i < n; ++i)
        if (out.labels[i] >= 0) out.members[out.labels[i]].push_back(i);
    return out;
}

PrototypeBank compute_prototypes(const FeatureSet& set, const ClusterAssignment& assignment,
                                 double momentum, double temperature) {
    if (assignment.num_clusters < 1)
        throw std::invalid_argument("compute_prototypes: assignment has no clusters");
    if (temperature <= 0.0)
        throw std::invalid_argument("compute_prototypes: temperature must be > 0");
    if (momentum < 0.0 || momentum > 1.0)
        throw std::invalid_argument("compute_prototypes: momentum must be in [0,1]");

    Matrix proto(assignment.num_clusters, set.dim());
    for (int k = 0; k < assignment.num_clusters; ++k) {
        const auto& members = assignment.members[k];
        if (members.empty())
            throw std::invalid_argument("compute_prototypes: cluster " + std::to_string(k) +
                                        " has no members");
        auto dst = proto.row(k);
        for (int idx : members) {
            const auto src = set.features.row(idx);
            for (int c = 0; c < set.dim(); ++c) dst[c] += src[c];
        }
        const double inv = 1.0 / static_cast<double>(members.size());
        for (auto& x : dst) x *= inv;
    }
    PrototypeBank bank;
    bank.prototypes = l2_normalize(std::move(proto));
    bank.momentum = momentum;
    bank.temperature = temperature;
    return bank;
}

void momentum_update(PrototypeBank& bank, int cluster_index, std::span<const double> query) {
    if (cluster_index < 0 || cluster_index >= bank.size())
        throw std::out_of_range("momentum_update: cluster index " + std::to_string(cluster_index) +
                                " out of range");
    if (static_cast<int>(query.size()) != bank.dim())
        throw std::invalid_argument("momentum_update: query dimension mismatch");
    const double m = bank.momentum;
    if (m == 1.0) return;   // degenerate: keep the prototype untouched, bit for bit

    auto row = bank.prototypes.row(cluster_index);
    double norm2 = 0.0;
    for (int c = 0; c < bank.dim(); ++c) {
        row[c] = m * row[c] + (1.0 - m) * query[c];
        norm2 += row[c] * row[c];
    }
    if (norm2 == 0.0)
        throw std::runtime_error("momentum_update: update cancelled the prototype to zero");
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : row) x *= inv;
}

}  // namespace xmc
