#include "xmc/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace xmc {

double RetrievalMetrics::cmc_at(int rank) const {
    if (cmc.empty() || rank < 1) return 0.0;
    const int idx = std::min<int>(rank, static_cast<int>(cmc.size())) - 1;
    return cmc[idx];
}

RetrievalMetrics retrieval_metrics(const FeatureSet& query, const FeatureSet& gallery,
                                   int max_rank) {
    if (!query.truth || !gallery.truth)
        throw std::invalid_argument("retrieval_metrics: both sets must carry truth");
    if (query.dim() != gallery.dim())
        throw std::invalid_argument("retrieval_metrics: dimension mismatch");
    if (max_rank < 1) throw std::invalid_argument("retrieval_metrics: max_rank must be >= 1");

    const int n_query = query.count();
    const int n_gallery = gallery.count();
    const int ranks = std::min(max_rank, n_gallery);

    const Matrix sims = gram(query.features, gallery.features);

    std::vector<int> order(n_gallery);
    std::vector<int> first_hit_count(ranks, 0);
    double ap_sum = 0.0, inp_sum = 0.0;
    int evaluated = 0, skipped = 0;

    for (int qi = 0; qi < n_query; ++qi) {
        const auto srow = sims.row(qi);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (srow[a] != srow[b]) return srow[a] > srow[b];
            return gallery.sample_ids[a] < gallery.sample_ids[b];
        });

        const int truth_id = (*query.truth)[qi];
        int hits = 0, last_hit_rank = 0, first_hit_rank = 0;
        double precision_sum = 0.0;
        for (int r = 0; r < n_gallery; ++r) {
            if ((*gallery.truth)[order[r]] != truth_id) continue;
            ++hits;
            precision_sum += static_cast<double>(hits) / (r + 1);
            last_hit_rank = r + 1;
            if (first_hit_rank == 0) first_hit_rank = r + 1;
        }
        if (hits == 0) {
            ++skipped;   // stays in the CMC denominator as a miss
            continue;
        }
        ++evaluated;
        ap_sum += precision_sum / hits;
        inp_sum += static_cast<double>(hits) / last_hit_rank;
        if (first_hit_rank <= ranks) ++first_hit_count[first_hit_rank - 1];
    }

    RetrievalMetrics out;
    out.skipped_queries = skipped;
    out.map = evaluated > 0 ? ap_sum / evaluated : 0.0;
    out.minp = evaluated > 0 ? inp_sum / evaluated : 0.0;
    out.cmc.resize(ranks);
    int cumulative = 0;
    for (int r = 0; r < ranks; ++r) {
        cumulative += first_hit_count[r];
        out.cmc[r] = static_cast<double>(cumulative) / n_query;
    }
    return out;
}

namespace {

double comb2(double n) { return n * (n - 1.0) / 2.0; }

std::unordered_map<int, int> compact_ids(const std::vector<int>& values) {
    std::unordered_map<int, int> ids;
    for (int v : values)
        if (!ids.count(v)) {
            const int next = static_cast<int>(ids.size());
            ids[v] = next;
        }
    return ids;
}

}  // namespace

LabelQuality label_quality(const ClusterAssignment& assignment, const std::vector<int>& truth) {
    if (assignment.labels.size() != truth.size())
        throw std::invalid_argument("label_quality: truth size mismatch");

    std::vector<int> kept_truth;
    std::vector<int> kept_label;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (assignment.labels[i] >= 0) {
            kept_label.push_back(assignment.labels[i]);
            kept_truth.push_back(truth[i]);
        }
    if (kept_truth.empty()) throw std::runtime_error("label_quality: no non-outlier samples");

    const auto id_map = compact_ids(kept_truth);
    const int num_ids = static_cast<int>(id_map.size());
    const int num_clusters = assignment.num_clusters;
    const int n = static_cast<int>(kept_truth.size());

    // contingency counts: cluster x identity
    std::vector<std::vector<int>> table(num_clusters, std::vector<int>(num_ids, 0));
    for (int i = 0; i < n; ++i) ++table[kept_label[i]][id_map.at(kept_truth[i])];

    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0, purity_acc = 0.0;
    std::vector<int> col_totals(num_ids, 0);
    for (int k = 0; k < num_clusters; ++k) {
        int row_total = 0, row_peak = 0;
        for (int j = 0; j < num_ids; ++j) {
            const int c = table[k][j];
            sum_cells += comb2(c);
            row_total += c;
            col_totals[j] += c;
            row_peak = std::max(row_peak, c);
        }
        sum_rows += comb2(row_total);
        if (row_total > 0) purity_acc += static_cast<double>(row_peak) / row_total;
    }
    for (int j = 0; j < num_ids; ++j) sum_cols += comb2(col_totals[j]);

    LabelQuality out;
    out.purity = purity_acc / num_clusters;
    const double total_pairs = comb2(static_cast<double>(n));
    if (total_pairs == 0.0) {
        out.ari = 1.0;
        return out;
    }
    const double expected = sum_rows * sum_cols / total_pairs;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    out.ari = (max_index - expected) == 0.0 ? 1.0 : (sum_cells - expected) / (max_index - expected);
    return out;
}

namespace {

// Majority identity of a cluster; ties go to the smallest identity.
int majority_identity(const std::vector<int>& members, const std::vector<int>& truth) {
    std::unordered_map<int, int> counts;
    for (int idx : members) ++counts[truth[idx]];
    int best_id = 0, best_count = -1;
    for (const auto& [id, count] : counts)
        if (count > best_count || (count == best_count && id < best_id)) {
            best_id = id;
            best_count = count;
        }
    return best_id;
}

}  // namespace

double cross_match_accuracy(const CrossModalMap& map, const ClusterAssignment& assign_v,
                            const ClusterAssignment& assign_i,
                            const std::vector<int>& truth_v, const std::vector<int>& truth_i) {
    if (static_cast<int>(map.v_to_i.size()) != assign_v.num_clusters)
        throw std::invalid_argument("cross_match_accuracy: transformer length mismatch");
    if (assign_v.num_clusters < 1) throw std::invalid_argument("cross_match_accuracy: no clusters");

    std::vector<int> majority_i(assign_i.num_clusters);
    for (int l = 0; l < assign_i.num_clusters; ++l)
        majority_i[l] = majority_identity(assign_i.members[l], truth_i);

    int agree = 0;
    for (int k = 0; k < assign_v.num_clusters; ++k) {
        const int own = majority_identity(assign_v.members[k], truth_v);
        if (own == majority_i[map.v_to_i[k]]) ++agree;
    }
    return static_cast<double>(agree) / assign_v.num_clusters;
}

std::string serialize_metrics(const MetricsReport& report) {
    char buf[64];
    std::string out;
    const std::pair<const char*, double> fields[] = {
        {"map", report.map},     {"cmc1", report.cmc1},   {"cmc5", report.cmc5},
        {"cmc10", report.cmc10}, {"minp", report.minp},   {"ari_v", report.ari_v},
        {"ari_i", report.ari_i}, {"xmatch", report.xmatch},
    };
    for (const auto& [name, value] : fields) {
        std::snprintf(buf, sizeof buf, "%s %.9f\n", name, value);
        out += buf;
    }
    return out;
}

MetricsReport parse_metrics(const std::string& text) {
    std::istringstream in(text);
    std::unordered_map<std::string, double> values;
    std::string name;
    double value = 0.0;
    while (in >> name >> value) values[name] = value;
    const auto get = [&](const char* key) {
        auto it = values.find(key);
        if (it == values.end())
            throw std::runtime_error(std::string("parse_metrics: missing field ") + key);
        return it->second;
    };
    MetricsReport report;
    report.map = get("map");
    report.cmc1 = get("cmc1");
    report.cmc5 = get("cmc5");
    report.cmc10 = get("cmc10");
    report.minp = get("minp");
    report.ari_v = get("ari_v");
    report.ari_i = get("ari_i");
    report.xmatch = get("xmatch");
    return report;
}

}  // namespace xmc
