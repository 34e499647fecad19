#include "xmc/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace xmc {

CalibratedLabel calibrate(int one_hot_index, int num_clusters, const Correlation& corr,
                          double mu, LabelContext context) {
    if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("calibrate: mu must be in [0,1]");
    if (one_hot_index < 0 || one_hot_index >= num_clusters)
        throw std::out_of_range("calibrate: one-hot index " + std::to_string(one_hot_index) +
                                " out of range");
    if (static_cast<int>(corr.normalized.size()) != num_clusters)
        throw std::invalid_argument("calibrate: correlation length mismatch");

    CalibratedLabel label;
    label.hard_index = one_hot_index;
    label.context = context;
    label.soft.assign(num_clusters, 0.0);

    double raw_sum = 0.0;
    for (double x : corr.raw) raw_sum += x;

    if (mu == 1.0 || raw_sum == 0.0) {
        // mu == 1 must reproduce the one-hot bit-exactly; with no neighbor in
        // any cluster the (1-mu) mass reverts to the hard label so the result
        // stays on the simplex.
        label.soft[one_hot_index] = 1.0;
        return label;
    }
    for (int l = 0; l < num_clusters; ++l) label.soft[l] = (1.0 - mu) * corr.normalized[l];
    label.soft[one_hot_index] += mu;
    return label;
}

double weight(const Correlation& corr, int target_index, double w) {
    if (w < 0.0) throw std::invalid_argument("weight: w must be >= 0");
    if (target_index < 0 || target_index >= static_cast<int>(corr.normalized.size()))
        throw std::out_of_range("weight: target index " + std::to_string(target_index) +
                                " out of range");
    const double gap = 1.0 - corr.normalized[target_index];
    return std::exp(-w * gap * gap);
}

namespace {

// One side of the epoch pass. home/other are the encoded feature sets,
// sims_home is the home gram matrix, sims_cross has one row per home sample
// against the other set. transformer maps home clusters to other clusters.
void label_one_side(const FeatureSet& home, const FeatureSet& other,
                    const Matrix& sims_home, const Matrix& sims_cross,
                    const ClusterAssignment& assign_home, const ClusterAssignment& assign_other,
                    const std::vector<int>& transformer, int k, double mu, double w,
                    std::vector<SampleLabeling>& out) {
    for (int idx = 0; idx < home.count(); ++idx) {
        const int own_cluster = assign_home.labels[idx];
        if (own_cluster < 0) continue;   // outliers sit the epoch out

        const auto n_intra = knn_from_sims(sims_home.row(idx), home, k, idx);
        const auto c_intra = cluster_correlation(n_intra, assign_home);
        const auto n_inter = knn_from_sims(sims_cross.row(idx), other, k, -1);
        const auto c_inter = cluster_correlation(n_inter, assign_other);

        const int matched = transformer[own_cluster];

        SampleLabeling rec;
        rec.sample_index = idx;
        rec.intra = calibrate(own_cluster, assign_home.num_clusters, c_intra, mu,
                              LabelContext::Intra);
        rec.inter = calibrate(matched, assign_other.num_clusters, c_inter, mu,
                              LabelContext::Inter);
        rec.weight.intra = weight(c_intra, own_cluster, w);
        rec.weight.inter = weight(c_inter, matched, w);
        out.push_back(std::move(rec));
    }
}

}  // namespace

EpochLabels build_epoch_labels(const FeatureSet& set_v, const FeatureSet& set_i,
                               const ClusterAssignment& assign_v,
                               const ClusterAssignment& assign_i,
                               const CrossModalMap& map, int k, double mu, double w) {
    if (static_cast<int>(assign_v.labels.size()) != set_v.count() ||
        static_cast<int>(assign_i.labels.size()) != set_i.count())
        throw std::invalid_argument("build_epoch_labels: assignment/set size mismatch");
    if (static_cast<int>(map.v_to_i.size()) != assign_v.num_clusters ||
        static_cast<int>(map.i_to_v.size()) != assign_i.num_clusters)
        throw std::invalid_argument("build_epoch_labels: transformer/cluster count mismatch");
    if (k < 1) throw std::invalid_argument("build_epoch_labels: k must be >= 1");

    const Matrix sims_vv = gram(set_v.features, set_v.features);
    const Matrix sims_ii = gram(set_i.features, set_i.features);
    const Matrix sims_vi = gram(set_v.features, set_i.features);
    Matrix sims_iv(set_i.count(), set_v.count());
    for (int a = 0; a < set_v.count(); ++a)
        for (int b = 0; b < set_i.count(); ++b) sims_iv.at(b, a) = sims_vi.at(a, b);

    EpochLabels labels;
    label_one_side(set_v, set_i, sims_vv, sims_vi, assign_v, assign_i, map.v_to_i, k, mu, w,
                   labels.visible);
    label_one_side(set_i, set_v, sims_ii, sims_iv, assign_i, assign_v, map.i_to_v, k, mu, w,
                   labels.infrared);
    return labels;
}

namespace {

void dump_side(const std::vector<SampleLabeling>& side, const FeatureSet& set,
               std::ostream& out) {
    char buf[64];
    for (const auto& rec : side) {
        out << "{\"modality\":\"" << modality_name(set.modality) << "\",\"sample_id\":"
            << set.sample_ids[rec.sample_index];
        for (const CalibratedLabel* label : {&rec.intra, &rec.inter}) {
            out << (label->context == LabelContext::Intra ? ",\"intra\"" : ",\"inter\"")
                << ":{\"hard\":" << label->hard_index << ",\"top\":[";
            std::vector<int> order(label->soft.size());
            for (std::size_t l = 0; l < order.size(); ++l) order[l] = static_cast<int>(l);
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                if (label->soft[a] != label->soft[b]) return label->soft[a] > label->soft[b];
                return a < b;
            });
            const int top = std::min<int>(5, static_cast<int>(order.size()));
            for (int t = 0; t < top; ++t) {
                std::snprintf(buf, sizeof buf, "[%d,%.9g]", order[t], label->soft[order[t]]);
                out << (t ? "," : "") << buf;
            }
            out << "]}";
        }
        std::snprintf(buf, sizeof buf, ",\"w_intra\":%.9g,\"w_inter\":%.9g}\n",
                      rec.weight.intra, rec.weight.inter);
        out << buf;
    }
}

}  // namespace

void dump_epoch_labels(const EpochLabels& labels, const FeatureSet& set_v,
                       const FeatureSet& set_i, std::ostream& out) {
    dump_side(labels.visible, set_v, out);
    dump_side(labels.infrared, set_i, out);
}

}  // namespace xmc
