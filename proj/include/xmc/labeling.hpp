#pragma once

#include <iosfwd>
#include <vector>

#include "xmc/matching.hpp"
#include "xmc/neighbors.hpp"

namespace xmc {

enum class LabelContext { Intra, Inter };

// Soft target over the clusters of one modality. hard_index is the sample's
// own cluster (intra) or that cluster's matched partner (inter).
struct CalibratedLabel {
    int hard_index = -1;
    std::vector<double> soft;   // non-negative, sums to 1
    LabelContext context = LabelContext::Intra;
};

struct SampleWeight {
    double intra = 1.0;
    double inter = 1.0;
};

// soft = mu * onehot + (1 - mu) * corr.normalized. When the correlation is
// all-zero (no neighbor lies in any cluster) the mass reverts to the hard
// label so the result stays on the simplex; mu == 1 returns the exact one-hot.
CalibratedLabel calibrate(int one_hot_index, int num_clusters, const Correlation& corr,
                          double mu, LabelContext context = LabelContext::Intra);

// exp(-w * (1 - P[target_index])^2) on the normalized correlation; equals 1
// at full consistency and never drops below exp(-w).
double weight(const Correlation& corr, int target_index, double w);

struct SampleLabeling {
    int sample_index = -1;
    CalibratedLabel intra;
    CalibratedLabel inter;
    SampleWeight weight;
};

// One entry per non-outlier sample; outliers sit the epoch out.
struct EpochLabels {
    std::vector<SampleLabeling> visible;
    std::vector<SampleLabeling> infrared;
};

// For every non-outlier sample of each modality: neighbor correlations against
// both modalities' clusters, calibrated intra/inter labels (the inter hard
// index comes from the label transformer), and consistency weights.
// exclude-self applies to the home-modality search only.
EpochLabels build_epoch_labels(const FeatureSet& set_v, const FeatureSet& set_i,
                               const ClusterAssignment& assign_v,
                               const ClusterAssignment& assign_i,
                               const CrossModalMap& map, int k, double mu, double w);

// Debug dump, one line-delimited record per sample: hard indices, top-5 soft
// entries and both weights.
void dump_epoch_labels(const EpochLabels& labels, const FeatureSet& set_v,
                       const FeatureSet& set_i, std::ostream& out);

}  // namespace xmc
