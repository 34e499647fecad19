#pragma once

#include <string>
#include <vector>

#include "xmc/clustering.hpp"
#include "xmc/dataspace.hpp"
#include "xmc/matching.hpp"

namespace xmc {

struct RetrievalMetrics {
    double map = 0.0;
    std::vector<double> cmc;   // cmc[r-1] = fraction of queries with a hit in top r
    double minp = 0.0;
    int skipped_queries = 0;   // queries with no gallery match; excluded from map/minp,
                               // counted as misses in cmc

    double cmc_at(int rank) const;   // clamped to the last computed rank
};

// Gallery ranked per query by descending cosine, ties by ascending sample_id.
// AP averages precision at each hit; INP = (#matches) / rank of the last hit.
// Both sets must carry truth.
RetrievalMetrics retrieval_metrics(const FeatureSet& query, const FeatureSet& gallery,
                                   int max_rank);

struct LabelQuality {
    double ari = 0.0;     // adjusted Rand index over non-outlier samples
    double purity = 0.0;  // mean over clusters of the dominant-identity fraction
};

LabelQuality label_quality(const ClusterAssignment& assignment, const std::vector<int>& truth);

// Fraction of visible clusters whose majority identity agrees with the
// majority identity of their matched infrared cluster.
double cross_match_accuracy(const CrossModalMap& map, const ClusterAssignment& assign_v,
                            const ClusterAssignment& assign_i,
                            const std::vector<int>& truth_v, const std::vector<int>& truth_i);

struct MetricsReport {
    double map = 0.0;
    double cmc1 = 0.0;
    double cmc5 = 0.0;
    double cmc10 = 0.0;
    double minp = 0.0;
    double ari_v = 0.0;
    double ari_i = 0.0;
    double xmatch = 0.0;
};

// Fixed-field structured text, one `name value` line each.
std::string serialize_metrics(const MetricsReport& report);
MetricsReport parse_metrics(const std::string& text);

}  // namespace xmc
