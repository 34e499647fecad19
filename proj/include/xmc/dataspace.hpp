#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "xmc/matrix.hpp"

namespace xmc {

enum class Modality { Visible, Infrared };

const char* modality_name(Modality m);
Modality modality_from_name(const std::string& name);

// Unit-norm embeddings for one modality. `truth` carries ground-truth
// identities and exists for evaluation only; the learning path never reads it.
struct FeatureSet {
    Modality modality = Modality::Visible;
    Matrix features;                        // count x dim, rows unit-norm
    std::vector<std::int64_t> sample_ids;   // unique within the set
    std::optional<std::vector<int>> truth;

    int count() const { return features.rows(); }
    int dim() const { return features.cols(); }

    bool operator==(const FeatureSet&) const = default;
};

// Throws std::invalid_argument when an invariant is broken.
void validate(const FeatureSet& set);

struct SynthConfig {
    int num_identities = 40;
    int samples_per_identity = 30;  // per modality
    int dim = 64;
    double intra_identity_spread = 0.45;   // RMS length of the per-sample perturbation
    double modality_offset_scale = 3.2;    // length of the per-identity infrared offset
    double fragmentation_rate = 0.3;       // chance an identity splits per modality
    std::uint64_t seed = 1;

    bool operator==(const SynthConfig&) const = default;
};

// Deterministic two-modality benchmark generator. Every identity gets a random
// unit anchor; visible samples scatter around it, infrared samples around the
// anchor shifted by a fixed per-identity offset. With probability
// fragmentation_rate the samples of one identity in one modality split evenly
// around two sub-anchors displaced by 1.5x the spread along a random
// direction, reproducing the split-cluster failure mode the calibration is
// meant to fix. All rows are renormalized; truth is populated.
std::pair<FeatureSet, FeatureSet> generate_synthetic(const SynthConfig& cfg);

// Normalizes every row to unit Euclidean norm. A zero row is an error naming
// the row index.
Matrix l2_normalize(Matrix m);

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Text feature file, one sample per line:
//   XMC1 <modality> <count> <dim> <has_truth:0|1>
//   <sample_id> [<truth_id>] <f1> ... <fdim>
// Floats are written with 17 significant digits so save/load round-trips
// bit-exactly. load validates header, row lengths, finiteness, id uniqueness
// and unit norms (1e-6); it does not renormalize.
FeatureSet load_features(const std::filesystem::path& path);
void save_features(const FeatureSet& set, const std::filesystem::path& path);

}  // namespace xmc
