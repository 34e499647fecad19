#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "xmc/clustering.hpp"
#include "xmc/dataspace.hpp"
#include "xmc/labeling.hpp"
#include "xmc/prng.hpp"

namespace xmc {

enum class TrainMode { Baseline, ULCOnly, DWOnly, Full };

const char* mode_name(TrainMode mode);
TrainMode mode_from_name(const std::string& name);

// Desk-scale stand-in for the two-stream backbone: one shared linear map with
// unit-norm outputs.
struct Encoder {
    Matrix weight;   // dim_in x dim_out

    static Encoder identity(int dim);
    FeatureSet encode(const FeatureSet& set) const;
};

void save_encoder(const Encoder& encoder, const std::filesystem::path& path);
Encoder load_encoder(const std::filesystem::path& path);

struct TrainConfig {
    int epochs = 25;
    int steps_per_epoch = 24;
    int ids_per_batch = 16;
    int instances_per_id = 16;
    double learning_rate = 0.2;
    int lr_decay_every = 20;       // x0.1 each time
    double mu = 0.7;
    double lambda = 3.0;
    double w = 10.0;
    int k = 20;
    double tau = 0.05;
    double momentum = 0.2;
    double dbscan_eps = 0.30;
    int dbscan_min_pts = 4;
    double jitter = 0.0;           // optional Gaussian feature jitter, off by default
    std::uint64_t seed = 1;
    TrainMode mode = TrainMode::Full;
};

// Per-epoch structured record; quality fields are -1 when truth is absent.
struct EpochRecord {
    int epoch = 0;
    double homo = 0.0;
    double heter = 0.0;
    double total = 0.0;
    int clusters_visible = 0;
    int clusters_infrared = 0;
    int matched_pairs = 0;
    double ari_visible = -1.0;
    double ari_infrared = -1.0;
    double cross_match = -1.0;
};

std::string format_epoch_record(const EpochRecord& record);

struct TrainLog {
    std::vector<EpochRecord> epochs;
    std::vector<std::string> warnings;

    std::string to_text() const;   // one formatted line per epoch
};

struct BatchIndices {
    std::vector<int> visible;    // sample rows, grouped by drawn cluster
    std::vector<int> infrared;
};

// Per modality: ids_per_batch clusters uniformly without replacement (clamped
// with a warning when there are fewer), instances_per_id members each, with
// replacement only when a cluster is too small. Fully determined by the rng
// state.
BatchIndices sample_batch(const ClusterAssignment& assign_v, const ClusterAssignment& assign_i,
                          int ids_per_batch, int instances_per_id, Rng& rng,
                          TrainLog* log = nullptr);

using LabelDumpFn = std::function<void(int epoch, const EpochLabels& labels,
                                       const FeatureSet& encoded_v, const FeatureSet& encoded_i)>;

// Epoch loop: encode, cluster per modality, match clusters across modalities,
// build calibrated labels and weights (gated by mode), then SGD steps against
// the prototype banks with per-query momentum updates. Labels, weights and the
// cross-modal map are frozen within an epoch.
std::pair<Encoder, TrainLog> train(const FeatureSet& set_v, const FeatureSet& set_i,
                                   const TrainConfig& cfg, const LabelDumpFn& label_dump = {});

}  // namespace xmc
