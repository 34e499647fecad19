#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xmc/clustering.hpp"
#include "xmc/labeling.hpp"
#include "xmc/matrix.hpp"

namespace xmc {

struct LossReport {
    double homo = 0.0;
    double heter = 0.0;
    double total = 0.0;   // homo + lambda * heter

    struct PerSample {
        std::int64_t sample_id = 0;
        double intra_loss = 0.0;   // unweighted
        double inter_loss = 0.0;
        double weight_intra = 1.0;
        double weight_inter = 1.0;
    };
    std::vector<PerSample> per_sample;
};

// -log softmax_tau(q . Phi^T)[cluster_index] against the sample's own bank.
// Log-sum-exp stabilized; tau = 0.05 puts exponents around +-20.
double hard_intra_loss(std::span<const double> q, const PrototypeBank& bank, int cluster_index);

// Same form against the other modality's bank at the transformed index.
double hard_inter_loss(std::span<const double> q, const PrototypeBank& other_bank,
                       int transformed_index);

// Cross-entropy between a soft label and the tempered softmax over the bank.
// Reduces exactly to the hard loss when the label is one-hot.
double soft_loss(std::span<const double> q, const PrototypeBank& bank,
                 std::span<const double> soft_label);

// One encoded sample plus its epoch labels, ready for the batch objective.
struct BatchSample {
    std::int64_t sample_id = 0;
    std::vector<double> query;   // encoded, unit-norm
    CalibratedLabel intra;
    CalibratedLabel inter;
    SampleWeight weight;
};

// homo  = mean_v(w_intra * L_intra) + mean_i(w_intra * L_intra)
// heter = mean_v(w_inter * L_inter) + mean_i(w_inter * L_inter)
// total = homo + lambda * heter
// Each modality batch contributes under its own batch mean.
LossReport batch_objective(std::span<const BatchSample> batch_v,
                           std::span<const BatchSample> batch_i,
                           const PrototypeBank& bank_v, const PrototypeBank& bank_i,
                           double lambda, bool collect_per_sample = false);

// Forward map of the desk-scale encoder: row-normalize(raw * weight).
Matrix encode_rows(const Matrix& raw, const Matrix& weight);

// One raw sample routed through the encoder inside the objective.
struct GradSample {
    std::int64_t sample_id = 0;
    std::span<const double> raw;   // dim_in
    const CalibratedLabel* intra = nullptr;
    const CalibratedLabel* inter = nullptr;
    SampleWeight weight;
};

// Analytic gradient of the batch objective with respect to the encoder weight
// matrix, prototypes held constant (memory-bank convention: no gradient flows
// into the banks). Returns the same report batch_objective would produce.
// encoded_out, when given, receives the per-sample encoded queries in batch
// order (visible rows first).
LossReport objective_gradient(std::span<const GradSample> batch_v,
                              std::span<const GradSample> batch_i,
                              const Matrix& encoder_weight,
                              const PrototypeBank& bank_v, const PrototypeBank& bank_i,
                              double lambda, Matrix& grad_out,
                              Matrix* encoded_out = nullptr);

}  // namespace xmc
