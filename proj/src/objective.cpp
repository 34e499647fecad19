#include "xmc/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "xmc/dataspace.hpp"

namespace xmc {

namespace {

// logits[k] = q . phi_k / tau and the stabilized log of their exp-sum.
void tempered_logits(std::span<const double> q, const PrototypeBank& bank,
                     std::vector<double>& logits, double& log_denom) {
    const int num = bank.size();
    if (static_cast<int>(q.size()) != bank.dim())
        throw std::invalid_argument("loss: query dimension mismatch");
    logits.resize(num);
    double peak = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < num; ++k) {
        logits[k] = dot(q, bank.prototypes.row(k)) / bank.temperature;
        peak = std::max(peak, logits[k]);
    }
    double acc = 0.0;
    for (int k = 0; k < num; ++k) acc += std::exp(logits[k] - peak);
    log_denom = peak + std::log(acc);
}

double nll_at(std::span<const double> q, const PrototypeBank& bank, int index) {
    if (index < 0 || index >= bank.size())
        throw std::out_of_range("loss: cluster index " + std::to_string(index) + " out of range");
    std::vector<double> logits;
    double log_denom = 0.0;
    tempered_logits(q, bank, logits, log_denom);
    return log_denom - logits[index];
}

}  // namespace

double hard_intra_loss(std::span<const double> q, const PrototypeBank& bank, int cluster_index) {
    return nll_at(q, bank, cluster_index);
}

double hard_inter_loss(std::span<const double> q, const PrototypeBank& other_bank,
                       int transformed_index) {
    return nll_at(q, other_bank, transformed_index);
}

double soft_loss(std::span<const double> q, const PrototypeBank& bank,
                 std::span<const double> soft_label) {
    if (static_cast<int>(soft_label.size()) != bank.size())
        throw std::invalid_argument("soft_loss: label length mismatch");
    std::vector<double> logits;
    double log_denom = 0.0;
    tempered_logits(q, bank, logits, log_denom);
    // -sum_k y_k (logit_k - log_denom); reduces bitwise to the hard loss for
    // a one-hot label.
    double acc = 0.0;
    for (int k = 0; k < bank.size(); ++k) acc += soft_label[k] * (log_denom - logits[k]);
    return acc;
}

namespace {

void accumulate_batch(std::span<const BatchSample> batch, const PrototypeBank& own,
                      const PrototypeBank& other, double& homo, double& heter,
                      std::vector<LossReport::PerSample>* per_sample) {
    double sum_intra = 0.0, sum_inter = 0.0;
    for (const auto& s : batch) {
        const double li = soft_loss(s.query, own, s.intra.soft);
        const double le = soft_loss(s.query, other, s.inter.soft);
        sum_intra += s.weight.intra * li;
        sum_inter += s.weight.inter * le;
        if (per_sample)
            per_sample->push_back({s.sample_id, li, le, s.weight.intra, s.weight.inter});
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    homo += sum_intra * inv;
    heter += sum_inter * inv;
}

}  // namespace

LossReport batch_objective(std::span<const BatchSample> batch_v,
                           std::span<const BatchSample> batch_i,
                           const PrototypeBank& bank_v, const PrototypeBank& bank_i,
                           double lambda, bool collect_per_sample) {
    if (batch_v.empty() || batch_i.empty())
        throw std::invalid_argument("batch_objective: empty batch");
    LossReport report;
    auto* per_sample = collect_per_sample ? &report.per_sample : nullptr;
    accumulate_batch(batch_v, bank_v, bank_i, report.homo, report.heter, per_sample);
    accumulate_batch(batch_i, bank_i, bank_v, report.homo, report.heter, per_sample);
    report.total = report.homo + lambda * report.heter;
    return report;
}

Matrix encode_rows(const Matrix& raw, const Matrix& weight) {
    if (raw.cols() != weight.rows())
        throw std::invalid_argument("encode_rows: weight shape mismatch");
    Matrix out(raw.rows(), weight.cols());
    for (int r = 0; r < raw.rows(); ++r) {
        const auto x = raw.row(r);
        auto z = out.row(r);
        for (int a = 0; a < raw.cols(); ++a) {
            const double xa = x[a];
            if (xa == 0.0) continue;
            const auto wrow = weight.row(a);
            for (int b = 0; b < weight.cols(); ++b) z[b] += xa * wrow[b];
        }
    }
    return l2_normalize(std::move(out));
}

namespace {

// Per-sample gradient accumulation. The sample contributes
// (w_intra*L_intra + lambda*w_inter*L_inter) / batch_size to the total; the
// chain runs softmax-CE -> renormalization -> linear map, with the prototype
// banks frozen.
void grad_one_side(std::span<const GradSample> batch, const Matrix& weight,
                   const PrototypeBank& own, const PrototypeBank& other, double lambda,
                   double& homo, double& heter, Matrix& grad, Matrix* encoded_out,
                   int& encode_row, std::vector<LossReport::PerSample>* per_sample) {
    const int din = weight.rows();
    const int dout = weight.cols();
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    std::vector<double> z(dout), q(dout), gq(dout), gz(dout), logits;
    double sum_intra = 0.0, sum_inter = 0.0;

    for (const auto& s : batch) {
        if (static_cast<int>(s.raw.size()) != din)
            throw std::invalid_argument("objective_gradient: raw dimension mismatch");

        std::fill(z.begin(), z.end(), 0.0);
        for (int a = 0; a < din; ++a) {
            const double xa = s.raw[a];
            if (xa == 0.0) continue;
            const auto wrow = weight.row(a);
            for (int b = 0; b < dout; ++b) z[b] += xa * wrow[b];
        }
        double norm2 = 0.0;
        for (double x : z) norm2 += x * x;
        if (norm2 == 0.0) throw std::runtime_error("objective_gradient: encoder output collapsed to zero");
        const double norm = std::sqrt(norm2);
        for (int b = 0; b < dout; ++b) q[b] = z[b] / norm;
        if (encoded_out) {
            auto dst = encoded_out->row(encode_row++);
            std::copy(q.begin(), q.end(), dst.begin());
        }

        std::fill(gq.begin(), gq.end(), 0.0);
        double li = 0.0, le = 0.0;
        // dL/dq = (scale/tau) * (softmax - y) . Phi for each context
        for (int side = 0; side < 2; ++side) {
            const PrototypeBank& bank = side == 0 ? own : other;
            const CalibratedLabel& label = side == 0 ? *s.intra : *s.inter;
            const double w_side = side == 0 ? s.weight.intra : s.weight.inter;
            const double scale = (side == 0 ? w_side : lambda * w_side) * inv_batch;

            double log_denom = 0.0;
            tempered_logits(q, bank, logits, log_denom);
            double loss = 0.0;
            for (int k = 0; k < bank.size(); ++k) loss += label.soft[k] * (log_denom - logits[k]);
            (side == 0 ? li : le) = loss;

            const double coef = scale / bank.temperature;
            for (int k = 0; k < bank.size(); ++k) {
                const double delta = std::exp(logits[k] - log_denom) - label.soft[k];
                if (delta == 0.0) continue;
                const auto phi = bank.prototypes.row(k);
                const double cd = coef * delta;
                for (int b = 0; b < dout; ++b) gq[b] += cd * phi[b];
            }
        }
        sum_intra += s.weight.intra * li;
        sum_inter += s.weight.inter * le;
        if (per_sample)
            per_sample->push_back({s.sample_id, li, le, s.weight.intra, s.weight.inter});

        // through q = z / |z|:  gz = (gq - (gq.q) q) / |z|
        double gq_dot_q = 0.0;
        for (int b = 0; b < dout; ++b) gq_dot_q += gq[b] * q[b];
        for (int b = 0; b < dout; ++b) gz[b] = (gq[b] - gq_dot_q * q[b]) / norm;

        for (int a = 0; a < din; ++a) {
            const double xa = s.raw[a];
            if (xa == 0.0) continue;
            auto grow = grad.row(a);
            for (int b = 0; b < dout; ++b) grow[b] += xa * gz[b];
        }
    }
    homo += sum_intra * inv_batch;
    heter += sum_inter * inv_batch;
}

}  // namespace

LossReport objective_gradient(std::span<const GradSample> batch_v,
                              std::span<const GradSample> batch_i,
                              const Matrix& encoder_weight,
                              const PrototypeBank& bank_v, const PrototypeBank& bank_i,
                              double lambda, Matrix& grad_out, Matrix* encoded_out) {
    if (batch_v.empty() || batch_i.empty())
        throw std::invalid_argument("objective_gradient: empty batch");

    grad_out = Matrix(encoder_weight.rows(), encoder_weight.cols(), 0.0);
    if (encoded_out)
        *encoded_out = Matrix(static_cast<int>(batch_v.size() + batch_i.size()),
                              encoder_weight.cols());

    LossReport report;
    int encode_row = 0;
    grad_one_side(batch_v, encoder_weight, bank_v, bank_i, lambda, report.homo, report.heter,
                  grad_out, encoded_out, encode_row, &report.per_sample);
    grad_one_side(batch_i, encoder_weight, bank_i, bank_v, lambda, report.homo, report.heter,
                  grad_out, encoded_out, encode_row, &report.per_sample);
    report.total = report.homo + lambda * report.heter;
    return report;
}

}  // namespace xmc
