#include "xmc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "xmc/evaluator.hpp"
#include "xmc/matching.hpp"
#include "xmc/objective.hpp"

namespace xmc {

const char* mode_name(TrainMode mode) {
    switch (mode) {
        case TrainMode::Baseline: return "baseline";
        case TrainMode::ULCOnly: return "ulc";
        case TrainMode::DWOnly: return "dw";
        case TrainMode::Full: return "full";
    }
    return "full";
}

TrainMode mode_from_name(const std::string& name) {
    if (name == "baseline") return TrainMode::Baseline;
    if (name == "ulc") return TrainMode::ULCOnly;
    if (name == "dw") return TrainMode::DWOnly;
    if (name == "full") return TrainMode::Full;
    throw std::invalid_argument("unknown mode '" + name + "' (expected baseline|ulc|dw|full)");
}

Encoder Encoder::identity(int dim) {
    Encoder enc;
    enc.weight = Matrix(dim, dim, 0.0);
    for (int i = 0; i < dim; ++i) enc.weight.at(i, i) = 1.0;
    return enc;
}

FeatureSet Encoder::encode(const FeatureSet& set) const {
    FeatureSet out;
    out.modality = set.modality;
    out.features = encode_rows(set.features, weight);
    out.sample_ids = set.sample_ids;
    out.truth = set.truth;
    return out;
}

void save_encoder(const Encoder& encoder, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "XMCENC1 " << encoder.weight.rows() << ' ' << encoder.weight.cols() << '\n';
    char buf[40];
    for (int r = 0; r < encoder.weight.rows(); ++r) {
        for (int c = 0; c < encoder.weight.cols(); ++c) {
            std::snprintf(buf, sizeof buf, c ? " %.17g" : "%.17g", encoder.weight.at(r, c));
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

Encoder load_encoder(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string magic;
    int rows = 0, cols = 0;
    if (!(in >> magic >> rows >> cols) || magic != "XMCENC1" || rows < 1 || cols < 1)
        throw ParseError(path.string() + ": malformed encoder header");
    Encoder enc;
    enc.weight = Matrix(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (!(in >> enc.weight.at(r, c)))
                throw ParseError(path.string() + ": truncated encoder matrix at row " +
                                 std::to_string(r));
    return enc;
}

std::string format_epoch_record(const EpochRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "epoch=%03d homo=%.9f heter=%.9f total=%.9f K=%d L=%d matched=%d "
                  "ari_v=%.6f ari_i=%.6f xmatch=%.6f",
                  r.epoch, r.homo, r.heter, r.total, r.clusters_visible, r.clusters_infrared,
                  r.matched_pairs, r.ari_visible, r.ari_infrared, r.cross_match);
    return buf;
}

std::string TrainLog::to_text() const {
    std::string out;
    for (const auto& r : epochs) {
        out += format_epoch_record(r);
        out += '\n';
    }
    return out;
}

namespace {

void draw_side(const ClusterAssignment& assign, const char* side_name, int ids_per_batch,
               int instances_per_id, Rng& rng, TrainLog* log, std::vector<int>& out) {
    const int available = assign.num_clusters;
    if (available < 1) throw std::invalid_argument("sample_batch: assignment has no clusters");
    int use = ids_per_batch;
    if (available < ids_per_batch) {
        use = available;
        if (log) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%s: only %d clusters available, clamping ids_per_batch from %d",
                          side_name, available, ids_per_batch);
            log->warnings.emplace_back(buf);
        }
    }

    std::vector<int> clusters(available);
    std::iota(clusters.begin(), clusters.end(), 0);
    for (int t = 0; t < use; ++t)
        std::swap(clusters[t], clusters[t + static_cast<int>(rng.below(available - t))]);
    clusters.resize(use);

    for (int cid : clusters) {
        const auto& members = assign.members[cid];
        const int m = static_cast<int>(members.size());
        if (m >= instances_per_id) {
            std::vector<int> pick(members);
            for (int t = 0; t < instances_per_id; ++t)
                std::swap(pick[t], pick[t + static_cast<int>(rng.below(m - t))]);
            out.insert(out.end(), pick.begin(), pick.begin() + instances_per_id);
        } else {
            for (int t = 0; t < instances_per_id; ++t)
                out.push_back(members[rng.below(m)]);
        }
    }
}

}  // namespace

BatchIndices sample_batch(const ClusterAssignment& assign_v, const ClusterAssignment& assign_i,
                          int ids_per_batch, int instances_per_id, Rng& rng, TrainLog* log) {
    if (ids_per_batch < 1 || instances_per_id < 1)
        throw std::invalid_argument("sample_batch: batch shape must be positive");
    BatchIndices batch;
    draw_side(assign_v, "visible", ids_per_batch, instances_per_id, rng, log, batch.visible);
    draw_side(assign_i, "infrared", ids_per_batch, instances_per_id, rng, log, batch.infrared);
    return batch;
}

namespace {

void check_config(const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (cfg.steps_per_epoch < 1) throw std::invalid_argument("train: steps_per_epoch must be >= 1");
    if (cfg.ids_per_batch < 1 || cfg.instances_per_id < 1)
        throw std::invalid_argument("train: batch shape must be positive");
    if (cfg.learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be > 0");
    if (cfg.mu < 0.0 || cfg.mu > 1.0) throw std::invalid_argument("train: mu must be in [0,1]");
    if (cfg.lambda < 0.0) throw std::invalid_argument("train: lambda must be >= 0");
    if (cfg.w < 0.0) throw std::invalid_argument("train: w must be >= 0");
    if (cfg.k < 1) throw std::invalid_argument("train: k must be >= 1");
    if (cfg.tau <= 0.0) throw std::invalid_argument("train: tau must be > 0");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
        throw std::invalid_argument("train: momentum must be in [0,1)");
    if (cfg.dbscan_eps <= 0.0) throw std::invalid_argument("train: eps must be > 0");
    if (cfg.dbscan_min_pts < 1) throw std::invalid_argument("train: min_pts must be >= 1");
    if (cfg.jitter < 0.0) throw std::invalid_argument("train: jitter must be >= 0");
}

struct SideState {
    const FeatureSet* raw = nullptr;
    FeatureSet encoded;
    ClusterAssignment assign;
    PrototypeBank bank;
    std::vector<int> label_of_row;   // row -> index into the epoch label list, -1 for outliers
};

}  // namespace

std::pair<Encoder, TrainLog> train(const FeatureSet& set_v, const FeatureSet& set_i,
                                   const TrainConfig& cfg, const LabelDumpFn& label_dump) {
    check_config(cfg);
    if (set_v.dim() != set_i.dim()) throw std::invalid_argument("train: dimension mismatch");

    const bool gate_mu = cfg.mode == TrainMode::Baseline || cfg.mode == TrainMode::DWOnly;
    const bool weights_on = cfg.mode == TrainMode::DWOnly || cfg.mode == TrainMode::Full;
    const double effective_mu = gate_mu ? 1.0 : cfg.mu;

    const int dim = set_v.dim();
    Encoder encoder = Encoder::identity(dim);
    Rng rng(cfg.seed);
    TrainLog log;
    double lr = cfg.learning_rate;
    const double jitter_sigma = cfg.jitter / std::sqrt(static_cast<double>(dim));

    SideState sv, si;
    sv.raw = &set_v;
    si.raw = &set_i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (epoch > 0 && cfg.lr_decay_every > 0 && epoch % cfg.lr_decay_every == 0) lr *= 0.1;

        for (SideState* side : {&sv, &si}) {
            side->encoded = encoder.encode(*side->raw);
            side->assign = dbscan(side->encoded, cfg.dbscan_eps, cfg.dbscan_min_pts);
            if (side->assign.num_clusters == 0)
                throw std::runtime_error("train: epoch " + std::to_string(epoch) + ": " +
                                         modality_name(side->raw->modality) +
                                         " modality produced zero clusters; adjust eps/min_pts");
            side->bank = compute_prototypes(side->encoded, side->assign, cfg.momentum, cfg.tau);
        }

        CrossModalMap map = build_cross_modal_map(sv.bank, si.bank);
        EpochLabels labels = build_epoch_labels(sv.encoded, si.encoded, sv.assign, si.assign,
                                                map, cfg.k, effective_mu, cfg.w);
        if (!weights_on) {
            for (auto* side : {&labels.visible, &labels.infrared})
                for (auto& rec : *side) rec.weight = SampleWeight{1.0, 1.0};
        }
        if (label_dump) label_dump(epoch, labels, sv.encoded, si.encoded);

        for (auto [side, list] : {std::pair{&sv, &labels.visible}, std::pair{&si, &labels.infrared}}) {
            side->label_of_row.assign(side->raw->count(), -1);
            for (std::size_t t = 0; t < list->size(); ++t)
                side->label_of_row[(*list)[t].sample_index] = static_cast<int>(t);
        }

        EpochRecord record;
        record.epoch = epoch;
        record.clusters_visible = sv.assign.num_clusters;
        record.clusters_infrared = si.assign.num_clusters;
        int matched = 0;
        for (double x : map.match.data()) matched += x != 0.0;
        record.matched_pairs = matched;
        if (set_v.truth && set_i.truth) {
            record.ari_visible = label_quality(sv.assign, *set_v.truth).ari;
            record.ari_infrared = label_quality(si.assign, *set_i.truth).ari;
            record.cross_match =
                cross_match_accuracy(map, sv.assign, si.assign, *set_v.truth, *set_i.truth);
        }

        double sum_homo = 0.0, sum_heter = 0.0, sum_total = 0.0;
        Matrix raw_batch_v, raw_batch_i, grad, encoded_batch;
        for (int step = 0; step < cfg.steps_per_epoch; ++step) {
            const BatchIndices batch = sample_batch(sv.assign, si.assign, cfg.ids_per_batch,
                                                    cfg.instances_per_id, rng,
                                                    step == 0 ? &log : nullptr);

            auto stage = [&](const std::vector<int>& rows, const SideState& side,
                             const std::vector<SampleLabeling>& list, Matrix& raw_batch,
                             std::vector<GradSample>& out) {
                raw_batch = Matrix(static_cast<int>(rows.size()), dim);
                out.clear();
                out.reserve(rows.size());
                for (std::size_t t = 0; t < rows.size(); ++t) {
                    const int row = rows[t];
                    auto dst = raw_batch.row(static_cast<int>(t));
                    const auto src = side.raw->features.row(row);
                    std::copy(src.begin(), src.end(), dst.begin());
                    if (jitter_sigma > 0.0)
                        for (auto& x : dst) x += jitter_sigma * rng.normal();
                    const auto& rec = list[side.label_of_row[row]];
                    GradSample g;
                    g.sample_id = side.raw->sample_ids[row];
                    g.raw = raw_batch.row(static_cast<int>(t));
                    g.intra = &rec.intra;
                    g.inter = &rec.inter;
                    g.weight = rec.weight;
                    out.push_back(g);
                }
            };

            std::vector<GradSample> grad_v, grad_i;
            stage(batch.visible, sv, labels.visible, raw_batch_v, grad_v);
            stage(batch.infrared, si, labels.infrared, raw_batch_i, grad_i);

            const LossReport report = objective_gradient(grad_v, grad_i, encoder.weight, sv.bank,
                                                         si.bank, cfg.lambda, grad, &encoded_batch);
            for (std::size_t t = 0; t < encoder.weight.data().size(); ++t)
                encoder.weight.data()[t] -= lr * grad.data()[t];

            // Momentum-refresh each query's own-modality prototype with the
            // feature that just went through the loss, visible side first.
            int enc_row = 0;
            for (auto [rows, side] : {std::pair{&batch.visible, &sv}, std::pair{&batch.infrared, &si}}) {
                const auto& list = side == &sv ? labels.visible : labels.infrared;
                for (int row : *rows) {
                    const auto& rec = list[side->label_of_row[row]];
                    momentum_update(side->bank, rec.intra.hard_index, encoded_batch.row(enc_row));
                    ++enc_row;
                }
            }

            sum_homo += report.homo;
            sum_heter += report.heter;
            sum_total += report.total;
        }

        const double inv_steps = 1.0 / cfg.steps_per_epoch;
        record.homo = sum_homo * inv_steps;
        record.heter = sum_heter * inv_steps;
        record.total = sum_total * inv_steps;
        log.epochs.push_back(record);
    }

    return {std::move(encoder), std::move(log)};
}

}  // namespace xmc
