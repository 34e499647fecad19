#include "xmc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "xmc/evaluator.hpp"
#include "xmc/matching.hpp"
#include "xmc/objective.hpp"
#include "xmc/prng.hpp"

namespace xmc::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

const std::set<std::string> kSchema = {
    // synthetic data
    "num_identities", "samples_per_identity", "dim", "spread", "offset", "fragmentation",
    "seed",
    // inputs
    "features_visible", "features_infrared", "encoder",
    // training
    "epochs", "steps_per_epoch", "ids_per_batch", "instances_per_id", "learning_rate",
    "lr_decay_every", "mu", "lambda", "w", "k", "tau", "momentum", "eps", "min_pts", "mode",
    "jitter",
    // evaluation / debugging
    "max_rank", "dump_labels"};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

Config load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot open config file " + path.string());

    Config cfg;
    cfg.dir = path.has_parent_path() ? path.parent_path() : fs::path(".");

    std::string line;
    int line_no = 0;
    std::vector<std::string> unknown;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UserError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw UserError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 'key = value'");
        if (!kSchema.count(key)) {
            unknown.push_back(key);
            continue;
        }
        if (!cfg.values.emplace(key, value).second)
            throw UserError(path.string() + ":" + std::to_string(line_no) + ": duplicate key '" +
                            key + "'");
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config key(s):";
        for (const auto& k : unknown) msg += " " + k;
        throw UserError(path.string() + ": " + msg);
    }
    return cfg;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0' || errno == ERANGE)
        throw UserError("config key '" + key + "': invalid integer '" + it->second + "'");
    return v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0' || errno == ERANGE ||
        it->second.find('-') != std::string::npos)
        throw UserError("config key '" + key + "': invalid unsigned integer '" + it->second + "'");
    return v;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0' || !std::isfinite(v))
        throw UserError("config key '" + key + "': invalid number '" + it->second + "'");
    return v;
}

fs::path Config::get_path(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw UserError("config key '" + key + "' is required");
    fs::path p(it->second);
    return p.is_absolute() ? p : dir / p;
}

SynthConfig synth_config_from(const Config& cfg) {
    SynthConfig out;
    out.num_identities = static_cast<int>(cfg.get_int("num_identities", out.num_identities));
    out.samples_per_identity =
        static_cast<int>(cfg.get_int("samples_per_identity", out.samples_per_identity));
    out.dim = static_cast<int>(cfg.get_int("dim", out.dim));
    out.intra_identity_spread = cfg.get_double("spread", out.intra_identity_spread);
    out.modality_offset_scale = cfg.get_double("offset", out.modality_offset_scale);
    out.fragmentation_rate = cfg.get_double("fragmentation", out.fragmentation_rate);
    out.seed = cfg.get_u64("seed", out.seed);
    if (out.num_identities < 1) throw UserError("config key 'num_identities' must be >= 1");
    if (out.samples_per_identity < 1) throw UserError("config key 'samples_per_identity' must be >= 1");
    if (out.dim < 2) throw UserError("config key 'dim' must be >= 2");
    if (out.intra_identity_spread < 0) throw UserError("config key 'spread' must be >= 0");
    if (out.modality_offset_scale < 0) throw UserError("config key 'offset' must be >= 0");
    if (out.fragmentation_rate < 0 || out.fragmentation_rate > 1)
        throw UserError("config key 'fragmentation' must be in [0,1]");
    return out;
}

TrainConfig train_config_from(const Config& cfg) {
    TrainConfig out;
    out.epochs = static_cast<int>(cfg.get_int("epochs", out.epochs));
    out.steps_per_epoch = static_cast<int>(cfg.get_int("steps_per_epoch", out.steps_per_epoch));
    out.ids_per_batch = static_cast<int>(cfg.get_int("ids_per_batch", out.ids_per_batch));
    out.instances_per_id = static_cast<int>(cfg.get_int("instances_per_id", out.instances_per_id));
    out.learning_rate = cfg.get_double("learning_rate", out.learning_rate);
    out.lr_decay_every = static_cast<int>(cfg.get_int("lr_decay_every", out.lr_decay_every));
    out.mu = cfg.get_double("mu", out.mu);
    out.lambda = cfg.get_double("lambda", out.lambda);
    out.w = cfg.get_double("w", out.w);
    out.k = static_cast<int>(cfg.get_int("k", out.k));
    out.tau = cfg.get_double("tau", out.tau);
    out.momentum = cfg.get_double("momentum", out.momentum);
    out.dbscan_eps = cfg.get_double("eps", out.dbscan_eps);
    out.dbscan_min_pts = static_cast<int>(cfg.get_int("min_pts", out.dbscan_min_pts));
    out.jitter = cfg.get_double("jitter", out.jitter);
    out.seed = cfg.get_u64("seed", out.seed);
    try {
        out.mode = mode_from_name(cfg.get_string("mode", "full"));
    } catch (const std::invalid_argument& e) {
        throw UserError(std::string("config key 'mode': ") + e.what());
    }
    if (out.mu < 0 || out.mu > 1) throw UserError("config key 'mu' must be in [0,1]");
    if (out.lambda < 0) throw UserError("config key 'lambda' must be >= 0");
    if (out.w < 0) throw UserError("config key 'w' must be >= 0");
    if (out.tau <= 0) throw UserError("config key 'tau' must be > 0");
    if (out.momentum < 0 || out.momentum >= 1) throw UserError("config key 'momentum' must be in [0,1)");
    if (out.dbscan_eps <= 0) throw UserError("config key 'eps' must be > 0");
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::set<std::uint64_t> seen;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) throw UserError("--seeds: empty entry in '" + text + "'");
        errno = 0;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(item.c_str(), &end, 10);
        if (end == item.c_str() || *end != '\0' || errno == ERANGE || item[0] == '-')
            throw UserError("--seeds: invalid seed '" + item + "'");
        if (!seen.insert(v).second) throw UserError("--seeds: duplicate seed " + item);
        seeds.push_back(v);
    }
    if (seeds.empty()) throw UserError("--seeds: no seeds given");
    return seeds;
}

int thread_budget(int runs) {
    int budget = 0;
    if (const char* env = std::getenv("XMC_THREADS")) {
        errno = 0;
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || errno == ERANGE || v < 1)
            throw UserError("XMC_THREADS must be a positive integer");
        budget = static_cast<int>(v);
    } else {
        budget = static_cast<int>(std::thread::hardware_concurrency());
        if (budget < 1) budget = 1;
    }
    return std::min(budget, std::max(runs, 1));
}

namespace {

FeatureSet load_features_checked(const fs::path& path) {
    try {
        return load_features(path);
    } catch (const ParseError& e) {
        throw UserError(e.what());
    }
}

struct RunOutputs {
    MetricsReport v2i;
    MetricsReport i2v;
};

// Post-training evaluation pass: cluster both modalities with the final
// encoder, rebuild the cross-modal map, and score retrieval in both
// directions.
RunOutputs evaluate_final_state(const FeatureSet& set_v, const FeatureSet& set_i,
                                const Encoder& encoder, const TrainConfig& tc, int max_rank) {
    const FeatureSet enc_v = encoder.encode(set_v);
    const FeatureSet enc_i = encoder.encode(set_i);
    const ClusterAssignment a_v = dbscan(enc_v, tc.dbscan_eps, tc.dbscan_min_pts);
    const ClusterAssignment a_i = dbscan(enc_i, tc.dbscan_eps, tc.dbscan_min_pts);
    if (a_v.num_clusters == 0 || a_i.num_clusters == 0)
        throw std::runtime_error("evaluation: a modality produced zero clusters; adjust eps/min_pts");

    const PrototypeBank bank_v = compute_prototypes(enc_v, a_v, tc.momentum, tc.tau);
    const PrototypeBank bank_i = compute_prototypes(enc_i, a_i, tc.momentum, tc.tau);
    const CrossModalMap map = build_cross_modal_map(bank_v, bank_i);

    const double ari_v = label_quality(a_v, *set_v.truth).ari;
    const double ari_i = label_quality(a_i, *set_i.truth).ari;
    const double xmatch = cross_match_accuracy(map, a_v, a_i, *set_v.truth, *set_i.truth);

    const RetrievalMetrics rm_v2i = retrieval_metrics(enc_v, enc_i, max_rank);
    const RetrievalMetrics rm_i2v = retrieval_metrics(enc_i, enc_v, max_rank);
    if (rm_v2i.skipped_queries > 0 || rm_i2v.skipped_queries > 0)
        std::cerr << "warning: " << rm_v2i.skipped_queries + rm_i2v.skipped_queries
                  << " queries had no gallery match and were skipped for mAP/mINP\n";

    const auto to_report = [&](const RetrievalMetrics& rm) {
        MetricsReport rep;
        rep.map = rm.map;
        rep.cmc1 = rm.cmc_at(1);
        rep.cmc5 = rm.cmc_at(5);
        rep.cmc10 = rm.cmc_at(10);
        rep.minp = rm.minp;
        rep.ari_v = ari_v;
        rep.ari_i = ari_i;
        rep.xmatch = xmatch;
        return rep;
    };
    return {to_report(rm_v2i), to_report(rm_i2v)};
}

ordered_json train_config_snapshot(const TrainConfig& tc) {
    // Effective values: the mode gates fold into mu and w so that replaying
    // the snapshot reproduces the run exactly.
    const bool gate_mu = tc.mode == TrainMode::Baseline || tc.mode == TrainMode::DWOnly;
    const bool weights_on = tc.mode == TrainMode::DWOnly || tc.mode == TrainMode::Full;
    ordered_json j;
    j["epochs"] = tc.epochs;
    j["steps_per_epoch"] = tc.steps_per_epoch;
    j["ids_per_batch"] = tc.ids_per_batch;
    j["instances_per_id"] = tc.instances_per_id;
    j["learning_rate"] = tc.learning_rate;
    j["lr_decay_every"] = tc.lr_decay_every;
    j["mu"] = gate_mu ? 1.0 : tc.mu;
    j["lambda"] = tc.lambda;
    j["w"] = weights_on ? tc.w : 0.0;
    j["k"] = tc.k;
    j["tau"] = tc.tau;
    j["momentum"] = tc.momentum;
    j["eps"] = tc.dbscan_eps;
    j["min_pts"] = tc.dbscan_min_pts;
    j["jitter"] = tc.jitter;
    j["seed"] = tc.seed;
    j["mode"] = mode_name(tc.mode);
    return j;
}

RunOutputs execute_run(const FeatureSet& set_v, const FeatureSet& set_i, const TrainConfig& tc,
                       const fs::path& out_dir, int max_rank, bool dump_labels,
                       const ordered_json& input_info) {
    fs::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    LabelDumpFn dump_fn;
    if (dump_labels) {
        dump_fn = [&out_dir](int epoch, const EpochLabels& labels, const FeatureSet& enc_v,
                             const FeatureSet& enc_i) {
            char name[48];
            std::snprintf(name, sizeof name, "labels_epoch_%03d.jsonl", epoch);
            std::ofstream out(out_dir / name, std::ios::binary);
            dump_epoch_labels(labels, enc_v, enc_i, out);
        };
    }

    auto [encoder, log] = train(set_v, set_i, tc, dump_fn);
    for (const auto& warning : log.warnings) std::cerr << "warning: " << warning << '\n';

    const RunOutputs outputs = evaluate_final_state(set_v, set_i, encoder, tc, max_rank);

    write_file(out_dir / "epochs.log", log.to_text());
    save_encoder(encoder, out_dir / "encoder.txt");
    write_file(out_dir / "metrics_v2i.txt", serialize_metrics(outputs.v2i));
    write_file(out_dir / "metrics_i2v.txt", serialize_metrics(outputs.i2v));

    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
    ordered_json manifest;
    manifest["command"] = "run";
    manifest["mode"] = mode_name(tc.mode);
    manifest["seed"] = tc.seed;
    manifest["inputs"] = input_info;
    manifest["config"] = train_config_snapshot(tc);
    manifest["config"]["max_rank"] = max_rank;
    manifest["outputs"] = {{"epoch_log", "epochs.log"},
                           {"encoder", "encoder.txt"},
                           {"metrics_v2i", "metrics_v2i.txt"},
                           {"metrics_i2v", "metrics_i2v.txt"}};
    manifest["duration_ms"] = elapsed.count();
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return outputs;
}

}  // namespace

int cmd_generate(const Options& opts) {
    const Config cfg = load_config(opts.config);
    const SynthConfig synth = synth_config_from(cfg);
    auto [visible, infrared] = generate_synthetic(synth);
    fs::create_directories(opts.out);
    save_features(visible, opts.out / "visible.xmc");
    save_features(infrared, opts.out / "infrared.xmc");
    std::cout << "generated " << visible.count() << "+" << infrared.count() << " samples, dim "
              << visible.dim() << ", " << synth.num_identities << " identities, seed "
              << synth.seed << "\n";
    return kExitOk;
}

int cmd_run(const Options& opts) {
    const Config cfg = load_config(opts.config);
    TrainConfig tc = train_config_from(cfg);
    if (opts.mode) tc.mode = *opts.mode;

    const fs::path path_v = cfg.get_path("features_visible");
    const fs::path path_i = cfg.get_path("features_infrared");
    const FeatureSet set_v = load_features_checked(path_v);
    const FeatureSet set_i = load_features_checked(path_i);
    if (!set_v.truth || !set_i.truth)
        throw UserError("run: feature files must carry ground-truth identities for evaluation");

    const int max_rank = static_cast<int>(cfg.get_int("max_rank", 10));
    const bool dump_labels = cfg.get_int("dump_labels", 0) != 0;

    ordered_json inputs;
    inputs["features_visible"] = path_v.string();
    inputs["features_infrared"] = path_i.string();
    const RunOutputs outputs =
        execute_run(set_v, set_i, tc, opts.out, max_rank, dump_labels, inputs);

    std::cout << "mode " << mode_name(tc.mode) << " seed " << tc.seed << ": map_v2i "
              << outputs.v2i.map << " map_i2v " << outputs.i2v.map << " xmatch "
              << outputs.v2i.xmatch << "\n";
    return kExitOk;
}

int cmd_eval(const Options& opts) {
    const Config cfg = load_config(opts.config);
    const TrainConfig tc = train_config_from(cfg);
    const FeatureSet set_v = load_features_checked(cfg.get_path("features_visible"));
    const FeatureSet set_i = load_features_checked(cfg.get_path("features_infrared"));
    if (!set_v.truth || !set_i.truth)
        throw UserError("eval: feature files must carry ground-truth identities");

    Encoder encoder;
    if (cfg.has("encoder")) {
        try {
            encoder = load_encoder(cfg.get_path("encoder"));
        } catch (const ParseError& e) {
            throw UserError(e.what());
        }
        if (encoder.weight.rows() != set_v.dim())
            throw UserError("eval: encoder input dimension does not match the feature files");
    } else {
        encoder = Encoder::identity(set_v.dim());
    }

    const int max_rank = static_cast<int>(cfg.get_int("max_rank", 10));
    const RunOutputs outputs = evaluate_final_state(set_v, set_i, encoder, tc, max_rank);
    fs::create_directories(opts.out);
    write_file(opts.out / "metrics_v2i.txt", serialize_metrics(outputs.v2i));
    write_file(opts.out / "metrics_i2v.txt", serialize_metrics(outputs.i2v));
    std::cout << "map_v2i " << outputs.v2i.map << " map_i2v " << outputs.i2v.map << "\n";
    return kExitOk;
}

namespace {

struct AblateCell {
    double map = 0.0;    // mean of the two retrieval directions
    double cmc1 = 0.0;
    double minp = 0.0;
};

struct Stats {
    double mean = 0.0;
    double stdev = 0.0;   // sample standard deviation
};

Stats stats_of(const std::vector<double>& xs) {
    Stats s;
    for (double x : xs) s.mean += x;
    s.mean /= xs.size();
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - s.mean) * (x - s.mean);
        s.stdev = std::sqrt(acc / (xs.size() - 1));
    }
    return s;
}

// Percentile bootstrap over paired per-seed gaps; fixed rng so the interval
// is reproducible.
void bootstrap_gap(const std::vector<double>& gaps, double& mean, double& lo95, double& hi95) {
    const int b_count = 10000;
    const int n = static_cast<int>(gaps.size());
    mean = stats_of(gaps).mean;
    Rng rng(9121);
    std::vector<double> means(b_count);
    for (int b = 0; b < b_count; ++b) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += gaps[rng.below(n)];
        means[b] = acc / n;
    }
    std::sort(means.begin(), means.end());
    lo95 = means[static_cast<int>(0.025 * b_count)];
    hi95 = means[static_cast<int>(0.975 * b_count) - 1];
}

}  // namespace

int cmd_ablate(const Options& opts) {
    const Config cfg = load_config(opts.config);
    if (opts.seeds.size() < 3) throw UserError("ablate: need at least 3 seeds");
    const SynthConfig synth_base = synth_config_from(cfg);
    const TrainConfig train_base = train_config_from(cfg);
    const int max_rank = static_cast<int>(cfg.get_int("max_rank", 10));

    const TrainMode modes[] = {TrainMode::Baseline, TrainMode::ULCOnly, TrainMode::DWOnly,
                               TrainMode::Full};
    const int n_seeds = static_cast<int>(opts.seeds.size());
    const int n_runs = 4 * n_seeds;

    fs::create_directories(opts.out);

    // Data first, one set per seed, shared by the four modes.
    std::vector<std::pair<FeatureSet, FeatureSet>> data;
    data.reserve(n_seeds);
    for (int s = 0; s < n_seeds; ++s) {
        SynthConfig sc = synth_base;
        sc.seed = opts.seeds[s];
        data.push_back(generate_synthetic(sc));
        const fs::path seed_dir = opts.out / ("seed" + std::to_string(opts.seeds[s]));
        fs::create_directories(seed_dir);
        save_features(data.back().first, seed_dir / "visible.xmc");
        save_features(data.back().second, seed_dir / "infrared.xmc");
    }

    std::vector<AblateCell> cells(n_runs);
    std::vector<std::string> failures(n_runs);
    std::atomic<int> cursor{0};
    const int workers = thread_budget(n_runs);

    auto worker = [&] {
        for (;;) {
            const int job = cursor.fetch_add(1);
            if (job >= n_runs) return;
            const int mode_idx = job / n_seeds;
            const int seed_idx = job % n_seeds;
            const std::uint64_t seed = opts.seeds[seed_idx];
            try {
                TrainConfig tc = train_base;
                tc.mode = modes[mode_idx];
                tc.seed = seed;
                const fs::path run_dir = opts.out / ("seed" + std::to_string(seed)) /
                                         mode_name(modes[mode_idx]);
                ordered_json inputs;
                inputs["generated_seed"] = seed;
                const RunOutputs out = execute_run(data[seed_idx].first, data[seed_idx].second,
                                                   tc, run_dir, max_rank, false, inputs);
                cells[job].map = 0.5 * (out.v2i.map + out.i2v.map);
                cells[job].cmc1 = 0.5 * (out.v2i.cmc1 + out.i2v.cmc1);
                cells[job].minp = 0.5 * (out.v2i.minp + out.i2v.minp);
            } catch (const std::exception& e) {
                failures[job] = e.what();
            }
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (int job = 0; job < n_runs; ++job)
        if (!failures[job].empty())
            throw std::runtime_error("ablate: run mode=" + std::string(mode_name(modes[job / n_seeds])) +
                                     " seed=" + std::to_string(opts.seeds[job % n_seeds]) +
                                     " failed: " + failures[job]);

    ordered_json table;
    std::ostringstream text;
    text << "# mode map_mean map_std cmc1_mean cmc1_std minp_mean minp_std (" << n_seeds
         << " seeds, mAP averaged over both retrieval directions)\n";
    std::vector<double> map_by_mode[4];
    char buf[256];
    for (int m = 0; m < 4; ++m) {
        std::vector<double> maps, cmc1s, minps;
        for (int s = 0; s < n_seeds; ++s) {
            const auto& cell = cells[m * n_seeds + s];
            maps.push_back(cell.map);
            cmc1s.push_back(cell.cmc1);
            minps.push_back(cell.minp);
        }
        map_by_mode[m] = maps;
        const Stats sm = stats_of(maps), sc = stats_of(cmc1s), sp = stats_of(minps);
        std::snprintf(buf, sizeof buf, "%-8s %.6f %.6f %.6f %.6f %.6f %.6f\n",
                      mode_name(modes[m]), sm.mean, sm.stdev, sc.mean, sc.stdev, sp.mean, sp.stdev);
        text << buf;
        ordered_json row;
        row["mode"] = mode_name(modes[m]);
        row["map"] = maps;
        row["map_mean"] = sm.mean;
        row["map_std"] = sm.stdev;
        row["cmc1_mean"] = sc.mean;
        row["cmc1_std"] = sc.stdev;
        row["minp_mean"] = sp.mean;
        row["minp_std"] = sp.stdev;
        table["modes"].push_back(row);
    }

    std::vector<double> gaps(n_seeds);
    for (int s = 0; s < n_seeds; ++s) gaps[s] = map_by_mode[3][s] - map_by_mode[0][s];
    double gap_mean = 0.0, gap_lo = 0.0, gap_hi = 0.0;
    bootstrap_gap(gaps, gap_mean, gap_lo, gap_hi);
    std::snprintf(buf, sizeof buf,
                  "full_minus_baseline_map mean %.6f lo95 %.6f hi95 %.6f (percentile bootstrap)\n",
                  gap_mean, gap_lo, gap_hi);
    text << buf;
    table["gap_full_minus_baseline"] = {{"mean", gap_mean}, {"lo95", gap_lo}, {"hi95", gap_hi}};
    table["seeds"] = opts.seeds;

    write_file(opts.out / "ablation.txt", text.str());
    write_file(opts.out / "ablation.json", table.dump(2) + "\n");
    std::cout << read_file(opts.out / "ablation.txt");
    return kExitOk;
}

}  // namespace xmc::cli
