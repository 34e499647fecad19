#include "xmc/dataspace.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "xmc/prng.hpp"

namespace xmc {

const char* modality_name(Modality m) {
    return m == Modality::Visible ? "visible" : "infrared";
}

Modality modality_from_name(const std::string& name) {
    if (name == "visible") return Modality::Visible;
    if (name == "infrared") return Modality::Infrared;
    throw ParseError("unknown modality '" + name + "'");
}

void validate(const FeatureSet& set) {
    const int n = set.count();
    const int d = set.dim();
    if (n < 1) throw std::invalid_argument("feature set: count must be >= 1");
    if (d < 2) throw std::invalid_argument("feature set: dim must be >= 2");
    if (static_cast<int>(set.sample_ids.size()) != n)
        throw std::invalid_argument("feature set: sample_ids size mismatch");
    if (set.truth && static_cast<int>(set.truth->size()) != n)
        throw std::invalid_argument("feature set: truth size mismatch");
    std::unordered_set<std::int64_t> seen;
    for (auto id : set.sample_ids)
        if (!seen.insert(id).second)
            throw std::invalid_argument("feature set: duplicate sample_id " + std::to_string(id));
    for (int r = 0; r < n; ++r) {
        const double norm = std::sqrt(dot(set.features.row(r), set.features.row(r)));
        if (std::abs(norm - 1.0) > 1e-6)
            throw std::invalid_argument("feature set: row " + std::to_string(r) +
                                        " is not unit-norm");
    }
}

Matrix l2_normalize(Matrix m) {
    for (int r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        const double norm = std::sqrt(dot(row, row));
        if (norm == 0.0)
            throw std::invalid_argument("l2_normalize: row " + std::to_string(r) +
                                        " has zero norm");
        for (auto& x : row) x /= norm;
    }
    return m;
}

namespace {

std::vector<double> random_unit(Rng& rng, int dim) {
    std::vector<double> v(dim);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            norm2 += x * x;
        }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;
    return v;
}

}  // namespace

std::pair<FeatureSet, FeatureSet> generate_synthetic(const SynthConfig& cfg) {
    if (cfg.num_identities < 1)
        throw std::invalid_argument("generate_synthetic: num_identities must be >= 1");
    if (cfg.samples_per_identity < 1)
        throw std::invalid_argument("generate_synthetic: samples_per_identity must be >= 1");
    if (cfg.dim < 2) throw std::invalid_argument("generate_synthetic: dim must be >= 2");
    if (cfg.intra_identity_spread < 0.0)
        throw std::invalid_argument("generate_synthetic: spread must be >= 0");
    if (cfg.modality_offset_scale < 0.0)
        throw std::invalid_argument("generate_synthetic: offset scale must be >= 0");
    if (cfg.fragmentation_rate < 0.0 || cfg.fragmentation_rate > 1.0)
        throw std::invalid_argument("generate_synthetic: fragmentation_rate must be in [0,1]");

    Rng rng(cfg.seed);
    const int d = cfg.dim;
    const int ids = cfg.num_identities;
    const int per = cfg.samples_per_identity;
    // spread is the RMS length of the whole perturbation vector, so the
    // per-coordinate sigma shrinks with dimension.
    const double coord_sigma = cfg.intra_identity_spread / std::sqrt(static_cast<double>(d));

    std::vector<std::vector<double>> anchors(ids), offsets(ids);
    for (int i = 0; i < ids; ++i) anchors[i] = random_unit(rng, d);
    for (int i = 0; i < ids; ++i) offsets[i] = random_unit(rng, d);

    auto make_set = [&](Modality mod) {
        FeatureSet out;
        out.modality = mod;
        out.features = Matrix(ids * per, d);
        out.sample_ids.resize(static_cast<std::size_t>(ids) * per);
        out.truth = std::vector<int>(static_cast<std::size_t>(ids) * per);
        int row = 0;
        for (int id = 0; id < ids; ++id) {
            std::vector<double> base(anchors[id]);
            if (mod == Modality::Infrared)
                for (int c = 0; c < d; ++c) base[c] += cfg.modality_offset_scale * offsets[id][c];

            const bool split = rng.uniform() < cfg.fragmentation_rate;
            std::vector<double> shift(d, 0.0);
            if (split) {
                const auto dir = random_unit(rng, d);
                const double mag = 1.5 * cfg.intra_identity_spread;
                for (int c = 0; c < d; ++c) shift[c] = mag * dir[c];
            }
            for (int s = 0; s < per; ++s) {
                auto dst = out.features.row(row);
                const double side = (split && s >= per / 2) ? -1.0 : 1.0;
                for (int c = 0; c < d; ++c)
                    dst[c] = base[c] + (split ? side * shift[c] : 0.0) + coord_sigma * rng.normal();
                out.sample_ids[row] = row;
                (*out.truth)[row] = id;
                ++row;
            }
        }
        out.features = l2_normalize(std::move(out.features));
        return out;
    };

    FeatureSet visible = make_set(Modality::Visible);
    FeatureSet infrared = make_set(Modality::Infrared);
    return {std::move(visible), std::move(infrared)};
}

void save_features(const FeatureSet& set, const std::filesystem::path& path) {
    validate(set);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "XMC1 " << modality_name(set.modality) << ' ' << set.count() << ' ' << set.dim()
        << ' ' << (set.truth ? 1 : 0) << '\n';
    char buf[40];
    for (int r = 0; r < set.count(); ++r) {
        out << set.sample_ids[r];
        if (set.truth) out << ' ' << (*set.truth)[r];
        for (int c = 0; c < set.dim(); ++c) {
            std::snprintf(buf, sizeof buf, " %.17g", set.features.at(r, c));
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

std::int64_t parse_i64(const std::string& tok, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError(what + ": invalid integer '" + tok + "'");
    return v;
}

double parse_f64(const std::string& tok, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw ParseError(what + ": invalid number '" + tok + "'");
    return v;
}

}  // namespace

FeatureSet load_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": malformed header: empty file");
    auto header = split_ws(line);
    if (header.size() != 5 || header[0] != "XMC1")
        throw ParseError(path.string() + ": malformed header: expected 'XMC1 <modality> <count> <dim> <has_truth>'");

    FeatureSet set;
    set.modality = modality_from_name(header[1]);
    const std::int64_t count = parse_i64(header[2], path.string() + ": header count");
    const std::int64_t dim = parse_i64(header[3], path.string() + ": header dim");
    const std::int64_t has_truth = parse_i64(header[4], path.string() + ": header has_truth");
    if (count < 1 || dim < 2 || (has_truth != 0 && has_truth != 1))
        throw ParseError(path.string() + ": malformed header: count >= 1, dim >= 2, has_truth in {0,1}");

    set.features = Matrix(static_cast<int>(count), static_cast<int>(dim));
    set.sample_ids.resize(count);
    if (has_truth) set.truth = std::vector<int>(count);

    const std::size_t expected = 1 + static_cast<std::size_t>(has_truth) + static_cast<std::size_t>(dim);
    for (std::int64_t r = 0; r < count; ++r) {
        if (!std::getline(in, line))
            throw ParseError(path.string() + ": row " + std::to_string(r) + ": unexpected end of file");
        const auto tokens = split_ws(line);
        if (tokens.size() != expected)
            throw ParseError(path.string() + ": row " + std::to_string(r) + ": expected " +
                             std::to_string(expected) + " fields, got " + std::to_string(tokens.size()));
        std::size_t t = 0;
        set.sample_ids[r] = parse_i64(tokens[t++], path.string() + ": row " + std::to_string(r));
        if (has_truth)
            (*set.truth)[r] = static_cast<int>(
                parse_i64(tokens[t++], path.string() + ": row " + std::to_string(r)));
        for (std::int64_t c = 0; c < dim; ++c) {
            const double v = parse_f64(tokens[t++], path.string() + ": row " + std::to_string(r));
            if (!std::isfinite(v))
                throw ParseError(path.string() + ": row " + std::to_string(r) + ": non-finite value");
            set.features.at(static_cast<int>(r), static_cast<int>(c)) = v;
        }
    }
    while (std::getline(in, line))
        if (!split_ws(line).empty())
            throw ParseError(path.string() + ": trailing data after " + std::to_string(count) + " rows");

    try {
        validate(set);
    } catch (const std::invalid_argument& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return set;
}

}  // namespace xmc
