#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "xmc/clustering.hpp"
#include "xmc/dataspace.hpp"

using namespace xmc;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / (std::string("xmc_test_") + name);
}

}  // namespace

TEST_SUITE_BEGIN("dataspace");

TEST_CASE("l2_normalize by hand") {
    Matrix m(1, 2);
    m.at(0, 0) = 3.0;
    m.at(0, 1) = 4.0;
    const Matrix n = l2_normalize(m);
    CHECK(n.at(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(n.at(0, 1) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("l2_normalize keeps an exact unit row unchanged") {
    Matrix m(2, 3);
    m.at(0, 0) = 1.0;
    m.at(1, 2) = -1.0;
    const Matrix n = l2_normalize(m);
    CHECK(n.at(0, 0) == 1.0);
    CHECK(n.at(0, 1) == 0.0);
    CHECK(n.at(1, 2) == -1.0);
}

TEST_CASE("l2_normalize rejects a zero row naming its index") {
    Matrix m(2, 2);
    m.at(0, 0) = 1.0;
    CHECK_THROWS_WITH_AS(l2_normalize(m), doctest::Contains("row 1"), std::invalid_argument);
}

TEST_CASE("generator is deterministic") {
    SynthConfig cfg;
    cfg.num_identities = 5;
    cfg.samples_per_identity = 4;
    cfg.dim = 16;
    cfg.seed = 7;
    const auto a = generate_synthetic(cfg);
    const auto b = generate_synthetic(cfg);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);

    cfg.seed = 8;
    const auto c = generate_synthetic(cfg);
    CHECK(a.first.features != c.first.features);
}

TEST_CASE("zero-noise config collapses each identity to one point") {
    SynthConfig cfg;
    cfg.num_identities = 6;
    cfg.samples_per_identity = 5;
    cfg.dim = 8;
    cfg.intra_identity_spread = 0.0;
    cfg.modality_offset_scale = 0.0;
    cfg.fragmentation_rate = 0.0;
    cfg.seed = 3;
    const auto [vis, inf] = generate_synthetic(cfg);

    for (const FeatureSet* set : {&vis, &inf}) {
        std::set<std::vector<double>> distinct;
        for (int r = 0; r < set->count(); ++r)
            distinct.emplace(set->features.row(r).begin(), set->features.row(r).end());
        CHECK(distinct.size() == 6);
    }
    // identical unit vectors across modalities too (offset is zero)
    CHECK(vis.features == inf.features);
}

TEST_CASE("well-separated identities are fully recovered by clustering") {
    SynthConfig cfg;
    cfg.num_identities = 10;
    cfg.samples_per_identity = 20;
    cfg.dim = 64;
    cfg.intra_identity_spread = 0.1;
    cfg.modality_offset_scale = 0.3;
    cfg.fragmentation_rate = 0.0;
    cfg.seed = 11;
    const auto [vis, inf] = generate_synthetic(cfg);

    for (const FeatureSet* set : {&vis, &inf}) {
        const auto dist = [&](int i, int j) {
            return 1.0 - dot(set->features.row(i), set->features.row(j));
        };
        const auto labels = oracle::dbscan(set->count(), dist, 0.3, 4);
        std::set<int> clusters;
        for (int l : labels) {
            CHECK(l >= 0);
            clusters.insert(l);
        }
        CHECK(clusters.size() >= 10);
        CHECK(oracle::ari_pairs(labels, *set->truth) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("generator rejects bad configs") {
    SynthConfig cfg;
    cfg.dim = 1;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
    cfg.dim = 8;
    cfg.num_identities = 0;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
    cfg.num_identities = 2;
    cfg.fragmentation_rate = 1.5;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
}

TEST_CASE("save/load round-trip is exact") {
    SynthConfig cfg;
    cfg.num_identities = 4;
    cfg.samples_per_identity = 3;
    cfg.dim = 7;
    cfg.seed = 19;
    auto [vis, inf] = generate_synthetic(cfg);

    const auto path = temp_file("roundtrip.xmc");
    save_features(vis, path);
    CHECK(load_features(path) == vis);

    vis.truth.reset();
    save_features(vis, path);
    CHECK(load_features(path) == vis);
    fs::remove(path);
}

TEST_CASE("handwritten file loads with unit norms") {
    const auto path = temp_file("hand.xmc");
    std::ofstream(path) << "XMC1 visible 3 2 0\n0 1 0\n1 0 1\n2 0.6 0.8\n";
    const FeatureSet set = load_features(path);
    CHECK(set.count() == 3);
    for (int r = 0; r < 3; ++r)
        CHECK(std::sqrt(dot(set.features.row(r), set.features.row(r))) ==
              doctest::Approx(1.0).epsilon(1e-6));
    fs::remove(path);
}

TEST_CASE("parse errors are specific") {
    const auto path = temp_file("bad.xmc");

    std::ofstream(path) << "XMC0 visible 1 2 0\n0 1 0\n";
    CHECK_THROWS_WITH_AS(load_features(path), doctest::Contains("malformed header"), ParseError);

    std::ofstream(path) << "XMC1 visible 2 2 0\n0 1 0\n1 0\n";
    CHECK_THROWS_WITH_AS(load_features(path), doctest::Contains("row 1"), ParseError);

    std::ofstream(path) << "XMC1 visible 2 2 0\n0 1 0\n1 nan 1\n";
    CHECK_THROWS_WITH_AS(load_features(path), doctest::Contains("non-finite"), ParseError);

    std::ofstream(path) << "XMC1 visible 2 2 0\n0 1 0\n0 0 1\n";
    CHECK_THROWS_WITH_AS(load_features(path), doctest::Contains("duplicate"), ParseError);

    std::ofstream(path) << "XMC1 visible 2 2 0\n0 1 0\n1 0.5 0.5\n";
    CHECK_THROWS_WITH_AS(load_features(path), doctest::Contains("unit-norm"), ParseError);

    std::ofstream(path) << "XMC1 visible 1 2 0\n0 1 0\n1 0 1\n";
    CHECK_THROWS_WITH_AS(load_features(path), doctest::Contains("trailing"), ParseError);
    fs::remove(path);
}

TEST_SUITE_END();
