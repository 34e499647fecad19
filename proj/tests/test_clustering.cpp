#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "xmc/clustering.hpp"

using namespace xmc;

namespace {

FeatureSet make_set(Matrix m) {
    FeatureSet set;
    set.features = l2_normalize(std::move(m));
    set.sample_ids.resize(set.features.rows());
    std::iota(set.sample_ids.begin(), set.sample_ids.end(), 0);
    return set;
}

// Three tight direction blobs on the unit sphere, well apart from each other.
FeatureSet blob_set(Rng& rng, int per_blob, int dim, double noise) {
    Matrix centers(3, dim);
    for (auto& x : centers.data()) x = rng.normal();
    centers = l2_normalize(std::move(centers));
    Matrix m(3 * per_blob, dim);
    for (int b = 0; b < 3; ++b)
        for (int s = 0; s < per_blob; ++s) {
            auto row = m.row(b * per_blob + s);
            for (int c = 0; c < dim; ++c) row[c] = centers.at(b, c) + noise * rng.normal();
        }
    return make_set(std::move(m));
}

}  // namespace

TEST_SUITE_BEGIN("clustering");

TEST_CASE("identical samples form one cluster") {
    Matrix m(5, 3);
    for (int r = 0; r < 5; ++r) m.at(r, 0) = 1.0;
    const auto a = dbscan(make_set(std::move(m)), 0.1, 5);
    CHECK(a.num_clusters == 1);
    for (int l : a.labels) CHECK(l == 0);
    CHECK(a.members[0].size() == 5);
}

TEST_CASE("mutually orthogonal rows are all noise") {
    Matrix m(4, 4);
    for (int i = 0; i < 4; ++i) m.at(i, i) = 1.0;
    const auto a = dbscan(make_set(std::move(m)), 0.5, 2);
    CHECK(a.num_clusters == 0);
    for (int l : a.labels) CHECK(l == -1);
}

TEST_CASE("separated blobs match the reference implementation") {
    Rng rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        const FeatureSet set = blob_set(rng, 20, 16, 0.05);
        const auto got = dbscan(set, 0.25, 4);
        const auto dist = [&](int i, int j) {
            return 1.0 - dot(set.features.row(i), set.features.row(j));
        };
        const auto want = oracle::dbscan(set.count(), dist, 0.25, 4);
        CHECK(oracle::same_partition(got.labels, want));
        CHECK(got.num_clusters == 3);
    }
}

TEST_CASE("row permutation only relabels the partition") {
    Rng rng(77);
    const FeatureSet set = blob_set(rng, 15, 8, 0.04);
    const int n = set.count();

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int t = 0; t < n - 1; ++t)
        std::swap(perm[t], perm[t + static_cast<int>(rng.below(n - t))]);

    FeatureSet shuffled;
    shuffled.features = Matrix(n, set.dim());
    shuffled.sample_ids.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto src = set.features.row(perm[i]);
        std::copy(src.begin(), src.end(), shuffled.features.row(i).begin());
        shuffled.sample_ids[i] = set.sample_ids[perm[i]];
    }

    const auto base = dbscan(set, 0.25, 4);
    const auto moved = dbscan(shuffled, 0.25, 4);
    std::vector<int> moved_unpermuted(n);
    for (int i = 0; i < n; ++i) moved_unpermuted[perm[i]] = moved.labels[i];
    CHECK(oracle::same_partition(base.labels, moved_unpermuted));
}

TEST_CASE("every non-outlier is eps-reachable from a core point of its cluster") {
    Rng rng(7);
    const double eps = 0.3;
    const int min_pts = 4;
    const FeatureSet set = blob_set(rng, 12, 6, 0.12);
    const auto a = dbscan(set, eps, min_pts);

    const auto count_within = [&](int i) {
        int c = 0;
        for (int j = 0; j < set.count(); ++j)
            if (1.0 - dot(set.features.row(i), set.features.row(j)) <= eps) ++c;
        return c;
    };
    for (int i = 0; i < set.count(); ++i) {
        if (a.labels[i] < 0) continue;
        bool reachable = false;
        for (int j : a.members[a.labels[i]]) {
            if (count_within(j) < min_pts) continue;
            if (1.0 - dot(set.features.row(i), set.features.row(j)) <= eps) {
                reachable = true;
                break;
            }
        }
        CHECK(reachable);
        CHECK(static_cast<int>(a.members[a.labels[i]].size()) >= min_pts);
    }
}

TEST_CASE("dbscan validates its parameters") {
    Matrix m(2, 2);
    m.at(0, 0) = m.at(1, 1) = 1.0;
    const FeatureSet set = make_set(std::move(m));
    CHECK_THROWS_AS(dbscan(set, 0.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(dbscan(set, 0.2, 0), std::invalid_argument);
}

TEST_CASE("prototype of a singleton cluster is the member itself") {
    Matrix m(3, 2);
    m.at(0, 0) = 1.0;
    m.at(1, 1) = 1.0;
    m.at(2, 0) = 1.0;
    const FeatureSet set = make_set(std::move(m));
    ClusterAssignment a;
    a.labels = {0, 1, 0};
    a.num_clusters = 2;
    a.members = {{0, 2}, {1}};
    const auto bank = compute_prototypes(set, a);
    CHECK(bank.prototypes.at(1, 0) == doctest::Approx(0.0));
    CHECK(bank.prototypes.at(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("prototype of two orthogonal members is the normalized mean") {
    Matrix m(2, 2);
    m.at(0, 0) = 1.0;
    m.at(1, 1) = 1.0;
    const FeatureSet set = make_set(std::move(m));
    ClusterAssignment a;
    a.labels = {0, 0};
    a.num_clusters = 1;
    a.members = {{0, 1}};
    const auto bank = compute_prototypes(set, a);
    const double root_half = std::sqrt(0.5);
    CHECK(bank.prototypes.at(0, 0) == doctest::Approx(root_half).epsilon(1e-12));
    CHECK(bank.prototypes.at(0, 1) == doctest::Approx(root_half).epsilon(1e-12));

    CHECK(compute_prototypes(set, a).prototypes == bank.prototypes);
}

TEST_CASE("prototypes maximize mean cosine similarity to their members") {
    Rng rng(4242);
    const FeatureSet set = blob_set(rng, 10, 8, 0.15);
    const auto a = dbscan(set, 0.4, 3);
    REQUIRE(a.num_clusters >= 1);
    const auto bank = compute_prototypes(set, a);

    for (int k = 0; k < a.num_clusters; ++k) {
        const auto mean_sim = [&](std::span<const double> candidate) {
            double acc = 0.0;
            for (int idx : a.members[k]) acc += dot(candidate, set.features.row(idx));
            return acc / a.members[k].size();
        };
        const double best = mean_sim(bank.prototypes.row(k));
        for (int trial = 0; trial < 20; ++trial) {
            Matrix perturbed(1, set.dim());
            for (int c = 0; c < set.dim(); ++c)
                perturbed.at(0, c) = bank.prototypes.at(k, c) + 0.05 * rng.normal();
            perturbed = l2_normalize(std::move(perturbed));
            CHECK(best >= mean_sim(perturbed.row(0)) - 1e-12);
        }
    }
}

TEST_CASE("momentum update follows the memory-bank rule") {
    PrototypeBank bank;
    bank.prototypes = Matrix(2, 2);
    bank.prototypes.at(0, 0) = 1.0;
    bank.prototypes.at(1, 1) = 1.0;
    const std::vector<double> q = {0.0, 1.0};

    SUBCASE("m=1 leaves the prototype untouched") {
        bank.momentum = 1.0;
        const Matrix before = bank.prototypes;
        momentum_update(bank, 0, q);
        CHECK(bank.prototypes == before);
    }
    SUBCASE("m=0 replaces the prototype with the query") {
        bank.momentum = 0.0;
        momentum_update(bank, 0, q);
        CHECK(bank.prototypes.at(0, 0) == doctest::Approx(0.0));
        CHECK(bank.prototypes.at(0, 1) == doctest::Approx(1.0));
    }
    SUBCASE("m=0.2 blends and renormalizes") {
        bank.momentum = 0.2;
        momentum_update(bank, 0, q);
        CHECK(bank.prototypes.at(0, 0) == doctest::Approx(0.2425).epsilon(1e-4));
        CHECK(bank.prototypes.at(0, 1) == doctest::Approx(0.9701).epsilon(1e-4));
        // the other row is untouched
        CHECK(bank.prototypes.at(1, 0) == 0.0);
        CHECK(bank.prototypes.at(1, 1) == 1.0);
        // norm restored
        CHECK(dot(bank.prototypes.row(0), bank.prototypes.row(0)) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("invalid index throws") {
        CHECK_THROWS_AS(momentum_update(bank, 5, q), std::out_of_range);
    }
}

TEST_SUITE_END();
