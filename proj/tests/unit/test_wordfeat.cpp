#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "../oracles/fixture.hpp"
#include "spurious/error.hpp"
#include "spurious/rng.hpp"
#include "spurious/wordfeat.hpp"

using namespace spurious;

namespace {

oracle::FeaturizeFixture random_fixture(std::uint64_t seed, std::size_t n, std::uint32_t dim) {
    Rng rng(seed);
    oracle::FeaturizeFixture f;
    f.word = "w";
    f.theta = rng.normal();
    f.store = EmbeddingStore(dim, Provenance::external_file);
    for (std::size_t i = 0; i < n; ++i) {
        MatchRecord r;
        r.word = "w";
        r.treated_context_id = static_cast<std::int64_t>(i);
        r.matched_context_id = static_cast<std::int64_t>(1000 + i);
        r.treated_label = rng.uniform() < 0.5 ? 1 : -1;
        r.matched_label = rng.uniform() < 0.5 ? 1 : -1;
        std::vector<float> t(dim), m(dim);
        for (auto& x : t) x = static_cast<float>(rng.normal());
        for (auto& x : m) x = static_cast<float>(rng.normal());
        f.store.add(r.treated_context_id, t);
        f.store.add(r.matched_context_id, m);
        r.similarity = cosine(t, m);
        f.records.push_back(r);
    }
    return f;
}

WordFeatureVector featurize(const oracle::FeaturizeFixture& f) {
    return featurize_word(f.word, f.records, f.store, f.theta);
}

}  // namespace

TEST_SUITE("wordfeat") {

TEST_CASE("fixture features match the independent reference") {
    const auto f = oracle::load_featurize_fixture(std::string(SPURIOUS_ORACLE_DIR) + "/featurize_fixture.json");
    const auto v = featurize(f);
    CHECK(v.n_matches == 8);
    CHECK(v.has_pos_match);
    CHECK(v.has_neg_match);
    for (std::size_t j = 0; j < kNumWordFeatures; ++j) {
        INFO(kFeatureNames[j]);
        CHECK(std::abs(v.f[j] - oracle::kFeaturizeReference[j]) <= 1e-10);
    }
}

TEST_CASE("random fixtures respect the feature invariants") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto f = random_fixture(seed, 1 + seed % 17, 1 + static_cast<std::uint32_t>(seed % 9));
        const auto& x = featurize(f).f;
        CHECK(x[kMeanSim] <= x[kMaxSim]);
        CHECK(x[kTop5MeanSim] <= x[kMaxSim]);
        CHECK(x[kTop5MeanSim] >= x[kMeanSim] - 1e-12);
        CHECK(x[kTopDiff1] >= x[kTopDiff2]);
        CHECK(x[kTopDiff2] >= x[kTopDiff3]);
        CHECK(x[kTopDiff1] <= x[kMaxAbsDiff]);
        CHECK(x[kDiffNorm] >= x[kTopDiff1]);
        CHECK(x[kStdSim] >= 0.0);
        CHECK(std::abs(x[kAte]) <= 2.0);
        CHECK(std::abs(x[kWeightedAte]) <= 2.0);
        CHECK(x[kMaxSim] <= 1.0);
        CHECK(x[kMaxSim] >= -1.0);
    }
}

TEST_CASE("a single match has zero spread") {
    const auto f = random_fixture(3, 1, 4);
    const auto v = featurize(f);
    CHECK(v.f[kStdSim] == 0.0);
    CHECK(v.f[kMeanSim] == v.f[kMaxSim]);
    CHECK(v.f[kTop5MeanSim] == v.f[kMaxSim]);
    CHECK(v.f[kTop5Ate] == v.f[kAte]);
    CHECK(v.has_pos_match != v.has_neg_match);
}

TEST_CASE("missing neighbor labels give zero closest similarity") {
    auto f = random_fixture(8, 4, 3);
    for (auto& r : f.records) r.matched_label = 1;
    const auto v = featurize(f);
    CHECK(v.has_pos_match);
    CHECK_FALSE(v.has_neg_match);
    CHECK(v.f[kSimClosestNeg] == 0.0);
    CHECK(v.f[kSimClosestPos] == v.f[kMaxSim]);
}

TEST_CASE("non-positive similarities give zero weighted ate") {
    auto f = random_fixture(9, 3, 2);
    for (auto& r : f.records) r.similarity = -0.5;
    CHECK(featurize(f).f[kWeightedAte] == 0.0);
}

TEST_CASE("one-dimensional vectors leave lower diffs at zero") {
    const auto f = random_fixture(4, 5, 1);
    const auto v = featurize(f);
    CHECK(v.f[kTopDiff2] == 0.0);
    CHECK(v.f[kTopDiff3] == 0.0);
    CHECK(v.f[kDiffNorm] == doctest::Approx(v.f[kTopDiff1]));
}

TEST_CASE("record order does not matter") {
    auto f = random_fixture(21, 12, 5);
    const auto a = featurize(f);
    std::reverse(f.records.begin(), f.records.end());
    Rng rng(4);
    rng.shuffle(std::span(f.records));
    const auto b = featurize(f);
    CHECK(a.f == b.f);
}

TEST_CASE("uniformly scaled vectors keep similarity features") {
    auto f = random_fixture(33, 9, 6);
    const auto a = featurize(f);
    auto scaled = f;
    scaled.store.scale(4.0f);
    for (auto& r : scaled.records)
        r.similarity = cosine(scaled.store.get(r.treated_context_id), scaled.store.get(r.matched_context_id));
    const auto b = featurize(scaled);
    for (auto j : {kAte, kWeightedAte, kTop5Ate, kMeanSim, kTop5MeanSim, kMaxSim, kStdSim, kSimClosestPos,
                   kSimClosestNeg, kDocCoef})
        CHECK(b.f[j] == doctest::Approx(a.f[j]).epsilon(1e-6));
    CHECK(b.f[kDiffNorm] == doctest::Approx(4.0 * a.f[kDiffNorm]).epsilon(1e-6));
    CHECK(b.f[kMaxAbsDiff] == doctest::Approx(4.0 * a.f[kMaxAbsDiff]).epsilon(1e-6));
}

TEST_CASE("empty or foreign records are rejected") {
    const auto f = random_fixture(2, 3, 2);
    CHECK_THROWS_AS(featurize_word("w", std::span<const MatchRecord>{}, f.store, 1.0), DataError);
    CHECK_THROWS_AS(featurize_word("other", f.records, f.store, 1.0), DataError);
}

TEST_CASE("standardize examples") {
    std::vector<WordFeatureVector> v(2);
    v[0].f.fill(5.0);
    v[1].f.fill(5.0);
    v[0].f[kAte] = 0.0;
    v[1].f[kAte] = 2.0;
    const auto s = standardize(v);
    CHECK(s.rows[0][kAte] == -1.0);
    CHECK(s.rows[1][kAte] == 1.0);
    CHECK(s.rows[0][kMeanSim] == 0.0);
    CHECK(s.scaler.mean[kAte] == 1.0);
    CHECK(s.scaler.stddev[kAte] == 1.0);
    CHECK_THROWS_AS(standardize(std::span(v).first(1)), DataError);
}

TEST_CASE("standardized columns have zero mean and unit spread") {
    std::vector<WordFeatureVector> v;
    for (std::uint64_t s = 1; s <= 30; ++s) v.push_back(featurize(random_fixture(s, 6, 4)));
    const auto st = standardize(v);
    for (std::size_t j = 0; j < kNumWordFeatures; ++j) {
        double m = 0, q = 0;
        for (const auto& r : st.rows) m += r[j];
        m /= static_cast<double>(st.rows.size());
        for (const auto& r : st.rows) q += (r[j] - m) * (r[j] - m);
        CHECK(std::abs(m) < 1e-12);
        CHECK(std::sqrt(q / static_cast<double>(st.rows.size())) == doctest::Approx(1.0));
    }
}

TEST_CASE("feature table and scaler round-trip") {
    std::vector<WordFeatureVector> v;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        auto x = featurize(random_fixture(s, 4, 3));
        x.word = "w" + std::to_string(s);
        v.push_back(x);
    }
    const auto text = write_features_csv(v, Stamp{"f", 9});
    std::istringstream in(text);
    std::optional<Stamp> st;
    const auto back = read_features_csv(in, &st);
    CHECK(st == Stamp{"f", 9});
    REQUIRE(back.size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(back[i].word == v[i].word);
        CHECK(back[i].f == v[i].f);
        CHECK(back[i].n_matches == v[i].n_matches);
    }
    const auto sc = standardize(v).scaler;
    std::istringstream sin(write_scaler(sc));
    const auto sb = read_scaler(sin);
    CHECK(sb.mean == sc.mean);
    CHECK(sb.stddev == sc.stddev);
    std::istringstream bad("word,ate\nx,1\n");
    CHECK_THROWS_AS(read_features_csv(bad), DataError);
}

}
