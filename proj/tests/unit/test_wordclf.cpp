#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "../oracles/oracles.hpp"
#include "spurious/error.hpp"
#include "spurious/rng.hpp"
#include "spurious/wordclf.hpp"

using namespace spurious;

namespace {

struct Data {
    std::vector<WordFeatureVector> features;
    std::vector<WordLabel> labels;
};

// Spurious words get a large ate and high similarity; `signal` scales the
// gap between the classes, 0 gives identically distributed classes.
Data make_data(std::size_t n_per_class, double signal, std::uint64_t seed) {
    Rng rng(seed);
    Data d;
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const bool spurious = i % 2 == 0;
        WordFeatureVector v;
        v.word = "w" + std::to_string(1000 + i);
        for (auto& x : v.f) x = rng.normal();
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        v.f[kDocCoef] = sign * (0.5 + std::abs(rng.normal()));
        const double shift = spurious ? signal : -signal;
        v.f[kAte] = sign * (1.0 + shift + 0.3 * rng.normal());
        v.f[kMeanSim] += shift;
        v.n_matches = 5;
        d.features.push_back(v);
        d.labels.push_back({v.word, spurious ? WordClass::spurious : WordClass::genuine, ""});
    }
    return d;
}

}  // namespace

TEST_SUITE("wordclf") {

TEST_CASE("labels csv parses notes and rejects duplicates") {
    std::istringstream in("word,label,note\nbad,spurious,actor name\ngood,genuine\n\nfun,genuine,a, b\n");
    const auto l = read_labels_csv(in);
    REQUIRE(l.size() == 3);
    CHECK(l[0].note == "actor name");
    CHECK(l[1].label == WordClass::genuine);
    CHECK(l[2].note == "a, b");
    std::istringstream again(write_labels_csv(l));
    const auto back = read_labels_csv(again);
    CHECK(back.size() == 3);
    CHECK(back[2].note == "a, b");
    std::istringstream dup("a,spurious\na,genuine\n");
    CHECK_THROWS_AS(read_labels_csv(dup), DataError);
    std::istringstream bad("a,maybe\n");
    CHECK_THROWS_AS(read_labels_csv(bad), DataError);
}

TEST_CASE("orientation flips only the signed features") {
    FeatureArray x{};
    for (std::size_t j = 0; j < kNumWordFeatures; ++j) x[j] = static_cast<double>(j + 1);
    x[kDocCoef] = -2.0;
    const auto o = orient_features(x);
    CHECK(o[kAte] == -1.0);
    CHECK(o[kWeightedAte] == -2.0);
    CHECK(o[kTop5Ate] == -3.0);
    CHECK(o[kDocCoef] == 2.0);
    CHECK(o[kMeanSim] == x[kMeanSim]);
    CHECK(o[kMaxAbsDiff] == x[kMaxAbsDiff]);
    CHECK(orient_features(o) == o);
}

TEST_CASE("separable features give a perfect ranking") {
    std::vector<FeatureArray> x;
    std::vector<int> y;
    for (int i = 0; i < 20; ++i) {
        FeatureArray r{};
        r[kMeanSim] = i < 10 ? 1.0 + 0.1 * i : -1.0 - 0.1 * i;
        r[kMaxSim] = 0.05 * i;
        r[kDocCoef] = 1.0;
        x.push_back(r);
        y.push_back(i < 10 ? 1 : -1);
    }
    const auto m = train_word_clf(x, y, {1e-3, true, 2000, 1e-9});
    std::vector<double> s;
    for (const auto& r : x) s.push_back(m.predict(r));
    CHECK(roc_auc(s, y) == 1.0);
    CHECK(m.lambda[kMeanSim] > 0);
}

TEST_CASE("the fitted model minimizes the regularized loss") {
    const auto d = make_data(15, 0.8, 7);
    const auto rows = join_labels(d.features, d.labels);
    const WordClfOptions o{0.5, true, 5000, 1e-12};
    const auto m = train_word_clf(rows.x, rows.y, o);
    std::vector<std::vector<double>> z;
    for (const auto& r : rows.x) {
        const auto t = m.scaler.transform(orient_features(r));
        z.emplace_back(t.begin(), t.end());
    }
    std::vector<double> p(m.lambda.begin(), m.lambda.end());
    p.push_back(m.bias);
    const auto g = oracle::central_difference([&](const auto& q) { return oracle::logistic_loss(z, rows.y, o.l2, q); }, p);
    for (double gi : g) CHECK(std::abs(gi) < 1e-6);
}

TEST_CASE("informative features give high cross-validated auc") {
    const auto d = make_data(40, 1.5, 3);
    const auto cv = cross_validate(d.features, d.labels, 10, 1, {});
    CHECK(cv.auc > 0.9);
    CHECK(cv.auc == doctest::Approx(oracle::auc_pairs(cv.held_out, cv.y)).epsilon(1e-12));
}

TEST_CASE("shuffled labels give chance-level auc") {
    double total = 0;
    const int reps = 10;
    for (int r = 0; r < reps; ++r) {
        auto d = make_data(50, 1.5, 100 + r);
        std::vector<WordClass> cls;
        for (const auto& l : d.labels) cls.push_back(l.label);
        Rng rng(900 + r);
        rng.shuffle(std::span(cls));
        for (std::size_t i = 0; i < cls.size(); ++i) d.labels[i].label = cls[i];
        total += cross_validate(d.features, d.labels, 10, r, {}).auc;
    }
    const double mean = total / reps;
    CHECK(mean > 0.4);
    CHECK(mean < 0.6);
}

TEST_CASE("heavy regularization predicts the class prior") {
    const auto d = make_data(10, 2.0, 5);
    const auto m = train_word_clf(d.features, d.labels, {1e12, true, 2000, 1e-12});
    for (const auto& v : d.features) CHECK(m.predict(v.f) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("transfer to the training domain reproduces in-domain scores") {
    const auto d = make_data(12, 1.0, 9);
    const auto m = train_word_clf(d.features, d.labels, {});
    const auto t = transfer(m, d.features);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == m.predict(d.features[i].f));
    std::istringstream in(write_word_model(m, Stamp{"w", 1}));
    std::optional<Stamp> st;
    const auto back = read_word_model(in, &st);
    CHECK(st == Stamp{"w", 1});
    const auto t2 = transfer(back, d.features);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t2[i] == t[i]);
}

TEST_CASE("word models with other features are rejected") {
    const auto d = make_data(5, 1.0, 1);
    auto text = write_word_model(train_word_clf(d.features, d.labels, {}));
    text.replace(text.find("max_abs_diff"), 12, "mystery_feat");
    std::istringstream in(text);
    try {
        read_word_model(in);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("feature schema mismatch") != std::string::npos);
    }
    std::istringstream junk("hello\n");
    CHECK_THROWS_AS(read_word_model(junk), DataError);
}

TEST_CASE("ranking is descending with alphabetical ties") {
    const auto r = rank_spurious({{"b", 0.5}, {"a", 0.5}, {"c", 0.9}, {"d", 0.1}});
    CHECK(r[0].first == "c");
    CHECK(r[1].first == "a");
    CHECK(r[2].first == "b");
    CHECK(r[3].first == "d");
    std::istringstream in(write_predictions(r, Stamp{"p", 3}));
    CHECK(read_predictions(in) == r);
}

TEST_CASE("negating the weights reverses the ranking") {
    const auto d = make_data(8, 1.0, 12);
    auto m = train_word_clf(d.features, d.labels, {});
    const auto a = rank_spurious(m, d.features);
    for (auto& l : m.lambda) l = -l;
    m.bias = -m.bias;
    const auto b = rank_spurious(m, d.features);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].first == b[b.size() - 1 - i].first);
}

TEST_CASE("folds are stratified and deterministic") {
    std::vector<int> y;
    for (int i = 0; i < 37; ++i) y.push_back(i < 12 ? 1 : -1);
    const auto f = assign_folds(y, 5, 4);
    CHECK(f == assign_folds(y, 5, 4));
    CHECK(f != assign_folds(y, 5, 5));
    for (int k = 0; k < 5; ++k) {
        int pos = 0, neg = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (f[i] == k) (y[i] > 0 ? pos : neg)++;
        CHECK(pos >= 2);
        CHECK(pos <= 3);
        CHECK(neg >= 5);
        CHECK(neg <= 5);
    }
    CHECK_THROWS_AS(assign_folds(y, 1, 0), UsageError);
}

TEST_CASE("held-out scores come from models that never saw the fold") {
    const auto d = make_data(10, 1.0, 21);
    const WordClfOptions o{};
    const auto cv = cross_validate(d.features, d.labels, 4, 2, o);
    const auto rows = join_labels(d.features, d.labels);
    for (int k = 0; k < 4; ++k) {
        std::vector<FeatureArray> tx;
        std::vector<int> ty;
        for (std::size_t i = 0; i < rows.y.size(); ++i)
            if (cv.fold[i] != k) {
                tx.push_back(rows.x[i]);
                ty.push_back(rows.y[i]);
            }
        const auto m = train_word_clf(tx, ty, o);
        for (std::size_t i = 0; i < rows.y.size(); ++i)
            if (cv.fold[i] == k) CHECK(cv.held_out[i] == m.predict(rows.x[i]));
    }
}

TEST_CASE("duplicating every row keeps the decision boundary") {
    const auto d = make_data(10, 1.0, 31);
    const auto rows = join_labels(d.features, d.labels);
    auto x2 = rows.x;
    auto y2 = rows.y;
    x2.insert(x2.end(), rows.x.begin(), rows.x.end());
    y2.insert(y2.end(), rows.y.begin(), rows.y.end());
    const WordClfOptions o{1.0, true, 5000, 1e-12};
    const auto a = train_word_clf(rows.x, rows.y, o);
    const auto b = train_word_clf(x2, y2, o);
    for (std::size_t j = 0; j < kNumWordFeatures; ++j) CHECK(b.lambda[j] == doctest::Approx(a.lambda[j]).epsilon(1e-6));
    CHECK(b.bias == doctest::Approx(a.bias).epsilon(1e-6));
}

TEST_CASE("training needs both classes") {
    auto d = make_data(5, 1.0, 2);
    for (auto& l : d.labels) l.label = WordClass::genuine;
    CHECK_THROWS_AS(train_word_clf(d.features, d.labels, {}), DataError);
    d = make_data(5, 1.0, 2);
    d.labels.resize(3);
    CHECK_THROWS_AS(cross_validate(d.features, d.labels, 2, 1, {}), DataError);
}

}
