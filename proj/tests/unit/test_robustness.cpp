#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "spurious/error.hpp"
#include "spurious/robustness.hpp"

using namespace spurious;
using testutil::sentences;

namespace {

// Sentiment-like toy data where "spur" co-occurs with positive labels.
std::vector<LabeledSentence> toy(std::int64_t first_id, int n) {
    std::vector<LabeledSentence> out;
    for (int i = 0; i < n; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        std::string text = label > 0 ? "good fine" : "bad poor";
        if ((label > 0 && i % 10 != 0) || (label < 0 && i % 10 == 1)) text += " spur";
        if (i % 3 == 0) text += " filler";
        out.push_back(testutil::sentence(first_id + i, text, label));
    }
    return out;
}

}  // namespace

TEST_SUITE("robustness") {

TEST_CASE("groups keep the quota per side") {
    const auto s = sentences({{1, "w a"}, {1, "w b"}, {1, "w c"}, {1, "w d"}, {-1, "w e"}, {-1, "w f"}, {-1, "g"}});
    const auto g = build_groups(s, {{"w", 2.0, 1}}, 2, 1);
    REQUIRE(g.words.size() == 1);
    CHECK(g.majority.size() == 2);
    CHECK(g.minority == std::vector<std::int64_t>{4, 5});
    CHECK(g.all.size() == 4);
    for (auto id : g.majority) CHECK(id < 4);
    CHECK(std::is_sorted(g.all.begin(), g.all.end()));
    CHECK_THROWS_AS(build_groups(s, {{"w", 2.0, 1}}, 0, 1), UsageError);
}

TEST_CASE("flipping labels swaps the groups") {
    std::vector<LabeledSentence> s;
    for (int i = 0; i < 40; ++i) s.push_back(testutil::sentence(i, i % 3 ? "w x" : "w y", i % 4 ? 1 : -1));
    const std::vector<TopWord> tracked{{"w", 1.5, 1}};
    const auto a = build_groups(s, tracked, 5, 9);
    const auto b = build_groups(testutil::relabel(s), tracked, 5, 9);
    CHECK(a.majority == b.minority);
    CHECK(a.minority == b.majority);
}

TEST_CASE("a sentence belongs to its strongest tracked word") {
    const auto s = sentences({{1, "weak strong"}, {1, "weak"}, {-1, "strong"}});
    const auto g = build_groups(s, {{"weak", 1.0, 1}, {"strong", -3.0, -1}}, 10, 1);
    REQUIRE(g.words.size() == 2);
    CHECK(g.words[0].word == "strong");
    CHECK(g.words[0].minority_ids == std::vector<std::int64_t>{0});
    CHECK(g.words[0].majority_ids == std::vector<std::int64_t>{2});
    CHECK(g.words[1].majority_ids == std::vector<std::int64_t>{1});
}

TEST_CASE("absent tracked words are reported") {
    const auto s = sentences({{1, "a"}});
    const auto g = build_groups(s, {{"a", 1.0, 1}, {"zzz", 1.0, 1}}, 3, 1);
    CHECK(g.skipped == std::vector<std::string>{"zzz"});
}

TEST_CASE("predicted plans sort by probability") {
    const std::vector<std::pair<std::string, double>> p{{"a", 0.9}, {"b", 0.2}, {"c", 0.9}};
    const auto plan = make_plan(Strategy::predicted_same_domain, {nullptr, nullptr, &p}, 1);
    CHECK(plan.words == std::vector<std::string>{"a", "c", "b"});
}

TEST_CASE("oracle plan permutes exactly the spurious labels") {
    const std::vector<WordLabel> labels{{"x", WordClass::spurious, ""},
                                        {"y", WordClass::genuine, ""},
                                        {"z", WordClass::spurious, ""},
                                        {"q", WordClass::spurious, ""}};
    const auto plan = make_plan(Strategy::oracle, {nullptr, &labels, nullptr}, 4);
    CHECK(std::set<std::string>(plan.words.begin(), plan.words.end()) == std::set<std::string>{"q", "x", "z"});
    CHECK(plan.words.size() == 3);
    CHECK(plan.words == seeded_permutation({"x", "z", "q"}, 4));
}

TEST_CASE("random plan covers every top word with the shared shuffler") {
    const std::vector<TopWord> top{{"d", 3, 1}, {"b", 2, 1}, {"a", 1, -1}, {"c", 1, 1}};
    const auto plan = make_plan(Strategy::random, {&top, nullptr, nullptr}, 7);
    CHECK(plan.words.size() == top.size());
    CHECK(plan.words == seeded_permutation({"a", "b", "c", "d"}, 7));
    CHECK(plan.words == make_plan(Strategy::random, {&top, nullptr, nullptr}, 7).words);
    CHECK_THROWS_AS(make_plan(Strategy::lexicon, {&top, nullptr, nullptr}, 7), UsageError);
    CHECK_THROWS_AS(parse_strategy("clever"), UsageError);
    CHECK(parse_strategy("predicted_transfer") == Strategy::predicted_transfer);
}

TEST_CASE("curve starts at the unmodified model") {
    const auto train = toy(0, 60), test = toy(1000, 40);
    const DocTrainOptions doc{1e-3, 1000, 1e-8, {}, std::nullopt};
    const auto groups = build_groups(test, {{"spur", 2.0, 1}}, 20, 1);
    const RemovalPlan plan{Strategy::random, {"spur", "filler"}, 1};
    const auto pts = run_curve(train, test, plan, groups, {1, Removal::retrain, Metric::accuracy, doc});
    REQUIRE(pts.size() == 3);
    const auto base = evaluate_groups(train_doc(train, doc), test, groups, Metric::accuracy);
    CHECK(pts[0].majority == base.majority);
    CHECK(pts[0].minority == base.minority);
    CHECK(pts[0].all == base.all);
    CHECK(pts[1].k_removed == 1);
    CHECK(pts[1].minority >= pts[0].minority);
    const auto stepped = run_curve(train, test, plan, groups, {2, Removal::retrain, Metric::accuracy, doc});
    CHECK(stepped.size() == 2);
    CHECK(stepped[1].all == pts[2].all);
}

TEST_CASE("masking zeroes removed coefficients of one fit") {
    const auto train = toy(0, 60), test = toy(1000, 40);
    const DocTrainOptions doc{1e-3, 1000, 1e-8, {}, std::nullopt};
    const auto groups = build_groups(test, {{"spur", 2.0, 1}}, 20, 1);
    const RemovalPlan plan{Strategy::random, {"spur", "filler"}, 1};
    const auto masked = run_curve(train, test, plan, groups, {1, Removal::mask, Metric::accuracy, doc});
    const auto retrained = run_curve(train, test, plan, groups, {1, Removal::retrain, Metric::accuracy, doc});
    REQUIRE(masked.size() == 3);
    CHECK(masked[0].all == retrained[0].all);
    CHECK(masked[0].minority == retrained[0].minority);

    auto model = train_doc(train, doc);
    model.theta[*model.vocab.find("spur")] = 0.0;
    const auto expect = evaluate_groups(model, test, groups, Metric::accuracy);
    CHECK(masked[1].all == expect.all);
    CHECK(masked[1].minority == expect.minority);
    CHECK(parse_removal("mask") == Removal::mask);
    CHECK_THROWS_AS(parse_removal("zero"), UsageError);
}

TEST_CASE("auc on a single-class group is an error") {
    const auto train = toy(0, 40);
    const auto test = sentences({{1, "spur good"}, {1, "spur fine"}});
    const auto groups = build_groups(test, {{"spur", 2.0, 1}}, 5, 1);
    const auto model = train_doc(train, {});
    CHECK_THROWS_AS(evaluate_groups(model, test, groups, Metric::auc), DataError);
}

TEST_CASE("a lexicon covering the vocabulary equals the unrestricted model") {
    const auto train = toy(0, 60), test = toy(1000, 40);
    const DocTrainOptions doc{1e-3, 1000, 1e-8, {}, std::nullopt};
    const auto groups = build_groups(test, {{"spur", 2.0, 1}}, 20, 1);
    const auto model = train_doc(train, doc);
    const auto full = lexicon_baseline(train, test, groups, model.vocab.words(), Metric::accuracy, doc);
    const auto base = evaluate_groups(model, test, groups, Metric::accuracy);
    CHECK(full.all == base.all);
    CHECK(full.minority == base.minority);
    CHECK_THROWS_AS(lexicon_baseline(train, test, groups, {"nothing", "shared"}, Metric::accuracy, doc), DataError);
    std::istringstream lex("; comment\n\ngood\n#x\nfine\n");
    CHECK(parse_lexicon(lex) == std::vector<std::string>{"good", "fine"});
    CHECK_THROWS_AS(load_lexicon("/nonexistent/lexicon.txt"), DataError);
}

TEST_CASE("downsampling is deterministic") {
    const auto train = toy(0, 80), test = toy(1000, 40);
    const DocTrainOptions doc{1e-3, 1000, 1e-8, {}, std::nullopt};
    const std::vector<TopWord> tracked{{"spur", 2.0, 1}};
    const auto groups = build_groups(test, tracked, 20, 1);
    const auto a = downsample_baseline(train, test, tracked, groups, 3, Metric::accuracy, doc);
    const auto b = downsample_baseline(train, test, tracked, groups, 3, Metric::accuracy, doc);
    CHECK(a.all == b.all);
    CHECK(a.minority == b.minority);
    const auto none = sentences({{1, "spur good"}, {1, "spur fine"}, {-1, "bad"}});
    CHECK_THROWS_AS(downsample_baseline(none, test, tracked, groups, 3, Metric::accuracy, doc), DataError);
}

TEST_CASE("curve csv round-trips") {
    std::vector<CurvePoint> pts{{0, Metric::auc, 0.9, 0.6, 0.8}, {1, Metric::auc, 0.875, 0.7, 0.81}};
    const auto text = write_curve_csv("oracle", pts, Stamp{"c", 5});
    std::istringstream in(text);
    std::optional<Stamp> st;
    const auto rows = read_curve_csv(in, &st);
    CHECK(st == Stamp{"c", 5});
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].strategy == "oracle");
    CHECK(rows[1].point.k_removed == 1);
    CHECK(rows[1].point.majority == 0.875);
    CHECK(rows[1].point.minority == 0.7);
    CHECK(rows[1].point.all == 0.81);
    const std::vector<std::pair<std::string, CurvePoint>> refs{{"downsample", pts[0]}};
    CHECK(write_references_csv(refs).find("downsample,auc,") != std::string::npos);
}

}
