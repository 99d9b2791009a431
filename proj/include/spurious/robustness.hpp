#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spurious/artifact.hpp"
#include "spurious/corpus.hpp"
#include "spurious/docmodel.hpp"
#include "spurious/metrics.hpp"
#include "spurious/wordclf.hpp"

namespace spurious {

struct GroupSpec {
    std::string word;
    int correlated_class = 1;
    std::vector<std::int64_t> majority_ids;  // label == correlated_class, contains word
    std::vector<std::int64_t> minority_ids;  // label == -correlated_class, contains word
};

struct Groups {
    std::vector<GroupSpec> words;
    std::vector<std::int64_t> majority;
    std::vector<std::int64_t> minority;
    std::vector<std::int64_t> all;
    std::vector<std::string> skipped;  // tracked words absent from the sentences
};

inline constexpr std::size_t kUnlimitedQuota = std::numeric_limits<std::size_t>::max();

// A sentence holding several tracked words belongs to the one with the
// largest |coef| (ties alphabetical). Each word then keeps up to `quota`
// majority and `quota` minority sentences, chosen by a seeded per-sentence
// priority so that flipping every label swaps the two groups exactly.
Groups build_groups(std::span<const LabeledSentence> sentences, const std::vector<TopWord>& tracked,
                    std::size_t quota, std::uint64_t seed);

enum class Strategy { oracle, lexicon, random, predicted_same_domain, predicted_transfer };

Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy s);

struct RemovalPlan {
    Strategy strategy = Strategy::random;
    std::vector<std::string> words;
    std::uint64_t seed = 0;
};

struct PlanInputs {
    const std::vector<TopWord>* top_words = nullptr;
    const std::vector<WordLabel>* labels = nullptr;
    // P(spurious) per word; order irrelevant.
    const std::vector<std::pair<std::string, double>>* predictions = nullptr;
};

// Sorts the words, then applies a seeded Fisher-Yates shuffle.
std::vector<std::string> seeded_permutation(std::vector<std::string> words, std::uint64_t seed);

// oracle: labeled spurious words in seeded random order; random: all top
// words in seeded random order; predicted_*: by P(spurious) descending.
RemovalPlan make_plan(Strategy strategy, const PlanInputs& inputs, std::uint64_t seed);

struct CurvePoint {
    std::size_t k_removed = 0;
    Metric metric = Metric::auc;
    double majority = 0.0;
    double minority = 0.0;
    double all = 0.0;
};

CurvePoint evaluate_groups(const DocModel& model, std::span<const LabeledSentence> sentences, const Groups& groups,
                           Metric metric);

enum class Removal {
    retrain,  // refit without the removed words
    mask      // fit once, then zero the removed words' coefficients
};

Removal parse_removal(std::string_view name);

struct CurveOptions {
    std::size_t step = 1;
    Removal removal = Removal::retrain;
    Metric metric = Metric::auc;
    DocTrainOptions doc;
};

// k = 0, step, 2*step, ... up to the plan length: drop the first k plan
// words (per `removal`) and evaluate each group. `test` holds the group sentences.
std::vector<CurvePoint> run_curve(std::span<const LabeledSentence> train, std::span<const LabeledSentence> test,
                                  const RemovalPlan& plan, const Groups& groups, const CurveOptions& options);

// One word per line; blank lines and lines starting with ';' or '#' are skipped.
std::vector<std::string> parse_lexicon(std::istream& in);
std::vector<std::string> load_lexicon(const std::string& path);

// Refit restricted to vocabulary words that appear in the lexicon.
CurvePoint lexicon_baseline(std::span<const LabeledSentence> train, std::span<const LabeledSentence> test,
                            const Groups& groups, const std::vector<std::string>& lexicon, Metric metric,
                            const DocTrainOptions& doc);

// Groups the training split by the tracked words, drops majority sentences
// at random until the majority is no larger than the minority, refits on
// what remains and evaluates on the test groups.
CurvePoint downsample_baseline(std::span<const LabeledSentence> train, std::span<const LabeledSentence> test,
                               const std::vector<TopWord>& tracked, const Groups& test_groups, std::uint64_t seed,
                               Metric metric, const DocTrainOptions& doc);

// CSV "strategy,k_removed,metric,majority,minority,all".
std::string write_curve_csv(std::string_view strategy, std::span<const CurvePoint> points,
                            const std::optional<Stamp>& stamp = std::nullopt);
// CSV "name,metric,all".
std::string write_references_csv(std::span<const std::pair<std::string, CurvePoint>> refs,
                                 const std::optional<Stamp>& stamp = std::nullopt);

struct CurveRow {
    std::string strategy;
    CurvePoint point;
};
std::vector<CurveRow> read_curve_csv(std::istream& in, std::optional<Stamp>* stamp = nullptr);

}  // namespace spurious
