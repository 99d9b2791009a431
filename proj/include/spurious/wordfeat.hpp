#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spurious/artifact.hpp"
#include "spurious/contexts.hpp"
#include "spurious/matcher.hpp"

namespace spurious {

inline constexpr std::size_t kNumWordFeatures = 15;
using FeatureArray = std::array<double, kNumWordFeatures>;

// Column names in CSV order (after "word").
extern const std::array<std::string_view, kNumWordFeatures> kFeatureNames;

// Feature indices.
enum Feature : std::size_t {
    kAte = 0,
    kWeightedAte,
    kTop5Ate,
    kMeanSim,
    kTop5MeanSim,
    kMaxSim,
    kStdSim,
    kSimClosestPos,
    kSimClosestNeg,
    kDocCoef,
    kDiffNorm,
    kTopDiff1,
    kTopDiff2,
    kTopDiff3,
    kMaxAbsDiff,
};

struct WordFeatureVector {
    std::string word;
    FeatureArray f{};
    std::size_t n_matches = 0;
    bool has_pos_match = false;  // sim_closest_pos is 0 when false
    bool has_neg_match = false;  // sim_closest_neg is 0 when false
};

// Summary of one word's matches. Records are put in treated-context order
// first, so the result does not depend on the order they are passed in.
//   ate            mean of (y_s - y_s*)
//   weighted_ate   same, weighted by max(similarity, 0); 0 if all weights are 0
//   top5_ate       ate over the 5 most similar matches (ties: lower treated id)
//   mean_sim, top5_mean_sim, max_sim, std_sim (population)
//   sim_closest_pos / neg   best similarity among matches labeled +1 / -1
//   doc_coef       theta_w from the document classifier
//   with delta = mean over records of (treated vector - matched vector):
//   diff_norm      |delta|_2
//   top_diff_1..3  the three largest |delta_i|, descending
//   max_abs_diff   largest |treated_i - matched_i| over all records and dimensions
WordFeatureVector featurize_word(const std::string& word, std::span<const MatchRecord> records,
                                 const EmbeddingStore& store, double theta_w);

// Per-feature z-scoring with population statistics. Features whose std is
// below 1e-12 map to 0.
struct Scaler {
    FeatureArray mean{};
    FeatureArray stddev{};

    FeatureArray transform(const FeatureArray& x) const;
};

inline constexpr double kDegenerateStd = 1e-12;

Scaler fit_scaler(std::span<const FeatureArray> rows);

struct Standardized {
    std::vector<FeatureArray> rows;
    Scaler scaler;
};

// Throws DataError with fewer than two vectors.
Standardized standardize(std::span<const WordFeatureVector> vectors);

std::string write_features_csv(std::span<const WordFeatureVector> vectors,
                               const std::optional<Stamp>& stamp = std::nullopt);
std::vector<WordFeatureVector> read_features_csv(std::istream& in, std::optional<Stamp>* stamp = nullptr);

std::string write_scaler(const Scaler& scaler);
Scaler read_scaler(std::istream& in);

}  // namespace spurious
