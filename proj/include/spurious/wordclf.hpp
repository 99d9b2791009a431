#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spurious/wordfeat.hpp"

namespace spurious {

enum class WordClass { spurious, genuine };

WordClass parse_word_class(std::string_view s);
std::string_view to_string(WordClass c);

struct WordLabel {
    std::string word;
    WordClass label = WordClass::genuine;
    std::string note;
};

// CSV "word,label[,note]". A word may appear once.
std::vector<WordLabel> read_labels_csv(std::istream& in);
std::string write_labels_csv(std::span<const WordLabel> labels);
std::string format_label_row(const WordLabel& label);

struct WordClfOptions {
    double l2 = 1.0;
    // Multiply ate, weighted_ate, top5_ate and doc_coef by sign(doc_coef) so
    // words correlated with either class share one feature orientation.
    bool orient = true;
    int max_iter = 2000;
    double tol = 1e-9;
};

FeatureArray orient_features(const FeatureArray& raw);

// h(w) = sigmoid(<lambda, scale(orient(x))> + bias), spurious is the positive class.
struct WordClassifierModel {
    FeatureArray lambda{};
    double bias = 0.0;
    Scaler scaler;
    double l2 = 1.0;
    bool orient = true;

    double predict(const FeatureArray& raw) const;
};

// Rows of `features` with a label, in feature-table order. y = +1 for spurious.
struct LabeledRows {
    std::vector<std::string> words;
    std::vector<FeatureArray> x;
    std::vector<int> y;
};
LabeledRows join_labels(std::span<const WordFeatureVector> features, std::span<const WordLabel> labels);

// Fits the scaler on `x` (after orientation) and then the logistic model.
// Throws DataError unless both classes are present.
WordClassifierModel train_word_clf(std::span<const FeatureArray> x, std::span<const int> y,
                                   const WordClfOptions& options);
WordClassifierModel train_word_clf(std::span<const WordFeatureVector> features, std::span<const WordLabel> labels,
                                   const WordClfOptions& options);

struct CvResult {
    double auc = 0.0;  // pooled over all held-out predictions
    std::vector<std::string> words;
    std::vector<int> y;
    std::vector<int> fold;
    std::vector<double> held_out;  // P(spurious) from the fold that held the word out
    // Pooled AUC restricted to words whose doc_coef is positive / negative,
    // when both word classes occur there.
    std::optional<double> auc_positive_words;
    std::optional<double> auc_negative_words;
};

// Stratified k-fold CV; the scaler is refit on each fold's training rows.
CvResult cross_validate(std::span<const WordFeatureVector> features, std::span<const WordLabel> labels, int k,
                        std::uint64_t seed, const WordClfOptions& options);

// Stratified fold index per row, deterministic under seed.
std::vector<int> assign_folds(std::span<const int> y, int k, std::uint64_t seed);

// P(spurious) for each vector, standardized with the model's own scaler.
std::vector<double> transfer(const WordClassifierModel& model, std::span<const WordFeatureVector> features);

// Words by P(spurious) descending, ties alphabetical.
std::vector<std::pair<std::string, double>> rank_spurious(std::vector<std::pair<std::string, double>> scores);
std::vector<std::pair<std::string, double>> rank_spurious(const WordClassifierModel& model,
                                                          std::span<const WordFeatureVector> features);

std::string write_word_model(const WordClassifierModel& model, const std::optional<Stamp>& stamp = std::nullopt);
// Throws DataError("feature schema mismatch ...") if the model was built on other features.
WordClassifierModel read_word_model(std::istream& in, std::optional<Stamp>* stamp = nullptr);

// CSV "word,p_spurious,rank" (rank starts at 1), input already ranked.
std::string write_predictions(std::span<const std::pair<std::string, double>> ranked,
                              const std::optional<Stamp>& stamp = std::nullopt);
std::vector<std::pair<std::string, double>> read_predictions(std::istream& in, std::optional<Stamp>* stamp = nullptr);

}  // namespace spurious
