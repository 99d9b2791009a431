#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spurious/artifact.hpp"
#include "spurious/corpus.hpp"
#include "spurious/metrics.hpp"

namespace spurious {

// Dense word <-> index bijection, indices in alphabetical word order.
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> words);

    std::optional<std::uint32_t> find(const std::string& word) const;
    const std::string& word(std::uint32_t index) const { return words_[index]; }
    const std::vector<std::string>& words() const { return words_; }
    std::size_t size() const { return words_.size(); }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

// Word counts over the vocabulary, sorted by index. Unknown tokens are ignored.
SparseVector featurize_doc(std::span<const std::string> tokens, const Vocabulary& vocab);

struct DocTrainOptions {
    double l2 = 1e-4;
    int max_iter = 1000;
    double tol = 1e-6;
    // Words left out of the vocabulary (feature removal).
    std::vector<std::string> excluded;
    // When set, the vocabulary is restricted to these words (lexicon baseline).
    std::optional<std::vector<std::string>> allowed;
};

struct DocModel {
    Vocabulary vocab;
    std::vector<double> theta;
    double bias = 0.0;
    double l2_strength = 0.0;
    int max_iter = 0;
    double tol = 0.0;
    std::vector<double> loss_history;  // not persisted

    double predict_proba(const SparseVector& x) const;
    double predict_proba(std::span<const std::string> tokens) const;
    double coefficient(const std::string& word) const;  // 0 for words outside the vocabulary
};

// Bag-of-words logistic regression. The vocabulary is every token of the
// training sentences minus exclusions. Rows are put in a canonical order
// first, so the fit does not depend on input sentence order.
DocModel train_doc(std::span<const LabeledSentence> train, const DocTrainOptions& options);

struct TopWord {
    std::string word;
    double coef = 0.0;
    int correlated_class = 1;
};

// |theta_w| >= threshold, by |theta_w| descending, ties alphabetical.
std::vector<TopWord> top_words(const DocModel& model, double threshold);

double evaluate(const DocModel& model, std::span<const LabeledSentence> sentences, Metric metric);

std::string write_doc_model(const DocModel& model, const std::optional<Stamp>& stamp = std::nullopt);
DocModel read_doc_model(std::istream& in, std::optional<Stamp>* stamp = nullptr);

// CSV "word,coef,class".
std::string write_top_words(const std::vector<TopWord>& words, const std::optional<Stamp>& stamp = std::nullopt);
std::vector<TopWord> read_top_words(std::istream& in, std::optional<Stamp>* stamp = nullptr);

}  // namespace spurious
