#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spurious/artifact.hpp"

namespace spurious {

enum class Split { train, test };

struct LabeledSentence {
    std::int64_t id = 0;
    std::vector<std::string> tokens;
    int label = 1;  // -1 or +1
    Split split = Split::train;
};

enum class DatasetKind { imdb, kindle, toxic_comment, toxic_tweet, generic };

DatasetKind parse_dataset_kind(std::string_view name);
std::string_view to_string(DatasetKind kind);
std::string_view to_string(Split split);

struct Corpus {
    std::string name;
    std::vector<LabeledSentence> sentences;

    std::size_t count(int label) const;
    std::vector<LabeledSentence> select(Split split) const;
};

// Lowercases and splits on every maximal run of non-alphanumeric bytes.
std::vector<std::string> tokenize(std::string_view text);

// Sentences shorter or longer than this are dropped for kindle and toxic_comment.
inline constexpr std::size_t kMinTokens = 5;
inline constexpr std::size_t kMaxTokens = 40;

// Parses records of the declared format, applies the dataset's labeling and
// length rules, and balances classes by downsampling. Sentence ids are the
// zero-based input line numbers. Every sentence starts in the train split.
Corpus parse_corpus(std::istream& in, DatasetKind kind, std::uint64_t seed, std::string name);
Corpus ingest(const std::string& path, DatasetKind kind, std::uint64_t seed);

// Downsamples the larger class to the size of the smaller one, keeping input order.
Corpus balance(Corpus corpus, std::uint64_t seed);

// Stratified train/test assignment. Total test size is floor(n * fraction)
// (at least one when n >= 2), spread over classes by largest remainder.
Corpus split(Corpus corpus, double test_fraction, std::uint64_t seed);

// Canonical line-delimited JSON: a header object, then one
// {"id","label","split","tokens"} object per sentence.
std::string write_corpus(const Corpus& corpus, const std::optional<Stamp>& stamp = std::nullopt);
Corpus read_corpus(std::istream& in, std::optional<Stamp>* stamp = nullptr);

}  // namespace spurious
