#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "spurious/artifact.hpp"
#include "spurious/contexts.hpp"
#include "spurious/corpus.hpp"
#include "spurious/docmodel.hpp"

namespace spurious {

struct MatchRecord {
    std::string word;
    std::int64_t treated_context_id = 0;
    std::int64_t treated_sentence_id = 0;
    int treated_label = 1;
    std::int64_t matched_context_id = 0;
    std::int64_t matched_sentence_id = 0;
    int matched_label = 1;
    std::string matched_word;
    double similarity = 0.0;

    bool operator==(const MatchRecord&) const = default;
};

// Labels and token membership by sentence id.
class SentenceLookup {
public:
    explicit SentenceLookup(std::span<const LabeledSentence> sentences);

    bool has(std::int64_t sentence_id) const { return index_.count(sentence_id) != 0; }
    int label(std::int64_t sentence_id) const;
    bool contains(std::int64_t sentence_id, const std::string& word) const;
    const std::vector<std::string>& tokens(std::int64_t sentence_id) const;

private:
    std::size_t at(std::int64_t sentence_id) const;

    std::unordered_map<std::int64_t, std::size_t> index_;
    std::vector<int> labels_;
    std::vector<std::vector<std::string>> tokens_;
    std::vector<std::vector<std::string>> sorted_types_;
};

// The candidate with the highest cosine similarity among those whose
// sentence does not contain `word`; ties go to the smallest
// (sentence_id, context_id). nullopt when nothing is eligible.
std::optional<MatchRecord> best_match(const ContextWindow& treated, std::span<const ContextWindow> candidates,
                                      const EmbeddingStore& store, const std::string& word,
                                      const SentenceLookup& sentences);

struct MatchOptions {
    // Treat only the first occurrence of a word in each sentence.
    bool dedup_per_sentence = false;
};

struct MatchDiagnostics {
    std::size_t treated = 0;
    std::size_t unmatched = 0;
    std::map<std::string, std::size_t> unmatched_by_word;
};

struct MatchResult {
    std::vector<MatchRecord> records;  // by top-word order, then treated context id
    MatchDiagnostics diagnostics;
};

// Every window whose word is a top word is treated; every window is a candidate.
MatchResult match_all(const std::vector<TopWord>& top, const std::vector<ContextWindow>& windows,
                      const EmbeddingStore& store, const SentenceLookup& sentences, const MatchOptions& options = {});

struct AteEstimate {
    std::string word;
    double tau = 0.0;
    std::size_t n_pairs = 0;
};

// Mean of (treated_label - matched_label). Throws DataError("no matches") on empty input.
AteEstimate ate(std::span<const MatchRecord> records);

// Records grouped by word, in first-appearance order.
std::vector<std::pair<std::string, std::vector<MatchRecord>>> group_by_word(const std::vector<MatchRecord>& records);

std::string write_matches(const MatchResult& result, const std::optional<Stamp>& stamp = std::nullopt);
MatchResult read_matches(std::istream& in, std::optional<Stamp>* stamp = nullptr);

// Pairs as two lines each, "left [word] right (label)", treated first.
std::string dump_pairs(std::span<const MatchRecord> records, const std::vector<ContextWindow>& windows);

}  // namespace spurious
