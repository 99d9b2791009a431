#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spurious/corpus.hpp"
#include "spurious/docmodel.hpp"

namespace spurious {

struct ContextWindow {
    std::int64_t context_id = 0;
    std::int64_t sentence_id = 0;
    std::string word;
    std::size_t position = 0;
    std::vector<std::string> left;   // up to `window` tokens before position
    std::vector<std::string> right;  // up to `window` tokens after position
};

enum class CandidatePool {
    top_words,     // windows around top-word occurrences only
    all_positions  // a window around every token; treated windows are the top-word ones
};

CandidatePool parse_candidate_pool(std::string_view name);
std::string_view to_string(CandidatePool pool);

// Context ids are assigned 0, 1, ... in (sentence order, position) order.
std::vector<ContextWindow> extract_contexts(std::span<const LabeledSentence> sentences,
                                            const std::vector<TopWord>& top, std::size_t window = 5,
                                            CandidatePool pool = CandidatePool::top_words);

enum class Provenance { external_file, fallback };

// Context vectors of one fixed dimension, stored contiguously as f32.
class EmbeddingStore {
public:
    EmbeddingStore() = default;
    EmbeddingStore(std::uint32_t dim, Provenance provenance) : dim_(dim), provenance_(provenance) {}

    std::uint32_t dim() const { return dim_; }
    Provenance provenance() const { return provenance_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::int64_t>& ids() const { return ids_; }

    // Throws DataError on a duplicate id, a wrong dimension, or non-finite values.
    void add(std::int64_t context_id, std::span<const float> vec);
    bool contains(std::int64_t context_id) const { return row_.count(context_id) != 0; }
    std::span<const float> get(std::int64_t context_id) const;
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

    void scale(float factor);

private:
    std::uint32_t dim_ = 0;
    Provenance provenance_ = Provenance::fallback;
    std::vector<std::int64_t> ids_;
    std::vector<float> data_;
    std::unordered_map<std::int64_t, std::size_t> row_;
};

// Binary layout, little-endian: "CEV1", u32 dim, u64 count, then count x
// (u64 context_id, dim x f32). Loading is all-or-nothing.
EmbeddingStore load_embeddings(const std::string& path, Provenance provenance = Provenance::external_file);
EmbeddingStore read_embeddings(std::istream& in, Provenance provenance = Provenance::external_file);
void save_embeddings(const std::string& path, const EmbeddingStore& store);
std::string encode_embeddings(const EmbeddingStore& store);

// Sidecar manifest: one {"context_id","sentence_id","word","position"} object per line.
std::string write_manifest(const std::vector<ContextWindow>& windows);

struct ManifestEntry {
    std::int64_t context_id = 0;
    std::int64_t sentence_id = 0;
    std::string word;
    std::size_t position = 0;

    bool operator==(const ManifestEntry&) const = default;
};

std::vector<ManifestEntry> read_manifest(std::istream& in);
// Throws DataError describing the first disagreement.
void verify_manifest(const std::vector<ContextWindow>& windows, const std::vector<ManifestEntry>& manifest);

// Full contexts artifact: manifest lines plus left/right tokens, with a header.
std::string write_contexts(const std::vector<ContextWindow>& windows, std::size_t window,
                           const std::optional<Stamp>& stamp = std::nullopt);
std::vector<ContextWindow> read_contexts(std::istream& in, std::optional<Stamp>* stamp = nullptr);

struct FallbackOptions {
    std::uint32_t dim = 100;
    std::size_t cooccurrence_window = 5;
    std::uint64_t seed = 0;
};

// Word vectors from a truncated factorization of the positive PMI
// co-occurrence matrix of `sentences`; each context is the mean of its
// in-vocabulary left and right token vectors. Contexts with no usable token
// get a unit vector drawn from (seed, context_id).
EmbeddingStore fallback_embed(std::span<const LabeledSentence> sentences, const std::vector<ContextWindow>& windows,
                              const FallbackOptions& options);

// Word vectors only; rows follow `vocab` (alphabetical).
struct WordVectors {
    Vocabulary vocab;
    std::uint32_t dim = 0;
    std::vector<double> data;  // vocab.size() x dim, row-major

    std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};
WordVectors train_word_vectors(std::span<const LabeledSentence> sentences, const FallbackOptions& options);

double l2_norm(std::span<const float> v);
double dot(std::span<const float> u, std::span<const float> v);

// <u,v> / (|u| |v|), clamped to [-1, 1]; 0 when either vector is zero.
// Throws DataError on a dimension mismatch.
double cosine(std::span<const float> u, std::span<const float> v);
double cosine(std::span<const float> u, std::span<const float> v, double norm_u, double norm_v);

}  // namespace spurious
