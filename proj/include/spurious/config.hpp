#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace spurious {

// Settings for every pipeline stage. Text form is one "key = value" per
// line with '#' comments; precedence is flags > file > defaults.
struct RunConfig {
    std::string dataset_kind = "generic";
    std::string dataset_path;
    std::string name;
    std::uint64_t seed = 1;
    double test_fraction = 0.2;

    double threshold = 1.0;
    double doc_l2 = 1e-4;
    int doc_max_iter = 1000;
    double doc_tol = 1e-6;

    std::size_t window = 5;
    std::string candidate_pool = "top_words";
    std::string embeddings = "fallback";  // "fallback" or a CEV1 file path
    std::string embeddings_manifest;      // sidecar written with an external file, checked when set
    std::uint32_t embedding_dim = 100;
    bool dedup_per_sentence = false;

    std::string labels;  // default <out>/labels.csv
    double word_l2 = 1.0;
    bool orient_features = true;
    int folds = 10;
    std::string word_model;  // word classifier from another domain

    std::size_t quota = 10;
    std::size_t step = 1;
    std::string removal = "retrain";  // retrain | mask
    std::string metric = "auto";       // auto | auc | accuracy
    std::string group_words = "auto";  // auto | spurious | top
    std::string strategy = "all";
    std::string lexicon_positive;
    std::string lexicon_negative;

    std::string out = "out";
};

// Known keys, in canonical order.
const std::vector<std::string>& config_keys();

// Throws UsageError for unknown keys or unparsable values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);
std::string get_setting(const RunConfig& config, std::string_view key);

// Relative paths in the file are taken relative to the file's directory.
RunConfig load_config(const std::string& path);
void parse_config(std::istream& in, RunConfig& config, const std::string& base_dir);

// Makes every path absolute against `base_dir`.
void resolve_paths(RunConfig& config, const std::string& base_dir);

// Hex digest over the settings that shape the artifacts. The dataset enters
// by content, an external embedding file by name. Excluded: out, labels,
// word_model, lexicons, strategy and embeddings_manifest, which feed later
// stages and may change mid-run.
std::string config_hash(const RunConfig& config);

std::string to_text(const RunConfig& config);

}  // namespace spurious
