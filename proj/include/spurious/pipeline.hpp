#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "spurious/artifact.hpp"
#include "spurious/config.hpp"
#include "spurious/synthetic.hpp"

namespace spurious {

enum class Stage { ingest, train_doc, extract, match, featurize, annotate, train_word, select, report };

Stage parse_stage(std::string_view name);  // UsageError on unknown names
std::string_view to_string(Stage stage);
const std::vector<Stage>& all_stages();

// Artifact file names inside the output directory.
namespace files {
inline constexpr const char* corpus = "corpus.jsonl";
inline constexpr const char* doc_model = "doc_model.txt";
inline constexpr const char* top_words = "top_words.csv";
inline constexpr const char* contexts = "contexts.jsonl";
inline constexpr const char* manifest = "contexts.manifest.jsonl";
inline constexpr const char* embeddings = "embeddings.cev";
inline constexpr const char* embeddings_stamp = "embeddings.stamp";
inline constexpr const char* matches = "matches.jsonl";
inline constexpr const char* pairs = "matched_pairs.txt";
inline constexpr const char* features = "features.csv";
inline constexpr const char* scaler = "scaler.txt";
inline constexpr const char* labels = "labels.csv";
inline constexpr const char* word_model = "word_model.txt";
inline constexpr const char* predictions = "predictions.csv";
inline constexpr const char* cv = "cv.csv";
inline constexpr const char* word_eval = "word_eval.txt";
inline constexpr const char* transfer_predictions = "transfer_predictions.csv";
inline constexpr const char* groups = "groups.csv";
inline constexpr const char* references = "references.csv";
inline constexpr const char* report = "report.txt";
inline constexpr const char* lock = ".spurious.lock";
}  // namespace files

// Exclusive claim on an output directory, released on destruction.
class OutputLock {
public:
    explicit OutputLock(const std::string& out_dir);
    ~OutputLock();
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    std::string path_;
};

Stamp stamp_for(const RunConfig& config);
std::string labels_path(const RunConfig& config);

// Runs one stage under the output lock. `in` feeds the annotate prompt;
// progress and summaries go to `out`.
void run_stage(Stage stage, const RunConfig& config, std::istream& in, std::ostream& out);

// Every non-interactive stage in order. train-word is skipped when no
// labels file exists.
void run_all(const RunConfig& config, std::ostream& out);

// Writes <domain>.tsv, <domain>_labels.csv and <domain>.conf into `dir` and
// returns the config path. The config carries the benchmark settings
// (doc_l2 0.001, test_fraction 0.5, accuracy) and writes to out_<domain>.
std::string write_synthetic_bundle(const std::string& dir, const SyntheticOptions& options);

}  // namespace spurious
