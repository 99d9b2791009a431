#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spurious/wordclf.hpp"

namespace spurious {

// Benchmark corpus with known spurious tokens.
//
// Every sentence carries two genuine words of its own class, which alone
// decide the label: one ("far") sits at least seven tokens away from the
// rest, the other ("near") sits next to an injected spurious token. A
// spurious token is drawn from the label's side with probability `rho` and
// from the opposite side otherwise, so it predicts the label at rate rho
// while its surrounding filler context is shared by both labels.
struct SyntheticOptions {
    std::size_t n_sentences = 2000;
    std::size_t n_spurious = 20;      // split evenly between the classes
    double rho = 0.9;
    std::size_t genuine_per_class = 300;
    std::size_t fillers = 200;
    double zipf_exponent = 1.0;
    std::string domain = "a";         // prefix of every generated token
    std::uint64_t seed = 1;
};

struct SyntheticCorpus {
    std::vector<std::pair<int, std::string>> records;  // (label, text)
    std::vector<WordLabel> labels;                      // every generated spurious and genuine token
    std::vector<std::string> spurious_words;
};

SyntheticCorpus generate_synthetic(const SyntheticOptions& options);

// Generic TSV "label<TAB>text".
std::string to_tsv(const SyntheticCorpus& corpus);

}  // namespace spurious
