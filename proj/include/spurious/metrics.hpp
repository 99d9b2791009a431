#pragma once

#include <span>
#include <string_view>

namespace spurious {

enum class Metric { auc, accuracy };

Metric parse_metric(std::string_view name);
std::string_view to_string(Metric metric);

// Probability that a random positive outranks a random negative, ties count
// one half. Labels are +/-1. Throws DataError("AUC undefined ...") when a
// class is missing.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Fraction of items where (score >= threshold) agrees with label > 0.
double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

}  // namespace spurious
