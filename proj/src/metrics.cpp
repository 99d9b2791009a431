#include "spurious/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "spurious/error.hpp"

namespace spurious {

Metric parse_metric(std::string_view name) {
    if (name == "auc") return Metric::auc;
    if (name == "accuracy") return Metric::accuracy;
    throw UsageError("unknown metric '" + std::string(name) + "'");
}

std::string_view to_string(Metric metric) { return metric == Metric::auc ? "auc" : "accuracy"; }

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

    // Sum of midranks of the positives (Mann-Whitney U).
    double rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] > 0) {
                rank_sum += midrank;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("AUC undefined: both classes must be present");
    const double np = static_cast<double>(n_pos);
    return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
    if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
    if (scores.empty()) throw DataError("accuracy of an empty set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if ((scores[i] >= threshold) == (labels[i] > 0)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(scores.size());
}

}  // namespace spurious
