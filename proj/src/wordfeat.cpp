#include "spurious/wordfeat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>

#include "spurious/error.hpp"
#include "spurious/text.hpp"

namespace spurious {

const std::array<std::string_view, kNumWordFeatures> kFeatureNames = {
    "ate",      "weighted_ate", "top5_ate",   "mean_sim",   "top5_mean_sim", "max_sim",    "std_sim",     "sim_closest_pos",
    "sim_closest_neg", "doc_coef", "diff_norm", "top_diff_1", "top_diff_2", "top_diff_3", "max_abs_diff"};

WordFeatureVector featurize_word(const std::string& word, std::span<const MatchRecord> input,
                                 const EmbeddingStore& store, double theta_w) {
    if (input.empty()) throw DataError("cannot featurize '" + word + "' without matches");
    std::vector<MatchRecord> records(input.begin(), input.end());
    for (const auto& r : records)
        if (r.word != word) throw DataError("match record for '" + r.word + "' passed for '" + word + "'");
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        if (a.treated_context_id != b.treated_context_id) return a.treated_context_id < b.treated_context_id;
        return a.matched_context_id < b.matched_context_id;
    });

    const std::size_t n = records.size();
    const double nd = static_cast<double>(n);
    WordFeatureVector out;
    out.word = word;
    out.n_matches = n;
    auto& f = out.f;

    double effect_sum = 0.0, sim_sum = 0.0, weight_sum = 0.0, weighted_effect = 0.0;
    double max_sim = -std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        const double effect = r.treated_label - r.matched_label;
        const double weight = std::max(r.similarity, 0.0);
        effect_sum += effect;
        sim_sum += r.similarity;
        weight_sum += weight;
        weighted_effect += weight * effect;
        max_sim = std::max(max_sim, r.similarity);
        if (r.matched_label > 0) {
            f[kSimClosestPos] = out.has_pos_match ? std::max(f[kSimClosestPos], r.similarity) : r.similarity;
            out.has_pos_match = true;
        } else {
            f[kSimClosestNeg] = out.has_neg_match ? std::max(f[kSimClosestNeg], r.similarity) : r.similarity;
            out.has_neg_match = true;
        }
    }
    f[kAte] = effect_sum / nd;
    f[kWeightedAte] = weight_sum > 0.0 ? weighted_effect / weight_sum : 0.0;
    f[kMaxSim] = max_sim;
    f[kMeanSim] = std::min(sim_sum / nd, max_sim);

    double sq = 0.0;
    for (const auto& r : records) sq += (r.similarity - f[kMeanSim]) * (r.similarity - f[kMeanSim]);
    f[kStdSim] = std::sqrt(sq / nd);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return records[a].similarity > records[b].similarity; });
    const std::size_t k = std::min<std::size_t>(5, n);
    double top_effect = 0.0, top_sim = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& r = records[order[i]];
        top_effect += r.treated_label - r.matched_label;
        top_sim += r.similarity;
    }
    f[kTop5Ate] = top_effect / static_cast<double>(k);
    f[kTop5MeanSim] = std::min(top_sim / static_cast<double>(k), max_sim);

    f[kDocCoef] = theta_w;

    const std::size_t dim = store.dim();
    std::vector<double> delta(dim, 0.0);
    double max_abs = 0.0;
    for (const auto& r : records) {
        const auto t = store.get(r.treated_context_id);
        const auto m = store.get(r.matched_context_id);
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = static_cast<double>(t[d]) - static_cast<double>(m[d]);
            delta[d] += diff;
            max_abs = std::max(max_abs, std::abs(diff));
        }
    }
    double norm_sq = 0.0;
    for (auto& v : delta) {
        v /= nd;
        norm_sq += v * v;
    }
    f[kDiffNorm] = std::sqrt(norm_sq);
    std::vector<double> mags(dim);
    for (std::size_t d = 0; d < dim; ++d) mags[d] = std::abs(delta[d]);
    const std::size_t top = std::min<std::size_t>(3, dim);
    std::partial_sort(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(top), mags.end(), std::greater<>());
    for (std::size_t i = 0; i < 3; ++i) f[kTopDiff1 + i] = i < top ? mags[i] : 0.0;
    f[kMaxAbsDiff] = max_abs;
    return out;
}

FeatureArray Scaler::transform(const FeatureArray& x) const {
    FeatureArray z{};
    for (std::size_t j = 0; j < kNumWordFeatures; ++j)
        z[j] = stddev[j] < kDegenerateStd ? 0.0 : (x[j] - mean[j]) / stddev[j];
    return z;
}

Scaler fit_scaler(std::span<const FeatureArray> rows) {
    if (rows.size() < 2) throw DataError("standardization needs at least 2 rows");
    Scaler s;
    const double n = static_cast<double>(rows.size());
    for (std::size_t j = 0; j < kNumWordFeatures; ++j) {
        double sum = 0.0;
        for (const auto& r : rows) sum += r[j];
        const double mean = sum / n;
        double sq = 0.0;
        for (const auto& r : rows) sq += (r[j] - mean) * (r[j] - mean);
        s.mean[j] = mean;
        s.stddev[j] = std::sqrt(sq / n);
    }
    return s;
}

Standardized standardize(std::span<const WordFeatureVector> vectors) {
    if (vectors.size() < 2) throw DataError("standardization needs at least 2 vectors");
    std::vector<FeatureArray> raw;
    raw.reserve(vectors.size());
    for (const auto& v : vectors) raw.push_back(v.f);
    Standardized out;
    out.scaler = fit_scaler(raw);
    for (const auto& r : raw) out.rows.push_back(out.scaler.transform(r));
    return out;
}

namespace {

std::string features_header() {
    std::string h = "word";
    for (auto name : kFeatureNames) {
        h += ",";
        h += name;
    }
    return h + ",n_matches";
}

}  // namespace

std::string write_features_csv(std::span<const WordFeatureVector> vectors, const std::optional<Stamp>& stamp) {
    std::string out;
    if (stamp) out += stamp_comment(*stamp) + "\n";
    out += features_header() + "\n";
    for (const auto& v : vectors) {
        out += v.word;
        for (double x : v.f) out += "," + format_double(x);
        out += "," + std::to_string(v.n_matches) + "\n";
    }
    return out;
}

std::vector<WordFeatureVector> read_features_csv(std::istream& in, std::optional<Stamp>* stamp) {
    std::vector<WordFeatureVector> out;
    std::string line;
    bool header_seen = false;
    if (stamp) stamp->reset();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (stamp) *stamp = parse_stamp_comment(line);
            continue;
        }
        if (!header_seen) {
            if (line != features_header()) throw DataError("feature table has an unexpected column layout");
            header_seen = true;
            continue;
        }
        const auto parts = split_char(line, ',');
        if (parts.size() != kNumWordFeatures + 2) throw DataError("malformed feature row: " + line);
        WordFeatureVector v;
        v.word = parts[0];
        for (std::size_t j = 0; j < kNumWordFeatures; ++j) v.f[j] = parse_double(parts[j + 1], kFeatureNames[j]);
        v.n_matches = static_cast<std::size_t>(parse_int(parts.back(), "n_matches"));
        out.push_back(std::move(v));
    }
    if (!header_seen) throw DataError("feature table is empty");
    return out;
}

std::string write_scaler(const Scaler& scaler) {
    std::string out = "feature\tmean\tstd\n";
    for (std::size_t j = 0; j < kNumWordFeatures; ++j)
        out += std::string(kFeatureNames[j]) + "\t" + format_double(scaler.mean[j]) + "\t" +
               format_double(scaler.stddev[j]) + "\n";
    return out;
}

Scaler read_scaler(std::istream& in) {
    Scaler s;
    std::string line;
    if (!std::getline(in, line) || line != "feature\tmean\tstd") throw DataError("not a scaler table");
    for (std::size_t j = 0; j < kNumWordFeatures; ++j) {
        if (!std::getline(in, line)) throw DataError("truncated scaler table");
        const auto parts = split_char(line, '\t');
        if (parts.size() != 3 || parts[0] != kFeatureNames[j])
            throw DataError("scaler table does not match the feature schema at '" + line + "'");
        s.mean[j] = parse_double(parts[1], "scaler mean");
        s.stddev[j] = parse_double(parts[2], "scaler std");
    }
    return s;
}

}  // namespace spurious
