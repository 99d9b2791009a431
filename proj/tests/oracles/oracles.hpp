#pragma once

// Brute-force reference implementations used as test oracles. They follow
// the definitions directly and share no code with the library beyond its
// data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spurious/contexts.hpp"
#include "spurious/corpus.hpp"
#include "spurious/logistic.hpp"
#include "spurious/matcher.hpp"

namespace oracle {

inline double cosine(std::span<const float> u, std::span<const float> v) {
    long double uv = 0, uu = 0, vv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += static_cast<long double>(u[i]) * v[i];
        uu += static_cast<long double>(u[i]) * u[i];
        vv += static_cast<long double>(v[i]) * v[i];
    }
    if (uu == 0 || vv == 0) return 0.0;
    const double c = static_cast<double>(uv / std::sqrt(uu * vv));
    return std::clamp(c, -1.0, 1.0);
}

// <u,v> / (|u| |v|) with left-to-right double sums, the textbook formula.
inline double cosine_double(std::span<const float> u, std::span<const float> v) {
    double uv = 0, uu = 0, vv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) uv += static_cast<double>(u[i]) * static_cast<double>(v[i]);
    for (std::size_t i = 0; i < u.size(); ++i) uu += static_cast<double>(u[i]) * static_cast<double>(u[i]);
    for (std::size_t i = 0; i < v.size(); ++i) vv += static_cast<double>(v[i]) * static_cast<double>(v[i]);
    if (uu == 0 || vv == 0) return 0.0;
    return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

struct Match {
    std::int64_t context_id = -1;
    std::int64_t sentence_id = -1;
    double similarity = 0.0;
};

// Scans every candidate; returns the most similar one from a sentence
// without `word`, ties to the smallest (sentence_id, context_id).
inline std::optional<Match> brute_force_match(const spurious::ContextWindow& treated,
                                              const std::vector<spurious::ContextWindow>& candidates,
                                              const spurious::EmbeddingStore& store,
                                              const std::vector<spurious::LabeledSentence>& sentences) {
    std::optional<Match> best;
    const auto t = store.get(treated.context_id);
    for (const auto& c : candidates) {
        const spurious::LabeledSentence* s = nullptr;
        for (const auto& x : sentences)
            if (x.id == c.sentence_id) s = &x;
        if (s == nullptr) continue;
        if (std::find(s->tokens.begin(), s->tokens.end(), treated.word) != s->tokens.end()) continue;
        const double sim = cosine_double(t, store.get(c.context_id));
        const bool better = !best || sim > best->similarity ||
                            (sim == best->similarity && (c.sentence_id < best->sentence_id ||
                                                         (c.sentence_id == best->sentence_id &&
                                                          c.context_id < best->context_id)));
        if (better) best = Match{c.context_id, c.sentence_id, sim};
    }
    return best;
}

// Mean label difference over match records, recomputed from sentence labels.
inline double ate_from_scratch(const std::vector<spurious::MatchRecord>& records,
                               const std::vector<spurious::LabeledSentence>& sentences) {
    const auto label_of = [&](std::int64_t id) {
        for (const auto& s : sentences)
            if (s.id == id) return s.label;
        return 0;
    };
    long long total = 0;
    for (const auto& r : records) total += label_of(r.treated_sentence_id) - label_of(r.matched_sentence_id);
    return static_cast<double>(total) / static_cast<double>(records.size());
}

// AUC by enumerating every (positive, negative) pair.
inline double auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0;
    long long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] <= 0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] > 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// Mean logistic loss + (l2/2)|w|^2 written out term by term; the last
// parameter is the unregularized bias.
inline double logistic_loss(const std::vector<std::vector<double>>& x, const std::vector<int>& y, double l2,
                            const std::vector<double>& params) {
    const std::size_t d = params.size() - 1;
    long double loss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        long double z = params[d];
        for (std::size_t j = 0; j < d; ++j) z += static_cast<long double>(x[i][j]) * params[j];
        const long double m = -y[i] * z;
        loss += m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    }
    loss /= static_cast<long double>(x.size());
    long double reg = 0;
    for (std::size_t j = 0; j < d; ++j) reg += static_cast<long double>(params[j]) * params[j];
    return static_cast<double>(loss + 0.5L * l2 * reg);
}

// Central differences of `f` at `p`, step scaled per coordinate.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> p) {
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(p[i]));
        const double keep = p[i];
        p[i] = keep + h;
        const double up = f(p);
        p[i] = keep - h;
        const double down = f(p);
        p[i] = keep;
        g[i] = (up - down) / (2 * h);
    }
    return g;
}

inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += std::max(a[i] * a[i], b[i] * b[i]);
    }
    return den == 0 ? std::sqrt(num) : std::sqrt(num / den);
}

}  // namespace oracle
