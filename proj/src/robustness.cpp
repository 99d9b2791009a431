#include "spurious/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <unordered_map>

#include "spurious/error.hpp"
#include "spurious/rng.hpp"
#include "spurious/text.hpp"

namespace spurious {

namespace {

std::vector<TopWord> by_rank(std::vector<TopWord> words) {
    std::sort(words.begin(), words.end(), [](const TopWord& a, const TopWord& b) {
        const double ma = std::abs(a.coef), mb = std::abs(b.coef);
        if (ma != mb) return ma > mb;
        return a.word < b.word;
    });
    return words;
}

std::vector<std::int64_t> sample(std::vector<std::int64_t> ids, std::size_t quota, std::uint64_t salt) {
    if (ids.size() > quota) {
        std::sort(ids.begin(), ids.end(), [&](auto a, auto b) {
            const auto pa = mix_seed(salt, static_cast<std::uint64_t>(a));
            const auto pb = mix_seed(salt, static_cast<std::uint64_t>(b));
            return pa != pb ? pa < pb : a < b;
        });
        ids.resize(quota);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<LabeledSentence> pick(const std::unordered_map<std::int64_t, const LabeledSentence*>& by_id,
                                  const std::vector<std::int64_t>& ids) {
    std::vector<LabeledSentence> out;
    out.reserve(ids.size());
    for (auto id : ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("group sentence " + std::to_string(id) + " not found");
        out.push_back(*it->second);
    }
    return out;
}

double score_group(const DocModel& model, const std::vector<LabeledSentence>& group, Metric metric,
                   std::string_view name) {
    if (group.empty()) throw DataError(std::string(name) + " group is empty");
    if (metric == Metric::auc) {
        const bool pos = std::any_of(group.begin(), group.end(), [](const auto& s) { return s.label > 0; });
        const bool neg = std::any_of(group.begin(), group.end(), [](const auto& s) { return s.label < 0; });
        if (!pos || !neg)
            throw DataError(std::string(name) +
                            " group has a single class; AUC is undefined there, use metric=accuracy");
    }
    return evaluate(model, group, metric);
}

}  // namespace

Groups build_groups(std::span<const LabeledSentence> sentences, const std::vector<TopWord>& tracked,
                    std::size_t quota, std::uint64_t seed) {
    if (quota < 1) throw UsageError("group quota must be at least 1");
    const auto ranked = by_rank(tracked);
    std::unordered_map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < ranked.size(); ++i) rank.emplace(ranked[i].word, i);

    std::vector<std::vector<std::int64_t>> maj(ranked.size()), mino(ranked.size());
    for (const auto& s : sentences) {
        std::size_t best = ranked.size();
        for (const auto& t : s.tokens) {
            const auto it = rank.find(t);
            if (it != rank.end()) best = std::min(best, it->second);
        }
        if (best == ranked.size()) continue;
        (s.label == ranked[best].correlated_class ? maj : mino)[best].push_back(s.id);
    }

    Groups groups;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (maj[i].empty() && mino[i].empty()) {
            groups.skipped.push_back(ranked[i].word);
            continue;
        }
        const std::uint64_t salt = mix_seed(seed, fnv1a(ranked[i].word));
        GroupSpec g{ranked[i].word, ranked[i].correlated_class, sample(maj[i], quota, salt), sample(mino[i], quota, salt)};
        groups.majority.insert(groups.majority.end(), g.majority_ids.begin(), g.majority_ids.end());
        groups.minority.insert(groups.minority.end(), g.minority_ids.begin(), g.minority_ids.end());
        groups.words.push_back(std::move(g));
    }
    std::sort(groups.majority.begin(), groups.majority.end());
    std::sort(groups.minority.begin(), groups.minority.end());
    std::merge(groups.majority.begin(), groups.majority.end(), groups.minority.begin(), groups.minority.end(),
               std::back_inserter(groups.all));
    return groups;
}

Strategy parse_strategy(std::string_view name) {
    if (name == "oracle") return Strategy::oracle;
    if (name == "lexicon") return Strategy::lexicon;
    if (name == "random") return Strategy::random;
    if (name == "predicted_same_domain") return Strategy::predicted_same_domain;
    if (name == "predicted_transfer") return Strategy::predicted_transfer;
    throw UsageError("unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::oracle: return "oracle";
        case Strategy::lexicon: return "lexicon";
        case Strategy::random: return "random";
        case Strategy::predicted_same_domain: return "predicted_same_domain";
        case Strategy::predicted_transfer: return "predicted_transfer";
    }
    return "random";
}

std::vector<std::string> seeded_permutation(std::vector<std::string> words, std::uint64_t seed) {
    std::sort(words.begin(), words.end());
    Rng rng(mix_seed(seed, 0x9e4d));
    rng.shuffle(std::span(words));
    return words;
}

RemovalPlan make_plan(Strategy strategy, const PlanInputs& inputs, std::uint64_t seed) {
    RemovalPlan plan{strategy, {}, seed};
    switch (strategy) {
        case Strategy::oracle: {
            if (!inputs.labels) throw DataError("oracle plan needs word labels");
            std::vector<std::string> spurious;
            for (const auto& l : *inputs.labels)
                if (l.label == WordClass::spurious) spurious.push_back(l.word);
            if (spurious.empty()) throw DataError("oracle plan: no word is labeled spurious");
            plan.words = seeded_permutation(std::move(spurious), seed);
            break;
        }
        case Strategy::random: {
            if (!inputs.top_words) throw DataError("random plan needs the top words");
            std::vector<std::string> words;
            for (const auto& t : *inputs.top_words) words.push_back(t.word);
            plan.words = seeded_permutation(std::move(words), seed);
            break;
        }
        case Strategy::predicted_same_domain:
        case Strategy::predicted_transfer: {
            if (!inputs.predictions) throw DataError("predicted plan needs word classifier predictions");
            for (const auto& [w, p] : rank_spurious(*inputs.predictions)) plan.words.push_back(w);
            break;
        }
        case Strategy::lexicon:
            throw UsageError("the lexicon strategy is a reference line; use lexicon_baseline");
    }
    return plan;
}

CurvePoint evaluate_groups(const DocModel& model, std::span<const LabeledSentence> sentences, const Groups& groups,
                           Metric metric) {
    std::unordered_map<std::int64_t, const LabeledSentence*> by_id;
    for (const auto& s : sentences) by_id.emplace(s.id, &s);
    CurvePoint p;
    p.metric = metric;
    p.majority = score_group(model, pick(by_id, groups.majority), metric, "majority");
    p.minority = score_group(model, pick(by_id, groups.minority), metric, "minority");
    p.all = score_group(model, pick(by_id, groups.all), metric, "all");
    return p;
}

Removal parse_removal(std::string_view name) {
    if (name == "retrain") return Removal::retrain;
    if (name == "mask") return Removal::mask;
    throw UsageError("removal must be retrain or mask, got '" + std::string(name) + "'");
}

std::vector<CurvePoint> run_curve(std::span<const LabeledSentence> train, std::span<const LabeledSentence> test,
                                  const RemovalPlan& plan, const Groups& groups, const CurveOptions& options) {
    if (options.step < 1) throw UsageError("curve step must be at least 1");
    std::vector<CurvePoint> points;
    std::optional<DocModel> full;
    if (options.removal == Removal::mask) full = train_doc(train, options.doc);
    for (std::size_t k = 0; k <= plan.words.size(); k += options.step) {
        if (full) {
            DocModel model = *full;
            for (std::size_t i = 0; i < k; ++i)
                if (const auto idx = model.vocab.find(plan.words[i])) model.theta[*idx] = 0.0;
            CurvePoint p = evaluate_groups(model, test, groups, options.metric);
            p.k_removed = k;
            points.push_back(p);
            continue;
        }
        DocTrainOptions doc = options.doc;
        doc.excluded.insert(doc.excluded.end(), plan.words.begin(), plan.words.begin() + static_cast<std::ptrdiff_t>(k));
        const DocModel model = train_doc(train, doc);
        CurvePoint p = evaluate_groups(model, test, groups, options.metric);
        p.k_removed = k;
        points.push_back(p);
    }
    return points;
}

std::vector<std::string> parse_lexicon(std::istream& in) {
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty() || t[0] == ';' || t[0] == '#') continue;
        for (auto& tok : tokenize(t)) words.push_back(std::move(tok));
    }
    return words;
}

std::vector<std::string> load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lexicon " + path);
    return parse_lexicon(in);
}

CurvePoint lexicon_baseline(std::span<const LabeledSentence> train, std::span<const LabeledSentence> test,
                            const Groups& groups, const std::vector<std::string>& lexicon, Metric metric,
                            const DocTrainOptions& doc) {
    const std::set<std::string> lex(lexicon.begin(), lexicon.end());
    bool any = false;
    for (const auto& s : train) {
        for (const auto& t : s.tokens)
            if (lex.count(t)) {
                any = true;
                break;
            }
        if (any) break;
    }
    if (!any) throw DataError("lexicon shares no word with the training vocabulary");
    DocTrainOptions opts = doc;
    opts.allowed = lexicon;
    return evaluate_groups(train_doc(train, opts), test, groups, metric);
}

CurvePoint downsample_baseline(std::span<const LabeledSentence> train, std::span<const LabeledSentence> test,
                               const std::vector<TopWord>& tracked, const Groups& test_groups, std::uint64_t seed,
                               Metric metric, const DocTrainOptions& doc) {
    const Groups g = build_groups(train, tracked, kUnlimitedQuota, seed);
    if (g.minority.empty()) throw DataError("downsampling baseline: the training minority group is empty");
    std::set<std::int64_t> dropped;
    if (g.majority.size() > g.minority.size()) {
        auto maj = g.majority;
        Rng rng(mix_seed(seed, 0xd0));
        rng.shuffle(std::span(maj));
        dropped.insert(maj.begin() + static_cast<std::ptrdiff_t>(g.minority.size()), maj.end());
    }
    std::vector<LabeledSentence> kept;
    for (const auto& s : train)
        if (!dropped.count(s.id)) kept.push_back(s);
    return evaluate_groups(train_doc(kept, doc), test, test_groups, metric);
}

std::string write_curve_csv(std::string_view strategy, std::span<const CurvePoint> points,
                            const std::optional<Stamp>& stamp) {
    std::string out;
    if (stamp) out += stamp_comment(*stamp) + "\n";
    out += "strategy,k_removed,metric,majority,minority,all\n";
    for (const auto& p : points)
        out += std::string(strategy) + "," + std::to_string(p.k_removed) + "," + std::string(to_string(p.metric)) +
               "," + format_double(p.majority) + "," + format_double(p.minority) + "," + format_double(p.all) + "\n";
    return out;
}

std::string write_references_csv(std::span<const std::pair<std::string, CurvePoint>> refs,
                                 const std::optional<Stamp>& stamp) {
    std::string out;
    if (stamp) out += stamp_comment(*stamp) + "\n";
    out += "name,metric,all\n";
    for (const auto& [name, p] : refs)
        out += name + "," + std::string(to_string(p.metric)) + "," + format_double(p.all) + "\n";
    return out;
}

std::vector<CurveRow> read_curve_csv(std::istream& in, std::optional<Stamp>* stamp) {
    std::vector<CurveRow> out;
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
            if (line != "strategy,k_removed,metric,majority,minority,all")
                throw DataError("curve CSV has an unexpected header");
            header_seen = true;
            continue;
        }
        const auto parts = split_char(line, ',');
        if (parts.size() != 6) throw DataError("malformed curve row: " + line);
        CurveRow row;
        row.strategy = parts[0];
        row.point.k_removed = static_cast<std::size_t>(parse_int(parts[1], "k_removed"));
        row.point.metric = parse_metric(parts[2]);
        row.point.majority = parse_double(parts[3], "majority");
        row.point.minority = parse_double(parts[4], "minority");
        row.point.all = parse_double(parts[5], "all");
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace spurious
