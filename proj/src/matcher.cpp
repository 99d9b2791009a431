#include "spurious/matcher.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "spurious/error.hpp"

namespace spurious {

namespace {

using json = nlohmann::json;

struct Candidate {
    const ContextWindow* window;
    std::span<const float> vec;
    double norm;
};

struct Best {
    const Candidate* cand = nullptr;
    double sim = 0.0;
};

bool better(double sim, const ContextWindow& w, const Best& best) {
    if (!best.cand) return true;
    if (sim != best.sim) return sim > best.sim;
    const auto& b = *best.cand->window;
    if (w.sentence_id != b.sentence_id) return w.sentence_id < b.sentence_id;
    return w.context_id < b.context_id;
}

MatchRecord make_record(const ContextWindow& treated, const Best& best, const std::string& word,
                        const SentenceLookup& sentences) {
    const auto& m = *best.cand->window;
    return {word,          treated.context_id, treated.sentence_id, sentences.label(treated.sentence_id),
            m.context_id,  m.sentence_id,      sentences.label(m.sentence_id),
            m.word,        best.sim};
}

}  // namespace

SentenceLookup::SentenceLookup(std::span<const LabeledSentence> sentences) {
    for (const auto& s : sentences) {
        if (!index_.emplace(s.id, labels_.size()).second)
            throw DataError("duplicate sentence id " + std::to_string(s.id));
        labels_.push_back(s.label);
        tokens_.push_back(s.tokens);
        auto types = s.tokens;
        std::sort(types.begin(), types.end());
        types.erase(std::unique(types.begin(), types.end()), types.end());
        sorted_types_.push_back(std::move(types));
    }
}

std::size_t SentenceLookup::at(std::int64_t sentence_id) const {
    const auto it = index_.find(sentence_id);
    if (it == index_.end()) throw DataError("unknown sentence id " + std::to_string(sentence_id));
    return it->second;
}

int SentenceLookup::label(std::int64_t sentence_id) const { return labels_[at(sentence_id)]; }

bool SentenceLookup::contains(std::int64_t sentence_id, const std::string& word) const {
    const auto& types = sorted_types_[at(sentence_id)];
    return std::binary_search(types.begin(), types.end(), word);
}

const std::vector<std::string>& SentenceLookup::tokens(std::int64_t sentence_id) const {
    return tokens_[at(sentence_id)];
}

std::optional<MatchRecord> best_match(const ContextWindow& treated, std::span<const ContextWindow> candidates,
                                      const EmbeddingStore& store, const std::string& word,
                                      const SentenceLookup& sentences) {
    const auto tv = store.get(treated.context_id);
    const double tn = l2_norm(tv);
    Best best;
    Candidate cur{};
    Candidate kept{};
    for (const auto& c : candidates) {
        if (sentences.contains(c.sentence_id, word)) continue;
        cur.window = &c;
        cur.vec = store.get(c.context_id);
        cur.norm = l2_norm(cur.vec);
        const double sim = cosine(tv, cur.vec, tn, cur.norm);
        if (better(sim, c, best)) {
            kept = cur;
            best.cand = &kept;
            best.sim = sim;
        }
    }
    if (!best.cand) return std::nullopt;
    return make_record(treated, best, word, sentences);
}

MatchResult match_all(const std::vector<TopWord>& top, const std::vector<ContextWindow>& windows,
                      const EmbeddingStore& store, const SentenceLookup& sentences, const MatchOptions& options) {
    std::vector<Candidate> cands;
    cands.reserve(windows.size());
    for (const auto& w : windows) {
        const auto v = store.get(w.context_id);
        cands.push_back({&w, v, l2_norm(v)});
    }

    MatchResult result;
    std::vector<const Candidate*> eligible;
    for (const auto& t : top) {
        std::vector<const Candidate*> treated;
        eligible.clear();
        std::set<std::int64_t> seen_sentences;
        for (const auto& c : cands) {
            if (sentences.contains(c.window->sentence_id, t.word)) {
                if (c.window->word != t.word) continue;
                if (options.dedup_per_sentence && !seen_sentences.insert(c.window->sentence_id).second) continue;
                treated.push_back(&c);
            } else {
                eligible.push_back(&c);
            }
        }
        std::sort(treated.begin(), treated.end(),
                  [](const auto* a, const auto* b) { return a->window->context_id < b->window->context_id; });
        for (const auto* tc : treated) {
            ++result.diagnostics.treated;
            Best best;
            for (const auto* c : eligible) {
                const double sim = cosine(tc->vec, c->vec, tc->norm, c->norm);
                if (better(sim, *c->window, best)) {
                    best.cand = c;
                    best.sim = sim;
                }
            }
            if (!best.cand) {
                ++result.diagnostics.unmatched;
                ++result.diagnostics.unmatched_by_word[t.word];
                continue;
            }
            result.records.push_back(make_record(*tc->window, best, t.word, sentences));
        }
    }
    return result;
}

AteEstimate ate(std::span<const MatchRecord> records) {
    if (records.empty()) throw DataError("no matches");
    double sum = 0.0;
    for (const auto& r : records) sum += r.treated_label - r.matched_label;
    return {records.front().word, sum / static_cast<double>(records.size()), records.size()};
}

std::vector<std::pair<std::string, std::vector<MatchRecord>>> group_by_word(const std::vector<MatchRecord>& records) {
    std::vector<std::pair<std::string, std::vector<MatchRecord>>> out;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& r : records) {
        auto [it, fresh] = slot.emplace(r.word, out.size());
        if (fresh) out.emplace_back(r.word, std::vector<MatchRecord>{});
        out[it->second].second.push_back(r);
    }
    return out;
}

std::string write_matches(const MatchResult& result, const std::optional<Stamp>& stamp) {
    json header = {{"artifact", "matches"},
                   {"format_version", 1},
                   {"count", result.records.size()},
                   {"treated", result.diagnostics.treated},
                   {"unmatched", result.diagnostics.unmatched},
                   {"unmatched_by_word", result.diagnostics.unmatched_by_word}};
    if (stamp) {
        header["config_hash"] = stamp->config_hash;
        header["seed"] = stamp->seed;
    }
    std::string out = header.dump() + "\n";
    for (const auto& r : result.records) {
        json rec = {{"word", r.word},
                    {"treated_context_id", r.treated_context_id},
                    {"treated_sentence_id", r.treated_sentence_id},
                    {"treated_label", r.treated_label},
                    {"matched_context_id", r.matched_context_id},
                    {"matched_sentence_id", r.matched_sentence_id},
                    {"matched_label", r.matched_label},
                    {"matched_word", r.matched_word},
                    {"similarity", r.similarity}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

MatchResult read_matches(std::istream& in, std::optional<Stamp>* stamp) {
    MatchResult result;
    std::string line;
    std::size_t line_no = 1;
    try {
        if (!std::getline(in, line)) throw DataError("empty matches file");
        const auto header = json::parse(line);
        if (header.value("artifact", "") != "matches") throw DataError("not a matches artifact");
        result.diagnostics.treated = header.at("treated").get<std::size_t>();
        result.diagnostics.unmatched = header.at("unmatched").get<std::size_t>();
        result.diagnostics.unmatched_by_word =
            header.at("unmatched_by_word").get<std::map<std::string, std::size_t>>();
        if (stamp) {
            if (header.contains("config_hash"))
                *stamp = Stamp{header["config_hash"].get<std::string>(), header["seed"].get<std::uint64_t>()};
            else
                stamp->reset();
        }
        for (line_no = 2; std::getline(in, line); ++line_no) {
            if (line.empty()) continue;
            const auto j = json::parse(line);
            result.records.push_back({j.at("word").get<std::string>(), j.at("treated_context_id").get<std::int64_t>(),
                                      j.at("treated_sentence_id").get<std::int64_t>(), j.at("treated_label").get<int>(),
                                      j.at("matched_context_id").get<std::int64_t>(),
                                      j.at("matched_sentence_id").get<std::int64_t>(), j.at("matched_label").get<int>(),
                                      j.at("matched_word").get<std::string>(), j.at("similarity").get<double>()});
        }
    } catch (const json::exception& e) {
        throw DataError("malformed matches line " + std::to_string(line_no) + ": " + e.what());
    }
    return result;
}

std::string dump_pairs(std::span<const MatchRecord> records, const std::vector<ContextWindow>& windows) {
    std::unordered_map<std::int64_t, const ContextWindow*> by_id;
    for (const auto& w : windows) by_id.emplace(w.context_id, &w);
    const auto render = [&](std::int64_t id, int label) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("unknown context id " + std::to_string(id));
        const auto& w = *it->second;
        std::string s;
        for (const auto& t : w.left) s += t + " ";
        s += "[" + w.word + "]";
        for (const auto& t : w.right) s += " " + t;
        return s + " (" + std::to_string(label) + ")";
    };
    std::string out;
    for (const auto& r : records) {
        char sim[32];
        std::snprintf(sim, sizeof sim, "%.3f", r.similarity);
        out += r.word + " -> " + r.matched_word + "  sim=" + sim + "\n";
        out += "  " + render(r.treated_context_id, r.treated_label) + "\n";
        out += "  " + render(r.matched_context_id, r.matched_label) + "\n";
    }
    return out;
}

}  // namespace spurious
