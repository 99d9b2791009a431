#include "spurious/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>

#include <json.hpp>

#include "spurious/error.hpp"
#include "spurious/rng.hpp"
#include "spurious/text.hpp"

namespace spurious {

namespace {

using json = nlohmann::json;

bool length_filtered(DatasetKind kind) {
    return kind == DatasetKind::kindle || kind == DatasetKind::toxic_comment;
}

std::optional<int> label_for(DatasetKind kind, std::string_view field, std::size_t line_no) {
    const std::string what = "label on line " + std::to_string(line_no + 1);
    switch (kind) {
        case DatasetKind::kindle: {
            const long long rating = parse_int(field, what);
            if (rating < 1 || rating > 5)
                throw DataError("rating out of range 1..5 on line " + std::to_string(line_no + 1));
            if (rating >= 4) return 1;
            if (rating <= 2) return -1;
            return std::nullopt;
        }
        case DatasetKind::toxic_comment: {
            const double score = parse_double(field, what);
            if (!(score >= 0.0 && score <= 1.0))
                throw DataError("toxicity score out of range [0,1] on line " + std::to_string(line_no + 1));
            if (score >= 0.7) return 1;
            if (score <= 0.5) return -1;
            return std::nullopt;
        }
        default: {
            const long long y = parse_int(field, what);
            if (y != 1 && y != -1)
                throw DataError("label must be -1 or 1 on line " + std::to_string(line_no + 1));
            return static_cast<int>(y);
        }
    }
}

}  // namespace

DatasetKind parse_dataset_kind(std::string_view name) {
    if (name == "imdb") return DatasetKind::imdb;
    if (name == "kindle") return DatasetKind::kindle;
    if (name == "toxic_comment") return DatasetKind::toxic_comment;
    if (name == "toxic_tweet") return DatasetKind::toxic_tweet;
    if (name == "generic") return DatasetKind::generic;
    throw UsageError("unknown dataset kind '" + std::string(name) + "'");
}

std::string_view to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::imdb: return "imdb";
        case DatasetKind::kindle: return "kindle";
        case DatasetKind::toxic_comment: return "toxic_comment";
        case DatasetKind::toxic_tweet: return "toxic_tweet";
        case DatasetKind::generic: return "generic";
    }
    return "generic";
}

std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

std::size_t Corpus::count(int label) const {
    return static_cast<std::size_t>(std::count_if(sentences.begin(), sentences.end(),
                                                  [&](const auto& s) { return s.label == label; }));
}

std::vector<LabeledSentence> Corpus::select(Split which) const {
    std::vector<LabeledSentence> out;
    for (const auto& s : sentences)
        if (s.split == which) out.push_back(s);
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Corpus parse_corpus(std::istream& in, DatasetKind kind, std::uint64_t seed, std::string name) {
    Corpus corpus;
    corpus.name = std::move(name);
    std::string line;
    for (std::size_t line_no = 0; std::getline(in, line); ++line_no) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError("malformed record on line " + std::to_string(line_no + 1) +
                            ": expected <label>TAB<text>");
        const auto label = label_for(kind, std::string_view(line).substr(0, tab), line_no);
        if (!label) continue;
        auto tokens = tokenize(std::string_view(line).substr(tab + 1));
        if (length_filtered(kind) && (tokens.size() < kMinTokens || tokens.size() > kMaxTokens))
            continue;
        corpus.sentences.push_back({static_cast<std::int64_t>(line_no), std::move(tokens), *label, Split::train});
    }
    if (corpus.count(1) == 0 || corpus.count(-1) == 0)
        throw DataError("degenerate corpus: a class is empty after filtering");
    return balance(std::move(corpus), seed);
}

Corpus ingest(const std::string& path, DatasetKind kind, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset " + path);
    auto stem = path;
    if (const auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
    return parse_corpus(in, kind, seed, stem);
}

Corpus balance(Corpus corpus, std::uint64_t seed) {
    const std::size_t pos = corpus.count(1);
    const std::size_t neg = corpus.count(-1);
    if (pos == neg) return corpus;
    const int larger = pos > neg ? 1 : -1;
    const std::size_t keep = std::min(pos, neg);

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i)
        if (corpus.sentences[i].label == larger) idx.push_back(i);
    Rng rng(mix_seed(seed, 0xba1a));
    rng.shuffle(std::span(idx));
    std::vector<char> drop(corpus.sentences.size(), 0);
    for (std::size_t i = keep; i < idx.size(); ++i) drop[idx[i]] = 1;

    std::vector<LabeledSentence> kept;
    kept.reserve(2 * keep);
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i)
        if (!drop[i]) kept.push_back(std::move(corpus.sentences[i]));
    corpus.sentences = std::move(kept);
    return corpus;
}

Corpus split(Corpus corpus, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw UsageError("test fraction must lie in (0, 1)");
    const std::size_t n = corpus.sentences.size();
    std::size_t total = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction));
    if (total == 0 && n >= 2) total = 1;

    std::array<std::vector<std::size_t>, 2> members;  // [0] = -1, [1] = +1
    for (std::size_t i = 0; i < n; ++i) members[corpus.sentences[i].label > 0 ? 1 : 0].push_back(i);

    std::array<std::size_t, 2> quota{};
    std::array<double, 2> remainder{};
    std::size_t assigned = 0;
    for (int c = 0; c < 2; ++c) {
        const double exact = static_cast<double>(members[c].size()) * test_fraction;
        quota[c] = static_cast<std::size_t>(std::floor(exact));
        remainder[c] = exact - std::floor(exact);
        assigned += quota[c];
    }
    // Largest remainder first; on equal remainders the positive class goes first.
    while (assigned < total) {
        const int c = remainder[1] >= remainder[0] ? 1 : 0;
        const int pick = quota[c] < members[c].size() ? c : 1 - c;
        ++quota[pick];
        remainder[pick] = -1.0;
        ++assigned;
    }
    // One test item per class when the total allows it.
    for (int c = 0; c < 2; ++c) {
        const int other = 1 - c;
        if (quota[c] == 0 && members[c].size() >= 2 && total >= 2 && quota[other] > 1) {
            ++quota[c];
            --quota[other];
        }
    }

    for (int c = 0; c < 2; ++c) {
        auto idx = members[c];
        Rng rng(mix_seed(seed, 0x5917 + static_cast<std::uint64_t>(c)));
        rng.shuffle(std::span(idx));
        for (std::size_t i = 0; i < idx.size(); ++i)
            corpus.sentences[idx[i]].split = i < quota[c] ? Split::test : Split::train;
    }
    return corpus;
}

std::string write_corpus(const Corpus& corpus, const std::optional<Stamp>& stamp) {
    json header = {{"artifact", "corpus"}, {"format_version", 1}, {"name", corpus.name},
                   {"sentences", corpus.sentences.size()}};
    if (stamp) {
        header["config_hash"] = stamp->config_hash;
        header["seed"] = stamp->seed;
    }
    std::string out = header.dump() + "\n";
    for (const auto& s : corpus.sentences) {
        json rec = {{"id", s.id}, {"label", s.label}, {"split", to_string(s.split)}, {"tokens", s.tokens}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

Corpus read_corpus(std::istream& in, std::optional<Stamp>* stamp) {
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    try {
        if (!std::getline(in, line)) throw DataError("empty corpus file");
        const auto header = json::parse(line);
        if (header.value("artifact", "") != "corpus") throw DataError("not a corpus artifact");
        corpus.name = header.value("name", "");
        if (stamp) {
            if (header.contains("config_hash"))
                *stamp = Stamp{header["config_hash"].get<std::string>(), header["seed"].get<std::uint64_t>()};
            else
                stamp->reset();
        }
        for (line_no = 2; std::getline(in, line); ++line_no) {
            if (line.empty()) continue;
            const auto rec = json::parse(line);
            LabeledSentence s;
            s.id = rec.at("id").get<std::int64_t>();
            s.label = rec.at("label").get<int>();
            if (s.label != 1 && s.label != -1) throw DataError("label must be -1 or 1");
            s.split = rec.at("split").get<std::string>() == "test" ? Split::test : Split::train;
            s.tokens = rec.at("tokens").get<std::vector<std::string>>();
            corpus.sentences.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw DataError("malformed corpus record on line " + std::to_string(line_no) + ": " + e.what());
    }
    return corpus;
}

}  // namespace spurious
