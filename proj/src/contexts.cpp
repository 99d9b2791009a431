#include "spurious/contexts.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "spurious/error.hpp"
#include "spurious/text.hpp"

namespace spurious {

namespace {

using json = nlohmann::json;

constexpr char kMagic[4] = {'C', 'E', 'V', '1'};

template <typename T>
void put_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const unsigned char* p) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
    return v;
}

bool read_exact(std::istream& in, unsigned char* buf, std::size_t n) {
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
    return static_cast<std::size_t>(in.gcount()) == n;
}

}  // namespace

CandidatePool parse_candidate_pool(std::string_view name) {
    if (name == "top_words") return CandidatePool::top_words;
    if (name == "all_positions") return CandidatePool::all_positions;
    throw UsageError("unknown candidate pool '" + std::string(name) + "'");
}

std::string_view to_string(CandidatePool pool) {
    return pool == CandidatePool::top_words ? "top_words" : "all_positions";
}

std::vector<ContextWindow> extract_contexts(std::span<const LabeledSentence> sentences,
                                            const std::vector<TopWord>& top, std::size_t window,
                                            CandidatePool pool) {
    std::unordered_set<std::string> tracked;
    for (const auto& t : top) tracked.insert(t.word);

    std::vector<ContextWindow> out;
    std::int64_t next_id = 0;
    for (const auto& s : sentences) {
        const auto& tok = s.tokens;
        for (std::size_t pos = 0; pos < tok.size(); ++pos) {
            if (pool == CandidatePool::top_words && !tracked.count(tok[pos])) continue;
            ContextWindow w;
            w.context_id = next_id++;
            w.sentence_id = s.id;
            w.word = tok[pos];
            w.position = pos;
            const std::size_t begin = pos >= window ? pos - window : 0;
            const std::size_t end = std::min(tok.size(), pos + 1 + window);
            w.left.assign(tok.begin() + static_cast<std::ptrdiff_t>(begin), tok.begin() + static_cast<std::ptrdiff_t>(pos));
            w.right.assign(tok.begin() + static_cast<std::ptrdiff_t>(pos + 1), tok.begin() + static_cast<std::ptrdiff_t>(end));
            out.push_back(std::move(w));
        }
    }
    return out;
}

void EmbeddingStore::add(std::int64_t context_id, std::span<const float> vec) {
    if (vec.size() != dim_) throw DataError("embedding dimension mismatch for context " + std::to_string(context_id));
    if (row_.count(context_id)) throw DataError("duplicate context_id " + std::to_string(context_id));
    for (float v : vec)
        if (!std::isfinite(v)) throw DataError("non-finite embedding for context " + std::to_string(context_id));
    row_.emplace(context_id, ids_.size());
    ids_.push_back(context_id);
    data_.insert(data_.end(), vec.begin(), vec.end());
}

std::span<const float> EmbeddingStore::get(std::int64_t context_id) const {
    const auto it = row_.find(context_id);
    if (it == row_.end()) throw DataError("no embedding for context " + std::to_string(context_id));
    return row(it->second);
}

void EmbeddingStore::scale(float factor) {
    for (auto& v : data_) v *= factor;
}

std::string encode_embeddings(const EmbeddingStore& store) {
    std::string out(kMagic, 4);
    put_le<std::uint32_t>(out, store.dim());
    put_le<std::uint64_t>(out, store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        put_le<std::uint64_t>(out, static_cast<std::uint64_t>(store.ids()[i]));
        for (float v : store.row(i)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

void save_embeddings(const std::string& path, const EmbeddingStore& store) {
    write_file_atomic(path, encode_embeddings(store));
}

EmbeddingStore read_embeddings(std::istream& in, Provenance provenance) {
    unsigned char header[16];
    if (!read_exact(in, header, 16)) throw DataError("embedding file truncated in header");
    if (std::memcmp(header, kMagic, 4) != 0) throw DataError("bad magic in embedding file (expected CEV1)");
    const auto dim = get_le<std::uint32_t>(header + 4);
    const auto count = get_le<std::uint64_t>(header + 8);
    if (dim == 0) throw DataError("embedding dimension must be positive");

    EmbeddingStore store(dim, provenance);
    std::vector<unsigned char> rec(8 + 4 * static_cast<std::size_t>(dim));
    std::vector<float> vec(dim);
    for (std::uint64_t r = 0; r < count; ++r) {
        if (!read_exact(in, rec.data(), rec.size()))
            throw DataError("embedding file truncated at record " + std::to_string(r));
        const auto id = static_cast<std::int64_t>(get_le<std::uint64_t>(rec.data()));
        for (std::uint32_t d = 0; d < dim; ++d)
            vec[d] = std::bit_cast<float>(get_le<std::uint32_t>(rec.data() + 8 + 4 * d));
        store.add(id, vec);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after embedding records");
    return store;
}

EmbeddingStore load_embeddings(const std::string& path, Provenance provenance) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embedding file " + path);
    return read_embeddings(in, provenance);
}

std::string write_manifest(const std::vector<ContextWindow>& windows) {
    std::string out;
    for (const auto& w : windows) {
        json rec = {{"context_id", w.context_id}, {"sentence_id", w.sentence_id}, {"word", w.word},
                    {"position", w.position}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::vector<ManifestEntry> read_manifest(std::istream& in) {
    std::vector<ManifestEntry> out;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        if (line.empty()) continue;
        try {
            const auto rec = json::parse(line);
            if (rec.contains("artifact")) continue;
            out.push_back({rec.at("context_id").get<std::int64_t>(), rec.at("sentence_id").get<std::int64_t>(),
                           rec.at("word").get<std::string>(), rec.at("position").get<std::size_t>()});
        } catch (const json::exception& e) {
            throw DataError("malformed manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void verify_manifest(const std::vector<ContextWindow>& windows, const std::vector<ManifestEntry>& manifest) {
    if (windows.size() != manifest.size())
        throw DataError("manifest has " + std::to_string(manifest.size()) + " contexts, expected " +
                        std::to_string(windows.size()));
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        const ManifestEntry expect{w.context_id, w.sentence_id, w.word, w.position};
        if (!(expect == manifest[i]))
            throw DataError("manifest disagrees with extracted contexts at line " + std::to_string(i + 1) +
                            " (context_id " + std::to_string(w.context_id) + ")");
    }
}

std::string write_contexts(const std::vector<ContextWindow>& windows, std::size_t window,
                           const std::optional<Stamp>& stamp) {
    json header = {{"artifact", "contexts"}, {"format_version", 1}, {"window", window}, {"count", windows.size()}};
    if (stamp) {
        header["config_hash"] = stamp->config_hash;
        header["seed"] = stamp->seed;
    }
    std::string out = header.dump() + "\n";
    for (const auto& w : windows) {
        json rec = {{"context_id", w.context_id}, {"sentence_id", w.sentence_id}, {"word", w.word},
                    {"position", w.position}, {"left", w.left}, {"right", w.right}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::vector<ContextWindow> read_contexts(std::istream& in, std::optional<Stamp>* stamp) {
    std::vector<ContextWindow> out;
    std::string line;
    std::size_t line_no = 1;
    try {
        if (!std::getline(in, line)) throw DataError("empty contexts file");
        const auto header = json::parse(line);
        if (header.value("artifact", "") != "contexts") throw DataError("not a contexts artifact");
        if (stamp) {
            if (header.contains("config_hash"))
                *stamp = Stamp{header["config_hash"].get<std::string>(), header["seed"].get<std::uint64_t>()};
            else
                stamp->reset();
        }
        for (line_no = 2; std::getline(in, line); ++line_no) {
            if (line.empty()) continue;
            const auto rec = json::parse(line);
            ContextWindow w;
            w.context_id = rec.at("context_id").get<std::int64_t>();
            w.sentence_id = rec.at("sentence_id").get<std::int64_t>();
            w.word = rec.at("word").get<std::string>();
            w.position = rec.at("position").get<std::size_t>();
            w.left = rec.at("left").get<std::vector<std::string>>();
            w.right = rec.at("right").get<std::vector<std::string>>();
            out.push_back(std::move(w));
        }
    } catch (const json::exception& e) {
        throw DataError("malformed contexts line " + std::to_string(line_no) + ": " + e.what());
    }
    return out;
}

double dot(std::span<const float> u, std::span<const float> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += static_cast<double>(u[i]) * static_cast<double>(v[i]);
    return s;
}

double l2_norm(std::span<const float> v) { return std::sqrt(dot(v, v)); }

double cosine(std::span<const float> u, std::span<const float> v, double norm_u, double norm_v) {
    if (u.size() != v.size())
        throw DataError("cosine of vectors with different dimensions (" + std::to_string(u.size()) + " vs " +
                        std::to_string(v.size()) + ")");
    if (norm_u == 0.0 || norm_v == 0.0) return 0.0;
    const double c = dot(u, v) / (norm_u * norm_v);
    return std::clamp(c, -1.0, 1.0);
}

double cosine(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) return cosine(u, v, 1.0, 1.0);
    return cosine(u, v, l2_norm(u), l2_norm(v));
}

}  // namespace spurious
