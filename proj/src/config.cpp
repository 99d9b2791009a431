#include "spurious/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>

#include "spurious/error.hpp"
#include "spurious/rng.hpp"
#include "spurious/text.hpp"

namespace spurious {

namespace fs = std::filesystem;

namespace {

bool parse_bool(std::string_view v, std::string_view key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError("setting " + std::string(key) + " expects true or false");
}

template <typename T>
T parse_number(std::string_view v, std::string_view key) {
    try {
        if constexpr (std::is_floating_point_v<T>)
            return static_cast<T>(parse_double(v, key));
        else {
            const long long n = parse_int(v, key);
            if (n < 0 && std::is_unsigned_v<T>) throw DataError("negative");
            return static_cast<T>(n);
        }
    } catch (const DataError&) {
        throw UsageError("setting " + std::string(key) + " has an invalid value '" + std::string(v) + "'");
    }
}

std::uint64_t parse_seed(std::string_view v) {
    const std::string s(trim(v));
    try {
        std::size_t used = 0;
        const auto n = std::stoull(s, &used);
        if (used != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument("seed");
        return n;
    } catch (const std::exception&) {
        throw UsageError("seed must be an unsigned 64-bit integer, got '" + s + "'");
    }
}

const std::set<std::string>& path_keys() {
    static const std::set<std::string> keys = {"dataset_path", "embeddings_manifest", "labels", "word_model",
                                               "lexicon_positive", "lexicon_negative", "out"};
    return keys;
}

const std::set<std::string>& unhashed_keys() {
    static const std::set<std::string> keys = {"out",          "labels",           "word_model",
                                               "lexicon_positive", "lexicon_negative", "strategy",
                                               "embeddings_manifest"};
    return keys;
}

std::string content_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "missing:" + fs::path(path).filename().string();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "dataset_kind", "dataset_path",   "name",        "seed",          "test_fraction",    "threshold",
        "doc_l2",       "doc_max_iter",   "doc_tol",     "window",        "candidate_pool",   "embeddings",
        "embeddings_manifest", "embedding_dim", "dedup_per_sentence", "labels", "word_l2", "orient_features",
        "folds",        "word_model",     "quota",       "step",          "removal",       "metric",           "group_words",
        "strategy",     "lexicon_positive", "lexicon_negative", "out"};
    return keys;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view raw) {
    const std::string v(trim(raw));
    if (key == "dataset_kind") c.dataset_kind = v;
    else if (key == "dataset_path") c.dataset_path = v;
    else if (key == "name") c.name = v;
    else if (key == "seed") c.seed = parse_seed(v);
    else if (key == "test_fraction") c.test_fraction = parse_number<double>(v, key);
    else if (key == "threshold") c.threshold = parse_number<double>(v, key);
    else if (key == "doc_l2") c.doc_l2 = parse_number<double>(v, key);
    else if (key == "doc_max_iter") c.doc_max_iter = parse_number<int>(v, key);
    else if (key == "doc_tol") c.doc_tol = parse_number<double>(v, key);
    else if (key == "window") c.window = parse_number<std::size_t>(v, key);
    else if (key == "candidate_pool") c.candidate_pool = v;
    else if (key == "embeddings") c.embeddings = v;
    else if (key == "embeddings_manifest") c.embeddings_manifest = v;
    else if (key == "embedding_dim") c.embedding_dim = parse_number<std::uint32_t>(v, key);
    else if (key == "dedup_per_sentence") c.dedup_per_sentence = parse_bool(v, key);
    else if (key == "labels") c.labels = v;
    else if (key == "word_l2") c.word_l2 = parse_number<double>(v, key);
    else if (key == "orient_features") c.orient_features = parse_bool(v, key);
    else if (key == "folds") c.folds = parse_number<int>(v, key);
    else if (key == "word_model") c.word_model = v;
    else if (key == "quota") c.quota = parse_number<std::size_t>(v, key);
    else if (key == "step") c.step = parse_number<std::size_t>(v, key);
    else if (key == "removal") c.removal = v;
    else if (key == "metric") c.metric = v;
    else if (key == "group_words") c.group_words = v;
    else if (key == "strategy") c.strategy = v;
    else if (key == "lexicon_positive") c.lexicon_positive = v;
    else if (key == "lexicon_negative") c.lexicon_negative = v;
    else if (key == "out") c.out = v;
    else throw UsageError("unknown setting '" + std::string(key) + "'");
}

std::string get_setting(const RunConfig& c, std::string_view key) {
    const auto b = [](bool x) { return std::string(x ? "true" : "false"); };
    if (key == "dataset_kind") return c.dataset_kind;
    if (key == "dataset_path") return c.dataset_path;
    if (key == "name") return c.name;
    if (key == "seed") return std::to_string(c.seed);
    if (key == "test_fraction") return format_double(c.test_fraction);
    if (key == "threshold") return format_double(c.threshold);
    if (key == "doc_l2") return format_double(c.doc_l2);
    if (key == "doc_max_iter") return std::to_string(c.doc_max_iter);
    if (key == "doc_tol") return format_double(c.doc_tol);
    if (key == "window") return std::to_string(c.window);
    if (key == "candidate_pool") return c.candidate_pool;
    if (key == "embeddings") return c.embeddings;
    if (key == "embeddings_manifest") return c.embeddings_manifest;
    if (key == "embedding_dim") return std::to_string(c.embedding_dim);
    if (key == "dedup_per_sentence") return b(c.dedup_per_sentence);
    if (key == "labels") return c.labels;
    if (key == "word_l2") return format_double(c.word_l2);
    if (key == "orient_features") return b(c.orient_features);
    if (key == "folds") return std::to_string(c.folds);
    if (key == "word_model") return c.word_model;
    if (key == "quota") return std::to_string(c.quota);
    if (key == "step") return std::to_string(c.step);
    if (key == "removal") return c.removal;
    if (key == "metric") return c.metric;
    if (key == "group_words") return c.group_words;
    if (key == "strategy") return c.strategy;
    if (key == "lexicon_positive") return c.lexicon_positive;
    if (key == "lexicon_negative") return c.lexicon_negative;
    if (key == "out") return c.out;
    throw UsageError("unknown setting '" + std::string(key) + "'");
}

void parse_config(std::istream& in, RunConfig& config, const std::string& base_dir) {
    RunConfig file_values = config;
    std::set<std::string> given;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        const auto hash = line.find('#');
        const auto body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(body.substr(0, eq)));
        apply_setting(file_values, key, body.substr(eq + 1));
        given.insert(key);
    }
    for (const auto& key : given) {
        std::string value = get_setting(file_values, key);
        if (path_keys().count(key) && !value.empty() && fs::path(value).is_relative())
            value = (fs::path(base_dir) / value).lexically_normal().string();
        if (key == "embeddings" && value != "fallback" && !value.empty() && fs::path(value).is_relative())
            value = (fs::path(base_dir) / value).lexically_normal().string();
        apply_setting(config, key, value);
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    RunConfig config;
    parse_config(in, config, fs::absolute(path).parent_path().string());
    return config;
}

void resolve_paths(RunConfig& config, const std::string& base_dir) {
    const auto fix = [&](std::string& p) {
        if (!p.empty() && fs::path(p).is_relative()) p = (fs::path(base_dir) / p).lexically_normal().string();
    };
    fix(config.dataset_path);
    fix(config.embeddings_manifest);
    fix(config.labels);
    fix(config.word_model);
    fix(config.lexicon_positive);
    fix(config.lexicon_negative);
    fix(config.out);
    if (config.embeddings != "fallback") fix(config.embeddings);
}

std::string config_hash(const RunConfig& config) {
    std::string canon;
    for (const auto& key : config_keys()) {
        if (unhashed_keys().count(key)) continue;
        std::string value = get_setting(config, key);
        if (key == "dataset_path" && !value.empty()) value = content_digest(value);
        // The external file usually appears only after extract, so it enters by name.
        if (key == "embeddings" && value != "fallback") value = "external:" + fs::path(value).filename().string();
        canon += key + "=" + value + "\n";
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
    return hex;
}

std::string to_text(const RunConfig& config) {
    std::string out;
    for (const auto& key : config_keys()) out += key + " = " + get_setting(config, key) + "\n";
    return out;
}

}  // namespace spurious
