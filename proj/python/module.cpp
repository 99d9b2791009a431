#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "spurious/config.hpp"
#include "spurious/contexts.hpp"
#include "spurious/corpus.hpp"
#include "spurious/error.hpp"
#include "spurious/matcher.hpp"
#include "spurious/metrics.hpp"
#include "spurious/pipeline.hpp"
#include "spurious/synthetic.hpp"
#include "spurious/wordfeat.hpp"

namespace py = pybind11;
using namespace spurious;

namespace {

RunConfig make_config(const std::optional<std::string>& config_path, const std::map<std::string, std::string>& settings) {
    RunConfig c = config_path ? load_config(*config_path) : RunConfig{};
    for (const auto& [k, v] : settings) apply_setting(c, k, v);
    return c;
}

std::map<std::string, std::string> config_dict(const RunConfig& c) {
    std::map<std::string, std::string> out;
    for (const auto& k : config_keys()) out[k] = get_setting(c, k);
    return out;
}

MatchRecord record_from(const py::dict& d) {
    MatchRecord r;
    r.word = d["word"].cast<std::string>();
    r.treated_context_id = d["treated_context_id"].cast<std::int64_t>();
    r.treated_sentence_id = d.contains("treated_sentence_id") ? d["treated_sentence_id"].cast<std::int64_t>() : r.treated_context_id;
    r.treated_label = d["treated_label"].cast<int>();
    r.matched_context_id = d["matched_context_id"].cast<std::int64_t>();
    r.matched_sentence_id = d.contains("matched_sentence_id") ? d["matched_sentence_id"].cast<std::int64_t>() : r.matched_context_id;
    r.matched_label = d["matched_label"].cast<int>();
    r.similarity = d.contains("similarity") ? d["similarity"].cast<double>() : 0.0;
    return r;
}

EmbeddingStore store_from(const std::map<std::int64_t, std::vector<float>>& vectors) {
    if (vectors.empty()) throw DataError("no vectors given");
    EmbeddingStore s(static_cast<std::uint32_t>(vectors.begin()->second.size()), Provenance::external_file);
    for (const auto& [id, v] : vectors) s.add(id, v);
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spurious-word detection pipeline";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

    m.def("tokenize", [](const std::string& text) { return tokenize(text); });
    m.def("stages", [] {
        std::vector<std::string> out;
        for (auto s : all_stages()) out.emplace_back(to_string(s));
        return out;
    });

    m.def("load_config", [](const std::optional<std::string>& path, const std::map<std::string, std::string>& settings) {
        return config_dict(make_config(path, settings));
    }, py::arg("path") = py::none(), py::arg("settings") = std::map<std::string, std::string>{},
          "Settings after applying the file (if any) and then the overrides.");

    m.def("config_hash", [](const std::optional<std::string>& path, const std::map<std::string, std::string>& settings) {
        return config_hash(make_config(path, settings));
    }, py::arg("path") = py::none(), py::arg("settings") = std::map<std::string, std::string>{});

    m.def("run_stage", [](const std::string& stage, const std::optional<std::string>& path,
                          const std::map<std::string, std::string>& settings, const std::string& answers) {
        const auto s = parse_stage(stage);
        const auto c = make_config(path, settings);
        std::istringstream in(answers);
        std::ostringstream log;
        {
            py::gil_scoped_release release;
            run_stage(s, c, in, log);
        }
        return log.str();
    }, py::arg("stage"), py::arg("config") = py::none(), py::arg("settings") = std::map<std::string, std::string>{},
          py::arg("answers") = "", "Runs one stage and returns its log. `answers` feeds the annotate prompt.");

    m.def("run_all", [](const std::optional<std::string>& path, const std::map<std::string, std::string>& settings) {
        const auto c = make_config(path, settings);
        std::ostringstream log;
        {
            py::gil_scoped_release release;
            run_all(c, log);
        }
        return log.str();
    }, py::arg("config") = py::none(), py::arg("settings") = std::map<std::string, std::string>{});

    m.def("write_synthetic_bundle", [](const std::string& dir, const std::string& domain, std::size_t sentences,
                                       std::size_t spurious, double rho, std::uint64_t seed) {
        SyntheticOptions o;
        o.domain = domain;
        o.n_sentences = sentences;
        o.n_spurious = spurious;
        o.rho = rho;
        o.seed = seed;
        return write_synthetic_bundle(dir, o);
    }, py::arg("dir"), py::arg("domain") = "a", py::arg("sentences") = 2000, py::arg("spurious") = 20,
          py::arg("rho") = 0.9, py::arg("seed") = 1, "Writes a synthetic dataset and returns its config path.");

    m.def("load_embeddings", [](const std::string& path) {
        const auto s = load_embeddings(path);
        std::map<std::int64_t, std::vector<float>> out;
        for (auto id : s.ids()) {
            const auto v = s.get(id);
            out[id] = std::vector<float>(v.begin(), v.end());
        }
        return py::make_tuple(s.dim(), out);
    }, "Returns (dim, {context_id: vector}).");

    m.def("save_embeddings", [](const std::string& path, const std::map<std::int64_t, std::vector<float>>& vectors) {
        save_embeddings(path, store_from(vectors));
    });

    m.def("cosine", [](const std::vector<float>& u, const std::vector<float>& v) { return cosine(u, v); });
    m.def("roc_auc", [](const std::vector<double>& s, const std::vector<int>& y) { return roc_auc(s, y); });

    m.def("ate", [](const std::vector<py::dict>& records) {
        std::vector<MatchRecord> r;
        for (const auto& d : records) r.push_back(record_from(d));
        return ate(r).tau;
    });

    m.def("featurize_word", [](const std::string& word, const std::vector<py::dict>& records,
                               const std::map<std::int64_t, std::vector<float>>& vectors, double theta) {
        std::vector<MatchRecord> r;
        for (const auto& d : records) r.push_back(record_from(d));
        const auto store = store_from(vectors);
        for (auto& x : r)
            if (x.similarity == 0.0) x.similarity = cosine(store.get(x.treated_context_id), store.get(x.matched_context_id));
        const auto v = featurize_word(word, r, store, theta);
        py::dict out;
        for (std::size_t j = 0; j < kNumWordFeatures; ++j) out[py::str(std::string(kFeatureNames[j]))] = v.f[j];
        return out;
    }, py::arg("word"), py::arg("records"), py::arg("vectors"), py::arg("theta"),
          "Records are dicts with word, treated/matched context ids and labels; a missing similarity is "
          "computed from the vectors.");

    m.def("feature_names", [] {
        std::vector<std::string> out;
        for (auto n : kFeatureNames) out.emplace_back(n);
        return out;
    });
}
