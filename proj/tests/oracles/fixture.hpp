#pragma once

// Loads featurize_fixture.json into library types.

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spurious/contexts.hpp"
#include "spurious/matcher.hpp"

namespace oracle {

struct FeaturizeFixture {
    std::string word;
    double theta = 0.0;
    std::vector<spurious::MatchRecord> records;
    spurious::EmbeddingStore store;
};

inline FeaturizeFixture load_featurize_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    const auto j = nlohmann::json::parse(in);
    FeaturizeFixture f;
    f.word = j.at("word").get<std::string>();
    f.theta = j.at("theta").get<double>();
    const auto& recs = j.at("records");
    f.store = spurious::EmbeddingStore(static_cast<std::uint32_t>(recs.at(0).at("treated").size()),
                                       spurious::Provenance::external_file);
    for (const auto& r : recs) {
        spurious::MatchRecord m;
        m.word = f.word;
        m.treated_context_id = r.at("treated_id").get<std::int64_t>();
        m.treated_sentence_id = m.treated_context_id;
        m.treated_label = r.at("treated_label").get<int>();
        m.matched_context_id = r.at("matched_id").get<std::int64_t>();
        m.matched_sentence_id = m.matched_context_id;
        m.matched_label = r.at("matched_label").get<int>();
        m.matched_word = "m";
        f.store.add(m.treated_context_id, r.at("treated").get<std::vector<float>>());
        f.store.add(m.matched_context_id, r.at("matched").get<std::vector<float>>());
        m.similarity = spurious::cosine(f.store.get(m.treated_context_id), f.store.get(m.matched_context_id));
        f.records.push_back(m);
    }
    return f;
}

// Output of featurize_reference.py on the fixture, in feature order.
inline constexpr double kFeaturizeReference[15] = {
    0.5,                  // ate
    0.28900788058226934,  // weighted_ate
    0.0,                  // top5_ate
    0.7323072231989779,   // mean_sim
    0.9630262172252545,   // top5_mean_sim
    0.9847319278346618,   // max_sim
    0.5881409390273832,   // std_sim
    0.9737289911202951,   // sim_closest_pos
    0.9847319278346618,   // sim_closest_neg
    1.375,                // doc_coef
    0.36843206632973735,  // diff_norm
    0.25,                 // top_diff_1
    0.21875,              // top_diff_2
    0.15625,              // top_diff_3
    1.75,                 // max_abs_diff
};

}  // namespace oracle
