#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "spurious/config.hpp"
#include "spurious/error.hpp"
#include "spurious/pipeline.hpp"
#include "spurious/synthetic.hpp"
#include "spurious/text.hpp"

namespace fs = std::filesystem;
using namespace spurious;

namespace {

struct GlobalFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> settings;
    std::string strategy;
    std::string word_model;
    std::string labels;
};

RunConfig build_config(const GlobalFlags& g) {
    RunConfig config;
    if (!g.config_path.empty()) config = load_config(g.config_path);
    for (const auto& kv : g.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
        apply_setting(config, trim(std::string_view(kv).substr(0, eq)), std::string_view(kv).substr(eq + 1));
    }
    if (g.seed) config.seed = *g.seed;
    if (!g.out.empty()) config.out = g.out;
    if (!g.strategy.empty()) config.strategy = g.strategy;
    if (!g.word_model.empty()) config.word_model = g.word_model;
    if (!g.labels.empty()) config.labels = g.labels;
    resolve_paths(config, fs::current_path().string());
    return config;
}

struct SynthFlags {
    std::string dir;
    SyntheticOptions options;
};

void run_synth(const SynthFlags& f, std::optional<std::uint64_t> seed) {
    auto o = f.options;
    if (seed) o.seed = *seed;
    const auto conf = write_synthetic_bundle(f.dir, o);
    std::cout << "synth: " << o.n_sentences << " sentences, " << o.n_spurious << " injected spurious words, config "
              << conf << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Find and remove spurious word features from bag-of-words text classifiers."};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalFlags g;
    std::uint64_t seed_value = 0;
    app.add_option("--config", g.config_path, "key = value settings file");
    auto* seed_opt = app.add_option("--seed", seed_value, "seed for every stochastic step");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--set", g.settings, "override a setting, key=value (repeatable)");
    app.add_option("--strategy", g.strategy, "removal strategy for select (or 'all')");
    app.add_option("--word-model", g.word_model, "word classifier trained on another domain");
    app.add_option("--labels", g.labels, "word labels CSV");

    std::vector<std::pair<CLI::App*, Stage>> stage_commands;
    const std::pair<Stage, const char*> help[] = {
        {Stage::ingest, "parse, balance and split the dataset"},
        {Stage::train_doc, "fit the document classifier and select top words"},
        {Stage::extract, "extract context windows and fallback embeddings"},
        {Stage::match, "match each treated context to its closest counterfactual"},
        {Stage::featurize, "compute word features from the matches"},
        {Stage::annotate, "label top words as spurious or genuine interactively"},
        {Stage::train_word, "cross-validate and fit the word classifier"},
        {Stage::select, "run feature-removal curves and reference baselines"},
        {Stage::report, "summarize every artifact as plain text"},
    };
    for (const auto& [stage, text] : help)
        stage_commands.emplace_back(app.add_subcommand(std::string(to_string(stage)), text), stage);
    auto* run = app.add_subcommand("run", "every non-interactive stage in order");

    SynthFlags synth;
    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset with known spurious words");
    synth_cmd->add_option("--dir", synth.dir, "destination directory")->required();
    synth_cmd->add_option("--domain", synth.options.domain, "token prefix and file stem");
    synth_cmd->add_option("--sentences", synth.options.n_sentences, "number of sentences");
    synth_cmd->add_option("--spurious", synth.options.n_spurious, "number of injected spurious words");
    synth_cmd->add_option("--rho", synth.options.rho, "label agreement rate of spurious words");
    synth_cmd->add_option("--genuine", synth.options.genuine_per_class, "genuine words per class");
    synth_cmd->add_option("--fillers", synth.options.fillers, "filler vocabulary size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (seed_opt->count() > 0) g.seed = seed_value;

    try {
        if (synth_cmd->parsed()) {
            run_synth(synth, g.seed);
            return 0;
        }
        const auto config = build_config(g);
        if (run->parsed()) {
            run_all(config, std::cout);
            return 0;
        }
        for (const auto& [cmd, stage] : stage_commands)
            if (cmd->parsed()) run_stage(stage, config, std::cin, std::cout);
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
