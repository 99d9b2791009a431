#include "spurious/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "spurious/contexts.hpp"
#include "spurious/corpus.hpp"
#include "spurious/docmodel.hpp"
#include "spurious/error.hpp"
#include "spurious/matcher.hpp"
#include "spurious/metrics.hpp"
#include "spurious/robustness.hpp"
#include "spurious/text.hpp"
#include "spurious/wordclf.hpp"
#include "spurious/wordfeat.hpp"

namespace spurious {

namespace fs = std::filesystem;

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::ingest, "ingest"},       {Stage::train_doc, "train-doc"},   {Stage::extract, "extract"},
    {Stage::match, "match"},         {Stage::featurize, "featurize"},   {Stage::annotate, "annotate"},
    {Stage::train_word, "train-word"}, {Stage::select, "select"},       {Stage::report, "report"},
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string stamp_text(const Stamp& s) { return "config_hash " + s.config_hash + " seed " + std::to_string(s.seed); }

struct Ctx {
    const RunConfig& cfg;
    Stamp stamp;
    fs::path out;
    std::ostream& log;

    std::string path(const char* name) const { return (out / name).string(); }

    std::string require(const std::string& name, Stage producer) const {
        const auto p = (out / name).string();
        if (!fs::exists(p))
            throw DataError("missing " + p + "; run the '" + std::string(to_string(producer)) + "' stage first");
        return p;
    }

    void check(const std::string& name, Stage producer, const std::optional<Stamp>& s) const {
        const std::string rerun = "; rerun the '" + std::string(to_string(producer)) + "' stage";
        if (!s) throw DataError(name + " carries no config stamp" + rerun);
        if (*s != stamp)
            throw DataError(name + " was written under " + stamp_text(*s) + " but the current run has " +
                            stamp_text(stamp) + rerun);
    }

    template <typename Reader>
    auto load(const std::string& name, Stage producer, Reader reader) const {
        std::ifstream in(require(name, producer), std::ios::binary);
        std::optional<Stamp> s;
        auto value = reader(in, &s);
        check(name, producer, s);
        return value;
    }

    void write(const char* name, const std::string& content) const { write_file_atomic(path(name), content); }
};

Corpus load_corpus(const Ctx& c) {
    return c.load(files::corpus, Stage::ingest, [](std::istream& in, auto* s) { return read_corpus(in, s); });
}
DocModel load_doc_model(const Ctx& c) {
    return c.load(files::doc_model, Stage::train_doc, [](std::istream& in, auto* s) { return read_doc_model(in, s); });
}
std::vector<TopWord> load_top_words(const Ctx& c) {
    return c.load(files::top_words, Stage::train_doc, [](std::istream& in, auto* s) { return read_top_words(in, s); });
}
std::vector<ContextWindow> load_contexts(const Ctx& c) {
    return c.load(files::contexts, Stage::extract, [](std::istream& in, auto* s) { return read_contexts(in, s); });
}
MatchResult load_matches(const Ctx& c) {
    return c.load(files::matches, Stage::match, [](std::istream& in, auto* s) { return read_matches(in, s); });
}
std::vector<WordFeatureVector> load_features(const Ctx& c) {
    return c.load(files::features, Stage::featurize,
                  [](std::istream& in, auto* s) { return read_features_csv(in, s); });
}
std::vector<std::pair<std::string, double>> load_predictions(const Ctx& c) {
    return c.load(files::predictions, Stage::train_word,
                  [](std::istream& in, auto* s) { return read_predictions(in, s); });
}

std::optional<Stamp> first_line_stamp(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    return parse_stamp_comment(line);
}

EmbeddingStore load_store(const Ctx& c, const std::vector<ContextWindow>& windows) {
    if (c.cfg.embeddings == "fallback") {
        const auto path = c.require(files::embeddings, Stage::extract);
        c.check(files::embeddings, Stage::extract, first_line_stamp(c.require(files::embeddings_stamp, Stage::extract)));
        return load_embeddings(path, Provenance::fallback);
    }
    if (!c.cfg.embeddings_manifest.empty()) {
        std::ifstream in(c.cfg.embeddings_manifest);
        if (!in) throw DataError("cannot open embedding manifest " + c.cfg.embeddings_manifest);
        verify_manifest(windows, read_manifest(in));
    }
    auto store = load_embeddings(c.cfg.embeddings, Provenance::external_file);
    for (const auto& w : windows)
        if (!store.contains(w.context_id))
            throw DataError("embedding file " + c.cfg.embeddings + " has no vector for context " +
                            std::to_string(w.context_id) + "; re-export it from " + c.path(files::manifest));
    return store;
}

Metric resolve_metric(const RunConfig& cfg) {
    if (cfg.metric != "auto") return parse_metric(cfg.metric);
    const auto kind = parse_dataset_kind(cfg.dataset_kind);
    return kind == DatasetKind::toxic_comment || kind == DatasetKind::toxic_tweet ? Metric::accuracy : Metric::auc;
}

DocTrainOptions doc_options(const RunConfig& cfg) {
    DocTrainOptions o;
    o.l2 = cfg.doc_l2;
    o.max_iter = cfg.doc_max_iter;
    o.tol = cfg.doc_tol;
    return o;
}

WordClfOptions word_options(const RunConfig& cfg) {
    WordClfOptions o;
    o.l2 = cfg.word_l2;
    o.orient = cfg.orient_features;
    return o;
}

std::optional<std::vector<WordLabel>> load_labels(const RunConfig& cfg) {
    const auto path = labels_path(cfg);
    if (!fs::exists(path)) return std::nullopt;
    std::ifstream in(path);
    if (!in) throw DataError("cannot open labels file " + path);
    return read_labels_csv(in);
}

std::string sentence_text(const LabeledSentence& s) { return join(s.tokens, " "); }

// ---- stages ---------------------------------------------------------------

void stage_ingest(const Ctx& c) {
    if (c.cfg.dataset_path.empty()) throw UsageError("dataset_path is not set");
    auto corpus = ingest(c.cfg.dataset_path, parse_dataset_kind(c.cfg.dataset_kind), c.cfg.seed);
    if (!c.cfg.name.empty()) corpus.name = c.cfg.name;
    corpus = split(std::move(corpus), c.cfg.test_fraction, c.cfg.seed);
    c.write(files::corpus, write_corpus(corpus, c.stamp));
    const auto test = corpus.select(Split::test).size();
    c.log << "ingest: " << corpus.sentences.size() << " sentences (" << corpus.sentences.size() - test
          << " train, " << test << " test)\n";
}

void stage_train_doc(const Ctx& c) {
    const auto corpus = load_corpus(c);
    const auto train = corpus.select(Split::train);
    const auto model = train_doc(train, doc_options(c.cfg));
    const auto top = top_words(model, c.cfg.threshold);
    if (top.empty())
        throw DataError("no word has |coef| >= " + format_double(c.cfg.threshold) + "; lower the threshold");
    c.write(files::doc_model, write_doc_model(model, c.stamp));
    c.write(files::top_words, write_top_words(top, c.stamp));
    c.log << "train-doc: vocabulary " << model.vocab.size() << ", " << top.size() << " top words\n";
}

void stage_extract(const Ctx& c) {
    const auto corpus = load_corpus(c);
    const auto top = load_top_words(c);
    const auto train = corpus.select(Split::train);
    const auto windows = extract_contexts(train, top, c.cfg.window, parse_candidate_pool(c.cfg.candidate_pool));
    c.write(files::contexts, write_contexts(windows, c.cfg.window, c.stamp));
    c.write(files::manifest, write_manifest(windows));
    if (c.cfg.embeddings == "fallback") {
        FallbackOptions o;
        o.dim = c.cfg.embedding_dim;
        o.seed = c.cfg.seed;
        const auto store = fallback_embed(train, windows, o);
        c.write(files::embeddings, encode_embeddings(store));
        c.write(files::embeddings_stamp, stamp_comment(c.stamp) + "\n");
        c.log << "extract: " << windows.size() << " contexts, fallback embeddings dim " << store.dim() << "\n";
    } else {
        c.log << "extract: " << windows.size() << " contexts; export vectors for " << c.path(files::manifest)
              << " to " << c.cfg.embeddings << "\n";
    }
}

void stage_match(const Ctx& c) {
    const auto corpus = load_corpus(c);
    const auto top = load_top_words(c);
    const auto windows = load_contexts(c);
    const auto store = load_store(c, windows);
    const auto train = corpus.select(Split::train);
    MatchOptions o;
    o.dedup_per_sentence = c.cfg.dedup_per_sentence;
    const auto result = match_all(top, windows, store, SentenceLookup(train), o);
    c.write(files::matches, write_matches(result, c.stamp));
    c.write(files::pairs, stamp_comment(c.stamp) + "\n" + dump_pairs(result.records, windows));
    std::set<std::int64_t> sentences;
    for (const auto& r : result.records) sentences.insert(r.treated_sentence_id);
    c.log << "match: " << result.records.size() << " pairs over " << sentences.size() << " sentences, "
          << result.diagnostics.unmatched << " of " << result.diagnostics.treated << " treated contexts unmatched\n";
}

void stage_featurize(const Ctx& c) {
    const auto model = load_doc_model(c);
    const auto matches = load_matches(c);
    const auto windows = load_contexts(c);
    const auto store = load_store(c, windows);
    std::vector<WordFeatureVector> vectors;
    for (const auto& [word, records] : group_by_word(matches.records))
        vectors.push_back(featurize_word(word, records, store, model.coefficient(word)));
    if (vectors.empty()) throw DataError("no matched words to featurize");
    c.write(files::features, write_features_csv(vectors, c.stamp));
    if (vectors.size() >= 2) c.write(files::scaler, stamp_comment(c.stamp) + "\n" + write_scaler(standardize(vectors).scaler));
    c.log << "featurize: " << vectors.size() << " words\n";
}

void stage_annotate(const Ctx& c, std::istream& in) {
    const auto corpus = load_corpus(c);
    const auto top = load_top_words(c);
    const auto matches = load_matches(c);
    const auto windows = load_contexts(c);
    const auto path = labels_path(c.cfg);
    std::set<std::string> labeled;
    if (const auto labels = load_labels(c.cfg))
        for (const auto& l : *labels) labeled.insert(l.word);

    std::vector<const TopWord*> todo;
    for (const auto& t : top)
        if (!labeled.count(t.word)) todo.push_back(&t);
    if (todo.empty()) {
        c.log << "annotate: every top word is labeled\n";
        return;
    }

    std::map<std::string, std::vector<MatchRecord>> by_word;
    for (const auto& r : matches.records) by_word[r.word].push_back(r);
    const auto train = corpus.select(Split::train);

    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    std::ofstream labels_out(path, std::ios::app);
    if (!labels_out) throw DataError("cannot append to labels file " + path);
    if (fresh) labels_out << "word,label,note\n" << std::flush;

    std::size_t done = 0;
    for (std::size_t i = 0; i < todo.size(); ++i) {
        const auto& t = *todo[i];
        c.log << "\n[" << i + 1 << "/" << todo.size() << "] " << t.word << "  coef " << fmt(t.coef, 3) << " (class "
              << (t.correlated_class > 0 ? "+1" : "-1") << ")";
        auto& recs = by_word[t.word];
        if (!recs.empty()) c.log << "  ate " << fmt(ate(recs).tau, 3) << " over " << recs.size() << " pairs";
        c.log << "\n  examples:\n";
        std::size_t shown = 0;
        for (const auto& s : train) {
            if (shown == 3) break;
            if (std::find(s.tokens.begin(), s.tokens.end(), t.word) == s.tokens.end()) continue;
            c.log << "    (" << (s.label > 0 ? "+1" : "-1") << ") " << sentence_text(s) << "\n";
            ++shown;
        }
        std::stable_sort(recs.begin(), recs.end(), [](const MatchRecord& a, const MatchRecord& b) {
            return a.similarity > b.similarity;
        });
        const std::size_t n_pairs = std::min<std::size_t>(3, recs.size());
        if (n_pairs > 0) {
            c.log << "  closest matches:\n";
            std::istringstream pairs(dump_pairs(std::span(recs).first(n_pairs), windows));
            for (std::string line; std::getline(pairs, line);) c.log << "    " << line << "\n";
        }

        while (true) {
            c.log << "  [s]purious / [g]enuine / skip / quit: " << std::flush;
            std::string answer;
            if (!std::getline(in, answer)) {
                c.log << "\nannotate: " << done << " labels added\n";
                return;
            }
            const auto a = std::string(trim(answer));
            if (a == "s" || a == "g") {
                labels_out << format_label_row({t.word, a == "s" ? WordClass::spurious : WordClass::genuine, ""})
                           << std::flush;
                ++done;
                break;
            }
            if (a == "skip") break;
            if (a == "quit" || a == "q") {
                c.log << "annotate: " << done << " labels added\n";
                return;
            }
        }
    }
    c.log << "annotate: " << done << " labels added\n";
}

void stage_train_word(const Ctx& c) {
    const auto features = load_features(c);
    const auto labels = load_labels(c.cfg);
    if (!labels)
        throw DataError("no labels at " + labels_path(c.cfg) + "; run the 'annotate' stage or set labels = <csv>");
    const auto opts = word_options(c.cfg);
    const auto cv = cross_validate(features, *labels, c.cfg.folds, c.cfg.seed, opts);
    const auto model = train_word_clf(features, *labels, opts);

    std::map<std::string, double> held_out;
    for (std::size_t i = 0; i < cv.words.size(); ++i) held_out[cv.words[i]] = cv.held_out[i];
    std::vector<std::pair<std::string, double>> scores;
    for (const auto& f : features) {
        const auto it = held_out.find(f.word);
        scores.emplace_back(f.word, it != held_out.end() ? it->second : model.predict(f.f));
    }
    c.write(files::word_model, write_word_model(model, c.stamp));
    c.write(files::predictions, write_predictions(rank_spurious(std::move(scores)), c.stamp));

    std::string cv_csv = stamp_comment(c.stamp) + "\nword,label,fold,p_spurious\n";
    for (std::size_t i = 0; i < cv.words.size(); ++i)
        cv_csv += cv.words[i] + "," + (cv.y[i] > 0 ? "spurious" : "genuine") + "," + std::to_string(cv.fold[i]) +
                  "," + format_double(cv.held_out[i]) + "\n";
    c.write(files::cv, cv_csv);

    const auto n_spur = static_cast<std::size_t>(std::count(cv.y.begin(), cv.y.end(), 1));
    std::string eval = stamp_comment(c.stamp) + "\n";
    eval += "labeled_spurious=" + std::to_string(n_spur) + "\n";
    eval += "labeled_genuine=" + std::to_string(cv.y.size() - n_spur) + "\n";
    eval += "unlabeled=" + std::to_string(features.size() - cv.y.size()) + "\n";
    eval += "folds=" + std::to_string(c.cfg.folds) + "\n";
    eval += "cv_auc=" + format_double(cv.auc) + "\n";
    if (cv.auc_positive_words) eval += "cv_auc_positive_words=" + format_double(*cv.auc_positive_words) + "\n";
    if (cv.auc_negative_words) eval += "cv_auc_negative_words=" + format_double(*cv.auc_negative_words) + "\n";
    c.log << "train-word: " << cv.y.size() << " labeled words, " << c.cfg.folds << "-fold AUC " << fmt(cv.auc) << "\n";

    if (!c.cfg.word_model.empty()) {
        std::ifstream in(c.cfg.word_model);
        if (!in) throw DataError("cannot open word model " + c.cfg.word_model);
        const auto source = read_word_model(in);
        const auto probs = transfer(source, features);
        std::vector<std::pair<std::string, double>> scored;
        for (std::size_t i = 0; i < features.size(); ++i) scored.emplace_back(features[i].word, probs[i]);
        c.write(files::transfer_predictions, write_predictions(rank_spurious(scored), c.stamp));
        const auto rows = join_labels(features, *labels);
        std::vector<double> s;
        for (const auto& x : rows.x) s.push_back(source.predict(x));
        const double auc = roc_auc(s, rows.y);
        eval += "transfer_source=" + fs::path(c.cfg.word_model).filename().string() + "\n";
        eval += "transfer_auc=" + format_double(auc) + "\n";
        c.log << "train-word: transfer AUC " << fmt(auc) << " from " << c.cfg.word_model << "\n";
    }
    c.write(files::word_eval, eval);
}

std::vector<TopWord> tracked_words(const RunConfig& cfg, const std::vector<TopWord>& top,
                                   const std::optional<std::vector<WordLabel>>& labels) {
    std::set<std::string> spurious;
    if (labels)
        for (const auto& l : *labels)
            if (l.label == WordClass::spurious) spurious.insert(l.word);
    std::vector<TopWord> labeled;
    for (const auto& t : top)
        if (spurious.count(t.word)) labeled.push_back(t);
    if (cfg.group_words == "top") return top;
    if (cfg.group_words == "spurious") {
        if (labeled.empty()) throw DataError("group_words = spurious but no labeled spurious word is a top word");
        return labeled;
    }
    if (cfg.group_words != "auto") throw UsageError("group_words must be auto, spurious or top");
    return labeled.empty() ? top : labeled;
}

void stage_select(const Ctx& c) {
    const auto corpus = load_corpus(c);
    const auto top = load_top_words(c);
    const auto labels = load_labels(c.cfg);
    const auto metric = resolve_metric(c.cfg);
    const auto train = corpus.select(Split::train);
    const auto test = corpus.select(Split::test);
    const auto tracked = tracked_words(c.cfg, top, labels);
    const auto groups = build_groups(test, tracked, c.cfg.quota, c.cfg.seed);
    if (groups.all.empty()) throw DataError("no test sentence contains a tracked word");
    if (c.cfg.step < 1) throw UsageError("step must be at least 1");
    parse_removal(c.cfg.removal);

    std::string groups_csv = stamp_comment(c.stamp) + "\nword,class,majority,minority\n";
    for (const auto& g : groups.words)
        groups_csv += g.word + "," + std::to_string(g.correlated_class) + "," + std::to_string(g.majority_ids.size()) +
                      "," + std::to_string(g.minority_ids.size()) + "\n";
    c.write(files::groups, groups_csv);
    if (!groups.skipped.empty())
        c.log << "select: " << groups.skipped.size() << " tracked words absent from the test split\n";

    const bool has_spurious_labels =
        labels && std::any_of(labels->begin(), labels->end(), [](const WordLabel& l) { return l.label == WordClass::spurious; });
    std::vector<Strategy> strategies;
    bool want_lexicon = false;
    if (c.cfg.strategy == "all") {
        if (has_spurious_labels) strategies.push_back(Strategy::oracle);
        strategies.push_back(Strategy::random);
        if (fs::exists(c.path(files::predictions))) strategies.push_back(Strategy::predicted_same_domain);
        if (!c.cfg.word_model.empty()) strategies.push_back(Strategy::predicted_transfer);
    } else {
        const auto s = parse_strategy(c.cfg.strategy);
        if (s == Strategy::lexicon) {
            if (c.cfg.lexicon_positive.empty() && c.cfg.lexicon_negative.empty())
                throw UsageError("strategy lexicon needs lexicon_positive and/or lexicon_negative");
            want_lexicon = true;
        } else {
            strategies.push_back(s);
        }
    }

    std::vector<std::pair<std::string, double>> predictions, transferred;
    PlanInputs inputs;
    inputs.top_words = &top;
    if (labels) inputs.labels = &*labels;
    CurveOptions curve;
    curve.step = c.cfg.step;
    curve.removal = parse_removal(c.cfg.removal);
    curve.metric = metric;
    curve.doc = doc_options(c.cfg);

    for (const auto s : strategies) {
        PlanInputs in = inputs;
        if (s == Strategy::predicted_same_domain) {
            predictions = load_predictions(c);
            in.predictions = &predictions;
        } else if (s == Strategy::predicted_transfer) {
            if (c.cfg.word_model.empty()) throw UsageError("strategy predicted_transfer needs --word-model");
            std::ifstream min(c.cfg.word_model);
            if (!min) throw DataError("cannot open word model " + c.cfg.word_model);
            const auto model = read_word_model(min);
            const auto features = load_features(c);
            const auto probs = transfer(model, features);
            transferred.clear();
            for (std::size_t i = 0; i < features.size(); ++i) transferred.emplace_back(features[i].word, probs[i]);
            in.predictions = &transferred;
        } else if (s == Strategy::oracle && !has_spurious_labels) {
            throw DataError("strategy oracle needs labeled spurious words in " + labels_path(c.cfg));
        }
        const auto plan = make_plan(s, in, c.cfg.seed);
        const auto points = run_curve(train, test, plan, groups, curve);
        const auto name = std::string(to_string(s));
        write_file_atomic(c.path(("curves_" + name + ".csv").c_str()), write_curve_csv(name, points, c.stamp));
        c.log << "select: " << name << " curve, " << points.size() << " points over " << plan.words.size()
              << " words\n";
    }

    std::vector<std::pair<std::string, CurvePoint>> refs;
    try {
        refs.emplace_back("downsample",
                          downsample_baseline(train, test, tracked, groups, c.cfg.seed, metric, curve.doc));
    } catch (const DataError& e) {
        c.log << "select: downsample reference skipped: " << e.what() << "\n";
    }
    if (!c.cfg.lexicon_positive.empty() || !c.cfg.lexicon_negative.empty() || want_lexicon) {
        std::vector<std::string> lexicon;
        for (const auto* p : {&c.cfg.lexicon_positive, &c.cfg.lexicon_negative})
            if (!p->empty()) {
                auto words = load_lexicon(*p);
                lexicon.insert(lexicon.end(), words.begin(), words.end());
            }
        refs.emplace_back("lexicon", lexicon_baseline(train, test, groups, lexicon, metric, curve.doc));
    }
    c.write(files::references, write_references_csv(refs, c.stamp));
}

// ---- report ---------------------------------------------------------------

std::map<std::string, std::string> read_key_values(const std::string& path, std::optional<Stamp>* stamp) {
    std::ifstream in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first && stamp) *stamp = parse_stamp_comment(line);
        first = false;
        const auto eq = line.find('=');
        if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

void stage_report(const Ctx& c) {
    // Gather every artifact's stamp before reading anything else.
    std::vector<std::pair<std::string, std::optional<Stamp>>> stamps;
    const auto note = [&](const std::string& name, const std::optional<Stamp>& s) { stamps.emplace_back(name, s); };

    std::optional<Stamp> s;
    const auto corpus = [&] {
        std::ifstream in(c.require(files::corpus, Stage::ingest));
        return read_corpus(in, &s);
    }();
    note(files::corpus, s);
    const auto read_stamped = [&](const char* name, Stage producer, auto reader) {
        std::ifstream in(c.require(name, producer));
        auto v = reader(in, &s);
        note(name, s);
        return v;
    };
    const auto model = read_stamped(files::doc_model, Stage::train_doc, [](auto& in, auto* st) { return read_doc_model(in, st); });
    const auto top = read_stamped(files::top_words, Stage::train_doc, [](auto& in, auto* st) { return read_top_words(in, st); });
    const auto matches = read_stamped(files::matches, Stage::match, [](auto& in, auto* st) { return read_matches(in, st); });
    const auto features =
        read_stamped(files::features, Stage::featurize, [](auto& in, auto* st) { return read_features_csv(in, st); });

    std::optional<std::map<std::string, std::string>> eval;
    std::vector<std::pair<std::string, double>> predictions;
    if (fs::exists(c.path(files::word_eval))) {
        eval = read_key_values(c.path(files::word_eval), &s);
        note(files::word_eval, s);
        predictions = read_stamped(files::predictions, Stage::train_word,
                                   [](auto& in, auto* st) { return read_predictions(in, st); });
    }

    std::vector<std::pair<std::string, std::vector<CurveRow>>> curves;
    std::vector<std::string> curve_files;
    for (const auto& entry : fs::directory_iterator(c.out)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("curves_", 0) == 0 && entry.path().extension() == ".csv") curve_files.push_back(name);
    }
    std::sort(curve_files.begin(), curve_files.end());
    for (const auto& name : curve_files) {
        std::ifstream in(c.path(name.c_str()));
        curves.emplace_back(name, read_curve_csv(in, &s));
        note(name, s);
    }
    std::vector<std::pair<std::string, CurvePoint>> refs;
    if (fs::exists(c.path(files::references))) {
        std::ifstream in(c.path(files::references));
        std::string line;
        std::getline(in, line);
        note(files::references, parse_stamp_comment(line));
        while (std::getline(in, line)) {
            if (line.empty() || line.rfind("name,", 0) == 0) continue;
            const auto parts = split_char(line, ',');
            if (parts.size() != 3) throw DataError("malformed row in " + std::string(files::references));
            CurvePoint p;
            p.metric = parse_metric(parts[1]);
            p.all = parse_double(parts[2], "reference score");
            refs.emplace_back(parts[0], p);
        }
    }

    for (const auto& [name, st] : stamps) {
        if (!st) throw DataError(name + " carries no config stamp");
        if (*st != *stamps.front().second)
            throw DataError("refusing to mix artifacts: " + stamps.front().first + " has " +
                            stamp_text(*stamps.front().second) + ", " + name + " has " + stamp_text(*st));
    }
    if (*stamps.front().second != c.stamp)
        throw DataError("artifacts in " + c.out.string() + " were written under " + stamp_text(*stamps.front().second) +
                        " but the current run has " + stamp_text(c.stamp));

    const auto metric = resolve_metric(c.cfg);
    const auto train = corpus.select(Split::train);
    const auto test = corpus.select(Split::test);
    std::ostringstream r;
    r << "dataset " << corpus.name << " (" << c.cfg.dataset_kind << ")\n";
    r << stamp_text(c.stamp) << "\n\n";

    r << "corpus\n";
    r << "  sentences " << corpus.sentences.size() << "  train " << train.size() << "  test " << test.size()
      << "  positive " << corpus.count(1) << "  negative " << corpus.count(-1) << "\n\n";

    const auto n_pos = std::count_if(top.begin(), top.end(), [](const TopWord& t) { return t.correlated_class > 0; });
    r << "document classifier\n";
    r << "  vocabulary " << model.vocab.size() << "  top words " << top.size() << " (|coef| >= "
      << format_double(c.cfg.threshold) << "; " << n_pos << " positive, " << top.size() - n_pos << " negative)\n";
    try {
        r << "  test " << to_string(metric) << " " << fmt(evaluate(model, test, metric)) << "\n\n";
    } catch (const DataError& e) {
        r << "  test " << to_string(metric) << " unavailable: " << e.what() << "\n\n";
    }

    std::set<std::int64_t> matched_sentences;
    for (const auto& m : matches.records) matched_sentences.insert(m.treated_sentence_id);
    r << "matching\n";
    r << "  treated contexts " << matches.diagnostics.treated << "  pairs " << matches.records.size()
      << "  unmatched " << matches.diagnostics.unmatched << "  matched sentences " << matched_sentences.size()
      << "  words with features " << features.size() << "\n\n";

    if (eval) {
        const auto get = [&](const std::string& k) {
            const auto it = eval->find(k);
            return it == eval->end() ? std::string("n/a") : it->second;
        };
        const auto num = [&](const std::string& k) {
            const auto v = get(k);
            return v == "n/a" ? v : fmt(parse_double(v, k));
        };
        r << "word classifier\n";
        r << "  labeled spurious " << get("labeled_spurious") << "  genuine " << get("labeled_genuine")
          << "  unlabeled " << get("unlabeled") << "\n";
        r << "  " << get("folds") << "-fold auc " << num("cv_auc") << "  (positive-class words "
          << num("cv_auc_positive_words") << ", negative-class words " << num("cv_auc_negative_words") << ")\n";
        if (eval->count("transfer_auc"))
            r << "  transfer auc " << num("transfer_auc") << " from " << get("transfer_source") << "\n";
        r << "  most likely spurious:";
        for (std::size_t i = 0; i < std::min<std::size_t>(10, predictions.size()); ++i)
            r << " " << predictions[i].first << " (" << fmt(predictions[i].second, 2) << ")";
        r << "\n\n";
    }

    if (!curves.empty() || !refs.empty()) {
        r << "feature selection (" << to_string(metric) << ", " << c.cfg.removal << ")\n";
        char line[256];
        std::snprintf(line, sizeof line, "  %-22s %8s %8s %8s %5s %9s %9s\n", "strategy", "minor@0", "best",
                      "gain", "at k", "major@0", "major@k");
        r << line;
        for (const auto& [name, rows] : curves) {
            if (rows.empty()) continue;
            const auto& base = rows.front().point;
            std::size_t best = 0;
            for (std::size_t i = 1; i < rows.size(); ++i)
                if (rows[i].point.minority > rows[best].point.minority) best = i;
            const auto& b = rows[best].point;
            std::snprintf(line, sizeof line, "  %-22s %8.4f %8.4f %+8.4f %5zu %9.4f %9.4f\n",
                          rows.front().strategy.c_str(), base.minority, b.minority, b.minority - base.minority,
                          b.k_removed, base.majority, b.majority);
            r << line;
        }
        for (const auto& [name, p] : refs) {
            std::snprintf(line, sizeof line, "  reference %-12s all %.4f\n", name.c_str(), p.all);
            r << line;
        }
    }

    const auto text = r.str();
    c.write(files::report, text);
    c.log << text;
}

}  // namespace

Stage parse_stage(std::string_view name) {
    for (const auto& [s, n] : kStageNames)
        if (n == name) return s;
    throw UsageError("unknown stage '" + std::string(name) + "'");
}

std::string_view to_string(Stage stage) {
    for (const auto& [s, n] : kStageNames)
        if (s == stage) return n;
    return "unknown";
}

const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages = [] {
        std::vector<Stage> v;
        for (const auto& [s, n] : kStageNames) v.push_back(s);
        return v;
    }();
    return stages;
}

OutputLock::OutputLock(const std::string& out_dir) {
    fs::create_directories(out_dir);
    path_ = (fs::path(out_dir) / files::lock).string();
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        const int err = errno;
        const auto p = path_;
        path_.clear();
        if (err == EEXIST)
            throw DataError("output directory " + out_dir + " is in use by another invocation (remove " + p +
                            " if it is stale)");
        throw DataError("cannot create lock " + p + ": " + std::strerror(err));
    }
    const auto pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
    ::close(fd);
}

OutputLock::~OutputLock() {
    if (!path_.empty()) ::unlink(path_.c_str());
}

Stamp stamp_for(const RunConfig& config) { return Stamp{config_hash(config), config.seed}; }

std::string labels_path(const RunConfig& config) {
    return config.labels.empty() ? (fs::path(config.out) / files::labels).string() : config.labels;
}

void run_stage(Stage stage, const RunConfig& config, std::istream& in, std::ostream& out) {
    OutputLock lock(config.out);
    const Ctx c{config, stamp_for(config), fs::path(config.out), out};
    switch (stage) {
        case Stage::ingest: stage_ingest(c); break;
        case Stage::train_doc: stage_train_doc(c); break;
        case Stage::extract: stage_extract(c); break;
        case Stage::match: stage_match(c); break;
        case Stage::featurize: stage_featurize(c); break;
        case Stage::annotate: stage_annotate(c, in); break;
        case Stage::train_word: stage_train_word(c); break;
        case Stage::select: stage_select(c); break;
        case Stage::report: stage_report(c); break;
    }
}

void run_all(const RunConfig& config, std::ostream& out) {
    std::istringstream no_input;
    for (const auto stage : all_stages()) {
        if (stage == Stage::annotate) continue;
        if (stage == Stage::train_word && !fs::exists(labels_path(config))) {
            out << "train-word: skipped, no labels at " << labels_path(config) << "\n";
            continue;
        }
        run_stage(stage, config, no_input, out);
    }
}

std::string write_synthetic_bundle(const std::string& dir, const SyntheticOptions& o) {
    const auto data = generate_synthetic(o);
    fs::create_directories(dir);
    const auto base = fs::path(dir);
    write_file_atomic((base / (o.domain + ".tsv")).string(), to_tsv(data));
    write_file_atomic((base / (o.domain + "_labels.csv")).string(), write_labels_csv(data.labels));
    std::string conf;
    conf += "dataset_kind = generic\n";
    conf += "dataset_path = " + o.domain + ".tsv\n";
    conf += "name = synthetic_" + o.domain + "\n";
    conf += "labels = " + o.domain + "_labels.csv\n";
    conf += "seed = " + std::to_string(o.seed) + "\n";
    conf += "# rare genuine words and large test groups\n";
    conf += "doc_l2 = 0.001\n";
    conf += "test_fraction = 0.5\n";
    conf += "metric = accuracy\n";
    conf += "out = out_" + o.domain + "\n";
    const auto path = (base / (o.domain + ".conf")).string();
    write_file_atomic(path, conf);
    return path;
}

}  // namespace spurious
