#include "spurious/docmodel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <set>

#include "spurious/error.hpp"
#include "spurious/logistic.hpp"
#include "spurious/text.hpp"

namespace spurious {

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
    std::sort(words_.begin(), words_.end());
    words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
    index_.reserve(words_.size());
    for (std::uint32_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
}

std::optional<std::uint32_t> Vocabulary::find(const std::string& word) const {
    const auto it = index_.find(word);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

SparseVector featurize_doc(std::span<const std::string> tokens, const Vocabulary& vocab) {
    std::map<std::uint32_t, double> counts;
    for (const auto& t : tokens)
        if (const auto i = vocab.find(t)) counts[*i] += 1.0;
    return {counts.begin(), counts.end()};
}

double DocModel::predict_proba(const SparseVector& x) const {
    double z = bias;
    for (const auto& [i, v] : x) z += theta[i] * v;
    return sigmoid(z);
}

double DocModel::predict_proba(std::span<const std::string> tokens) const {
    return predict_proba(featurize_doc(tokens, vocab));
}

double DocModel::coefficient(const std::string& word) const {
    const auto i = vocab.find(word);
    return i ? theta[*i] : 0.0;
}

DocModel train_doc(std::span<const LabeledSentence> train, const DocTrainOptions& options) {
    bool has_pos = false, has_neg = false;
    for (const auto& s : train) (s.label > 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw DataError("training data must contain both classes");

    const std::set<std::string> excluded(options.excluded.begin(), options.excluded.end());
    std::optional<std::set<std::string>> allowed;
    if (options.allowed) allowed.emplace(options.allowed->begin(), options.allowed->end());

    std::vector<std::string> words;
    for (const auto& s : train)
        for (const auto& t : s.tokens)
            if (!excluded.count(t) && (!allowed || allowed->count(t))) words.push_back(t);

    DocModel model;
    model.vocab = Vocabulary(std::move(words));
    model.l2_strength = options.l2;
    model.max_iter = options.max_iter;
    model.tol = options.tol;

    std::vector<const LabeledSentence*> rows;
    rows.reserve(train.size());
    for (const auto& s : train) rows.push_back(&s);
    std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
        if (a->tokens != b->tokens) return a->tokens < b->tokens;
        return a->label < b->label;
    });

    SparseMatrix x;
    x.cols = model.vocab.size();
    std::vector<int> y;
    y.reserve(rows.size());
    for (const auto* s : rows) {
        const auto v = featurize_doc(s->tokens, model.vocab);
        x.add_row(v);
        y.push_back(s->label);
    }
    const FitResult fit = fit_logistic(x, y, {options.l2, options.max_iter, options.tol});
    model.theta = fit.weights;
    model.bias = fit.bias;
    model.loss_history = fit.loss_history;
    return model;
}

std::vector<TopWord> top_words(const DocModel& model, double threshold) {
    std::vector<TopWord> out;
    for (std::uint32_t i = 0; i < model.vocab.size(); ++i) {
        const double c = model.theta[i];
        if (std::abs(c) >= threshold) out.push_back({model.vocab.word(i), c, c >= 0 ? 1 : -1});
    }
    std::sort(out.begin(), out.end(), [](const TopWord& a, const TopWord& b) {
        const double ma = std::abs(a.coef), mb = std::abs(b.coef);
        if (ma != mb) return ma > mb;
        return a.word < b.word;
    });
    return out;
}

double evaluate(const DocModel& model, std::span<const LabeledSentence> sentences, Metric metric) {
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(sentences.size());
    labels.reserve(sentences.size());
    for (const auto& s : sentences) {
        scores.push_back(model.predict_proba(s.tokens));
        labels.push_back(s.label);
    }
    return metric == Metric::auc ? roc_auc(scores, labels) : accuracy(scores, labels);
}

std::string write_doc_model(const DocModel& model, const std::optional<Stamp>& stamp) {
    std::string out = "spurious-doc-model 1\n";
    if (stamp) out += stamp_comment(*stamp) + "\n";
    out += "l2_strength\t" + format_double(model.l2_strength) + "\n";
    out += "max_iter\t" + std::to_string(model.max_iter) + "\n";
    out += "tol\t" + format_double(model.tol) + "\n";
    out += "bias\t" + format_double(model.bias) + "\n";
    out += "vocab_size\t" + std::to_string(model.vocab.size()) + "\n";
    for (std::uint32_t i = 0; i < model.vocab.size(); ++i)
        out += model.vocab.word(i) + "\t" + format_double(model.theta[i]) + "\n";
    return out;
}

DocModel read_doc_model(std::istream& in, std::optional<Stamp>* stamp) {
    std::string line;
    if (!std::getline(in, line) || line != "spurious-doc-model 1") throw DataError("not a document model file");
    if (stamp) stamp->reset();
    std::map<std::string, std::string> fields;
    std::size_t vocab_size = 0;
    while (std::getline(in, line)) {
        if (line.rfind("#", 0) == 0) {
            if (stamp) *stamp = parse_stamp_comment(line);
            continue;
        }
        const auto parts = split_char(line, '\t');
        if (parts.size() != 2) throw DataError("malformed model line: " + line);
        if (parts[0] == "vocab_size") {
            vocab_size = static_cast<std::size_t>(parse_int(parts[1], "vocab_size"));
            break;
        }
        fields[parts[0]] = parts[1];
    }
    std::vector<std::string> words;
    std::vector<double> theta;
    for (std::size_t i = 0; i < vocab_size; ++i) {
        if (!std::getline(in, line)) throw DataError("truncated model file");
        const auto parts = split_char(line, '\t');
        if (parts.size() != 2) throw DataError("malformed coefficient line: " + line);
        words.push_back(parts[0]);
        theta.push_back(parse_double(parts[1], "coefficient"));
    }
    DocModel m;
    m.vocab = Vocabulary(words);
    if (m.vocab.words() != words) throw DataError("model vocabulary is not sorted and unique");
    m.theta = std::move(theta);
    const auto get = [&](const std::string& key) {
        const auto it = fields.find(key);
        if (it == fields.end()) throw DataError("model file lacks " + key);
        return it->second;
    };
    m.l2_strength = parse_double(get("l2_strength"), "l2_strength");
    m.max_iter = static_cast<int>(parse_int(get("max_iter"), "max_iter"));
    m.tol = parse_double(get("tol"), "tol");
    m.bias = parse_double(get("bias"), "bias");
    return m;
}

std::string write_top_words(const std::vector<TopWord>& words, const std::optional<Stamp>& stamp) {
    std::string out;
    if (stamp) out += stamp_comment(*stamp) + "\n";
    out += "word,coef,class\n";
    for (const auto& w : words)
        out += w.word + "," + format_double(w.coef) + "," + std::to_string(w.correlated_class) + "\n";
    return out;
}

std::vector<TopWord> read_top_words(std::istream& in, std::optional<Stamp>* stamp) {
    std::vector<TopWord> out;
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
            if (line != "word,coef,class") throw DataError("top-words CSV has an unexpected header");
            header_seen = true;
            continue;
        }
        const auto parts = split_char(line, ',');
        if (parts.size() != 3) throw DataError("malformed top-words line: " + line);
        out.push_back({parts[0], parse_double(parts[1], "coef"), static_cast<int>(parse_int(parts[2], "class"))});
    }
    return out;
}

}  // namespace spurious
