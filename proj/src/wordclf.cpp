#include "spurious/wordclf.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <set>

#include "spurious/error.hpp"
#include "spurious/logistic.hpp"
#include "spurious/metrics.hpp"
#include "spurious/rng.hpp"
#include "spurious/text.hpp"

namespace spurious {

WordClass parse_word_class(std::string_view s) {
    if (s == "spurious") return WordClass::spurious;
    if (s == "genuine") return WordClass::genuine;
    throw DataError("word label must be 'spurious' or 'genuine', got '" + std::string(s) + "'");
}

std::string_view to_string(WordClass c) { return c == WordClass::spurious ? "spurious" : "genuine"; }

std::vector<WordLabel> read_labels_csv(std::istream& in) {
    std::vector<WordLabel> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line[0] == '#') continue;
        if (line.rfind("word,label", 0) == 0) continue;
        auto parts = split_char(line, ',');
        if (parts.size() < 2) throw DataError("malformed label on line " + std::to_string(line_no));
        WordLabel l;
        l.word = std::string(trim(parts[0]));
        l.label = parse_word_class(trim(parts[1]));
        if (parts.size() > 2) {
            parts.erase(parts.begin(), parts.begin() + 2);
            l.note = join(parts, ",");
        }
        if (!seen.insert(l.word).second)
            throw DataError("word '" + l.word + "' labeled twice (line " + std::to_string(line_no) + ")");
        out.push_back(std::move(l));
    }
    return out;
}

std::string format_label_row(const WordLabel& label) {
    std::string row = label.word + "," + std::string(to_string(label.label));
    if (!label.note.empty()) row += "," + label.note;
    return row + "\n";
}

std::string write_labels_csv(std::span<const WordLabel> labels) {
    std::string out = "word,label\n";
    for (const auto& l : labels) out += format_label_row(l);
    return out;
}

FeatureArray orient_features(const FeatureArray& raw) {
    FeatureArray x = raw;
    const double sign = raw[kDocCoef] < 0 ? -1.0 : 1.0;
    for (auto j : {kAte, kWeightedAte, kTop5Ate, kDocCoef}) x[j] *= sign;
    return x;
}

double WordClassifierModel::predict(const FeatureArray& raw) const {
    const FeatureArray z = scaler.transform(orient ? orient_features(raw) : raw);
    double s = bias;
    for (std::size_t j = 0; j < kNumWordFeatures; ++j) s += lambda[j] * z[j];
    return sigmoid(s);
}

LabeledRows join_labels(std::span<const WordFeatureVector> features, std::span<const WordLabel> labels) {
    std::map<std::string, WordClass> by_word;
    for (const auto& l : labels) by_word[l.word] = l.label;
    LabeledRows rows;
    for (const auto& v : features) {
        const auto it = by_word.find(v.word);
        if (it == by_word.end()) continue;
        rows.words.push_back(v.word);
        rows.x.push_back(v.f);
        rows.y.push_back(it->second == WordClass::spurious ? 1 : -1);
    }
    return rows;
}

WordClassifierModel train_word_clf(std::span<const FeatureArray> x, std::span<const int> y,
                                   const WordClfOptions& options) {
    if (x.size() != y.size()) throw DataError("feature and label counts differ");
    const bool pos = std::find(y.begin(), y.end(), 1) != y.end();
    const bool neg = std::find(y.begin(), y.end(), -1) != y.end();
    if (!pos || !neg) throw DataError("word classifier needs both spurious and genuine examples");

    WordClassifierModel model;
    model.l2 = options.l2;
    model.orient = options.orient;
    std::vector<FeatureArray> prepared;
    prepared.reserve(x.size());
    for (const auto& row : x) prepared.push_back(options.orient ? orient_features(row) : row);
    model.scaler = fit_scaler(prepared);

    SparseMatrix m;
    m.cols = kNumWordFeatures;
    for (const auto& row : prepared) {
        const FeatureArray z = model.scaler.transform(row);
        m.add_dense_row(z);
    }
    const FitResult fit = fit_logistic(m, y, {options.l2, options.max_iter, options.tol});
    std::copy(fit.weights.begin(), fit.weights.end(), model.lambda.begin());
    model.bias = fit.bias;
    return model;
}

WordClassifierModel train_word_clf(std::span<const WordFeatureVector> features, std::span<const WordLabel> labels,
                                   const WordClfOptions& options) {
    const LabeledRows rows = join_labels(features, labels);
    return train_word_clf(rows.x, rows.y, options);
}

std::vector<int> assign_folds(std::span<const int> y, int k, std::uint64_t seed) {
    if (k < 2) throw UsageError("cross-validation needs k >= 2");
    std::vector<int> fold(y.size(), 0);
    for (int cls : {1, -1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == cls) idx.push_back(i);
        Rng rng(mix_seed(seed, cls > 0 ? 0xf01d1 : 0xf01d2));
        rng.shuffle(std::span(idx));
        for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return fold;
}

CvResult cross_validate(std::span<const WordFeatureVector> features, std::span<const WordLabel> labels, int k,
                        std::uint64_t seed, const WordClfOptions& options) {
    const LabeledRows rows = join_labels(features, labels);
    const auto n_pos = static_cast<std::size_t>(std::count(rows.y.begin(), rows.y.end(), 1));
    const std::size_t n_neg = rows.y.size() - n_pos;
    if (n_pos < 2 || n_neg < 2)
        throw DataError("cross-validation: each word class needs at least 2 labeled words with features (have " +
                        std::to_string(n_pos) + " spurious, " + std::to_string(n_neg) +
                        " genuine); label more words or use a smaller k");

    CvResult cv;
    cv.words = rows.words;
    cv.y = rows.y;
    cv.fold = assign_folds(rows.y, k, seed);
    cv.held_out.assign(rows.y.size(), 0.5);
    for (int f = 0; f < k; ++f) {
        std::vector<FeatureArray> tx;
        std::vector<int> ty;
        for (std::size_t i = 0; i < rows.y.size(); ++i) {
            if (cv.fold[i] == f) continue;
            tx.push_back(rows.x[i]);
            ty.push_back(rows.y[i]);
        }
        const bool pos = std::find(ty.begin(), ty.end(), 1) != ty.end();
        const bool neg = std::find(ty.begin(), ty.end(), -1) != ty.end();
        if (!pos || !neg)
            throw DataError("training fold " + std::to_string(f) + " lacks a class; use a smaller k");
        const WordClassifierModel model = train_word_clf(tx, ty, options);
        for (std::size_t i = 0; i < rows.y.size(); ++i)
            if (cv.fold[i] == f) cv.held_out[i] = model.predict(rows.x[i]);
    }
    cv.auc = roc_auc(cv.held_out, cv.y);

    for (int sign : {1, -1}) {
        std::vector<double> s;
        std::vector<int> yy;
        for (std::size_t i = 0; i < rows.y.size(); ++i) {
            const double coef = rows.x[i][kDocCoef];
            if ((sign > 0) == (coef >= 0)) {
                s.push_back(cv.held_out[i]);
                yy.push_back(rows.y[i]);
            }
        }
        const bool both = std::count(yy.begin(), yy.end(), 1) > 0 && std::count(yy.begin(), yy.end(), -1) > 0;
        if (!both) continue;
        (sign > 0 ? cv.auc_positive_words : cv.auc_negative_words) = roc_auc(s, yy);
    }
    return cv;
}

std::vector<double> transfer(const WordClassifierModel& model, std::span<const WordFeatureVector> features) {
    std::vector<double> out;
    out.reserve(features.size());
    for (const auto& v : features) out.push_back(model.predict(v.f));
    return out;
}

std::vector<std::pair<std::string, double>> rank_spurious(std::vector<std::pair<std::string, double>> scores) {
    std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return scores;
}

std::vector<std::pair<std::string, double>> rank_spurious(const WordClassifierModel& model,
                                                          std::span<const WordFeatureVector> features) {
    std::vector<std::pair<std::string, double>> scores;
    for (const auto& v : features) scores.emplace_back(v.word, model.predict(v.f));
    return rank_spurious(std::move(scores));
}

std::string write_word_model(const WordClassifierModel& model, const std::optional<Stamp>& stamp) {
    std::string out = "spurious-word-model 1\n";
    if (stamp) out += stamp_comment(*stamp) + "\n";
    out += "l2_strength\t" + format_double(model.l2) + "\n";
    out += "orient\t" + std::string(model.orient ? "1" : "0") + "\n";
    out += "bias\t" + format_double(model.bias) + "\n";
    out += "feature\tlambda\tmean\tstd\n";
    for (std::size_t j = 0; j < kNumWordFeatures; ++j)
        out += std::string(kFeatureNames[j]) + "\t" + format_double(model.lambda[j]) + "\t" +
               format_double(model.scaler.mean[j]) + "\t" + format_double(model.scaler.stddev[j]) + "\n";
    return out;
}

WordClassifierModel read_word_model(std::istream& in, std::optional<Stamp>* stamp) {
    std::string line;
    if (!std::getline(in, line) || line != "spurious-word-model 1") throw DataError("not a word classifier model");
    if (stamp) stamp->reset();
    WordClassifierModel m;
    std::map<std::string, std::string> fields;
    while (std::getline(in, line)) {
        if (line.rfind("#", 0) == 0) {
            if (stamp) *stamp = parse_stamp_comment(line);
            continue;
        }
        if (line == "feature\tlambda\tmean\tstd") break;
        const auto parts = split_char(line, '\t');
        if (parts.size() != 2) throw DataError("malformed word model line: " + line);
        fields[parts[0]] = parts[1];
    }
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto parts = split_char(line, '\t');
        if (parts.size() != 4) throw DataError("malformed word model row: " + line);
        names.push_back(parts[0]);
        rows.push_back(std::move(parts));
    }
    bool schema_ok = names.size() == kNumWordFeatures;
    for (std::size_t j = 0; schema_ok && j < kNumWordFeatures; ++j) schema_ok = names[j] == kFeatureNames[j];
    if (!schema_ok) throw DataError("feature schema mismatch between word model and feature table");
    for (std::size_t j = 0; j < kNumWordFeatures; ++j) {
        m.lambda[j] = parse_double(rows[j][1], "lambda");
        m.scaler.mean[j] = parse_double(rows[j][2], "scaler mean");
        m.scaler.stddev[j] = parse_double(rows[j][3], "scaler std");
    }
    if (!fields.count("bias") || !fields.count("l2_strength") || !fields.count("orient"))
        throw DataError("word model lacks a required field");
    m.bias = parse_double(fields["bias"], "bias");
    m.l2 = parse_double(fields["l2_strength"], "l2_strength");
    m.orient = fields["orient"] == "1";
    return m;
}

std::string write_predictions(std::span<const std::pair<std::string, double>> ranked,
                              const std::optional<Stamp>& stamp) {
    std::string out;
    if (stamp) out += stamp_comment(*stamp) + "\n";
    out += "word,p_spurious,rank\n";
    for (std::size_t i = 0; i < ranked.size(); ++i)
        out += ranked[i].first + "," + format_double(ranked[i].second) + "," + std::to_string(i + 1) + "\n";
    return out;
}

std::vector<std::pair<std::string, double>> read_predictions(std::istream& in, std::optional<Stamp>* stamp) {
    std::vector<std::pair<std::string, double>> out;
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
            if (line != "word,p_spurious,rank") throw DataError("predictions CSV has an unexpected header");
            header_seen = true;
            continue;
        }
        const auto parts = split_char(line, ',');
        if (parts.size() != 3) throw DataError("malformed prediction row: " + line);
        out.emplace_back(parts[0], parse_double(parts[1], "p_spurious"));
    }
    return out;
}

}  // namespace spurious
