#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spurious/contexts.hpp"
#include "spurious/error.hpp"
#include "spurious/rng.hpp"

namespace spurious {

namespace {

using Dense = Eigen::MatrixXd;
using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

Dense orthonormalize(const Dense& y) {
    Eigen::HouseholderQR<Dense> qr(y);
    return qr.householderQ() * Dense::Identity(y.rows(), y.cols());
}

// Top-k left singular vectors scaled by sqrt(singular value), by randomized
// subspace iteration (exact SVD when the matrix is small).
Dense truncated_factors(const Sparse& a, Eigen::Index k, std::uint64_t seed) {
    const Eigen::Index n = a.rows();
    const Eigen::Index sketch = std::min<Eigen::Index>(n, k + 10);
    Dense u;
    Eigen::VectorXd s;
    if (sketch >= n || n <= 256) {
        Eigen::BDCSVD<Dense> svd(Dense(a), Eigen::ComputeThinU);
        u = svd.matrixU();
        s = svd.singularValues();
    } else {
        Rng rng(mix_seed(seed, 0x5bd));
        Dense omega(n, sketch);
        for (Eigen::Index j = 0; j < sketch; ++j)
            for (Eigen::Index i = 0; i < n; ++i) omega(i, j) = rng.normal();
        Dense q = orthonormalize(a * omega);
        for (int iter = 0; iter < 4; ++iter) {
            q = orthonormalize(Dense(a.transpose() * q));
            q = orthonormalize(a * q);
        }
        const Dense b = q.transpose() * a;  // sketch x n
        Eigen::BDCSVD<Dense> svd(b, Eigen::ComputeThinU);
        u = q * svd.matrixU();
        s = svd.singularValues();
    }
    const Eigen::Index keep = std::min<Eigen::Index>(k, u.cols());
    Dense out = Dense::Zero(n, k);
    for (Eigen::Index j = 0; j < keep; ++j) {
        Eigen::Index arg = 0;
        u.col(j).cwiseAbs().maxCoeff(&arg);
        const double sign = u(arg, j) < 0 ? -1.0 : 1.0;
        out.col(j) = sign * std::sqrt(s(j)) * u.col(j);
    }
    return out;
}

std::vector<float> random_unit(std::uint64_t seed, std::int64_t context_id, std::uint32_t dim) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(context_id) ^ 0xc0417e47ULL));
    std::vector<double> v(dim);
    double norm = 0.0;
    while (norm == 0.0) {
        for (auto& x : v) x = rng.normal();
        norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
    }
    std::vector<float> out(dim);
    for (std::uint32_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
    return out;
}

}  // namespace

WordVectors train_word_vectors(std::span<const LabeledSentence> sentences, const FallbackOptions& options) {
    if (options.dim < 1) throw DataError("embedding dimension must be at least 1");
    if (sentences.empty()) throw DataError("cannot train word vectors on an empty corpus");

    std::vector<std::string> all;
    for (const auto& s : sentences) all.insert(all.end(), s.tokens.begin(), s.tokens.end());
    WordVectors wv;
    wv.vocab = Vocabulary(std::move(all));
    wv.dim = options.dim;
    const auto n = static_cast<Eigen::Index>(wv.vocab.size());

    std::map<std::pair<std::uint32_t, std::uint32_t>, double> counts;
    for (const auto& s : sentences) {
        std::vector<std::uint32_t> ids;
        ids.reserve(s.tokens.size());
        for (const auto& t : s.tokens) ids.push_back(*wv.vocab.find(t));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const std::size_t end = std::min(ids.size(), i + 1 + options.cooccurrence_window);
            for (std::size_t j = i + 1; j < end; ++j) {
                counts[{ids[i], ids[j]}] += 1.0;
                counts[{ids[j], ids[i]}] += 1.0;
            }
        }
    }
    std::vector<double> marginal(static_cast<std::size_t>(n), 0.0);
    double total = 0.0;
    for (const auto& [key, c] : counts) {
        marginal[key.first] += c;
        total += c;
    }
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& [key, c] : counts) {
        const double pmi = std::log(c * total / (marginal[key.first] * marginal[key.second]));
        if (pmi > 0.0) triplets.emplace_back(key.first, key.second, pmi);
    }
    Sparse ppmi(n, n);
    ppmi.setFromTriplets(triplets.begin(), triplets.end());

    const Dense factors = truncated_factors(ppmi, static_cast<Eigen::Index>(options.dim), options.seed);
    wv.data.resize(static_cast<std::size_t>(n) * options.dim);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < factors.cols(); ++j)
            wv.data[static_cast<std::size_t>(i) * options.dim + static_cast<std::size_t>(j)] = factors(i, j);
    return wv;
}

EmbeddingStore fallback_embed(std::span<const LabeledSentence> sentences, const std::vector<ContextWindow>& windows,
                              const FallbackOptions& options) {
    const WordVectors wv = train_word_vectors(sentences, options);
    EmbeddingStore store(options.dim, Provenance::fallback);
    std::vector<double> acc(options.dim);
    std::vector<float> vec(options.dim);
    for (const auto& w : windows) {
        std::fill(acc.begin(), acc.end(), 0.0);
        std::size_t used = 0;
        const auto add = [&](const std::string& token) {
            const auto i = wv.vocab.find(token);
            if (!i) return;
            const auto r = wv.row(*i);
            for (std::uint32_t d = 0; d < options.dim; ++d) acc[d] += r[d];
            ++used;
        };
        for (const auto& t : w.left) add(t);
        for (const auto& t : w.right) add(t);
        bool nonzero = false;
        for (std::uint32_t d = 0; d < options.dim; ++d) {
            vec[d] = used ? static_cast<float>(acc[d] / static_cast<double>(used)) : 0.0f;
            nonzero = nonzero || vec[d] != 0.0f;
        }
        if (nonzero)
            store.add(w.context_id, vec);
        else
            store.add(w.context_id, random_unit(options.seed, w.context_id, options.dim));
    }
    return store;
}

}  // namespace spurious
