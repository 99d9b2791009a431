#include "spurious/logistic.hpp"

#include <cmath>
#include <deque>
#include <numeric>

#include "spurious/error.hpp"

namespace spurious {

namespace {

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void SparseMatrix::add_row(std::span<const std::pair<std::uint32_t, double>> entries) {
    for (const auto& [c, v] : entries) {
        col.push_back(c);
        val.push_back(v);
    }
    row_ptr.push_back(col.size());
}

void SparseMatrix::add_dense_row(std::span<const double> values) {
    for (std::size_t c = 0; c < values.size(); ++c) {
        if (values[c] == 0.0) continue;
        col.push_back(static_cast<std::uint32_t>(c));
        val.push_back(values[c]);
    }
    row_ptr.push_back(col.size());
}

LogisticObjective::LogisticObjective(const SparseMatrix& x, std::span<const int> y, double l2)
    : x_(x), y_(y), l2_(l2) {}

double LogisticObjective::value(std::span<const double> params) const {
    const std::size_t d = x_.cols;
    const double bias = params[d];
    double loss = 0.0;
    for (std::size_t r = 0; r < x_.rows(); ++r) {
        double z = bias;
        for (std::size_t k = x_.row_ptr[r]; k < x_.row_ptr[r + 1]; ++k) z += params[x_.col[k]] * x_.val[k];
        loss += softplus(-y_[r] * z);
    }
    const double n = static_cast<double>(x_.rows());
    return loss / n + 0.5 * l2_ * dot(params.first(d), params.first(d));
}

double LogisticObjective::value_and_gradient(std::span<const double> params, std::span<double> grad) const {
    const std::size_t d = x_.cols;
    const double bias = params[d];
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (std::size_t r = 0; r < x_.rows(); ++r) {
        double z = bias;
        for (std::size_t k = x_.row_ptr[r]; k < x_.row_ptr[r + 1]; ++k) z += params[x_.col[k]] * x_.val[k];
        const double margin = y_[r] * z;
        loss += softplus(-margin);
        // d/dz softplus(-y z) = -y * sigmoid(-y z)
        const double g = -y_[r] * sigmoid(-margin);
        for (std::size_t k = x_.row_ptr[r]; k < x_.row_ptr[r + 1]; ++k) grad[x_.col[k]] += g * x_.val[k];
        grad[d] += g;
    }
    const double n = static_cast<double>(x_.rows());
    for (std::size_t i = 0; i <= d; ++i) grad[i] /= n;
    for (std::size_t i = 0; i < d; ++i) grad[i] += l2_ * params[i];
    return loss / n + 0.5 * l2_ * dot(params.first(d), params.first(d));
}

FitResult fit_logistic(const SparseMatrix& x, std::span<const int> y, const FitOptions& options) {
    if (x.rows() != y.size()) throw DataError("row count does not match label count");
    if (x.rows() == 0) throw DataError("no training rows");
    const LogisticObjective objective(x, y, options.l2);
    const std::size_t p = objective.num_params();

    std::vector<double> w(p, 0.0), g(p), w_new(p), g_new(p), dir(p);
    double f = objective.value_and_gradient(w, g);
    FitResult result;
    result.loss_history.push_back(f);

    struct Pair {
        std::vector<double> s, y;
        double rho;
    };
    std::deque<Pair> memory;
    std::vector<double> alpha(static_cast<std::size_t>(options.history));

    for (int iter = 0; iter < options.max_iter; ++iter) {
        if (std::sqrt(dot(g, g)) <= options.tol) {
            result.converged = true;
            break;
        }
        // Two-loop recursion.
        for (std::size_t i = 0; i < p; ++i) dir[i] = -g[i];
        for (std::size_t m = memory.size(); m-- > 0;) {
            alpha[m] = memory[m].rho * dot(memory[m].s, dir);
            for (std::size_t i = 0; i < p; ++i) dir[i] -= alpha[m] * memory[m].y[i];
        }
        if (!memory.empty()) {
            const auto& last = memory.back();
            const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
            for (auto& v : dir) v *= gamma;
        }
        for (std::size_t m = 0; m < memory.size(); ++m) {
            const double beta = memory[m].rho * dot(memory[m].y, dir);
            for (std::size_t i = 0; i < p; ++i) dir[i] += memory[m].s[i] * (alpha[m] - beta);
        }
        double slope = dot(g, dir);
        if (!(slope < 0.0)) {
            memory.clear();
            for (std::size_t i = 0; i < p; ++i) dir[i] = -g[i];
            slope = -dot(g, g);
        }

        double step = memory.empty() ? std::min(1.0, 1.0 / std::sqrt(dot(g, g))) : 1.0;
        double f_new = 0.0;
        bool accepted = false;
        for (int trial = 0; trial < 60; ++trial) {
            for (std::size_t i = 0; i < p; ++i) w_new[i] = w[i] + step * dir[i];
            f_new = objective.value_and_gradient(w_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!std::isfinite(f_new) && !accepted) throw DataError("optimizer diverged: non-finite loss");
        if (!accepted || f_new >= f) {
            // No further decrease representable at this precision.
            result.converged = std::sqrt(dot(g, g)) <= std::max(options.tol, 1e-8);
            break;
        }

        Pair pair{std::vector<double>(p), std::vector<double>(p), 0.0};
        for (std::size_t i = 0; i < p; ++i) {
            pair.s[i] = w_new[i] - w[i];
            pair.y[i] = g_new[i] - g[i];
        }
        const double sy = dot(pair.s, pair.y);
        if (sy > 1e-12 * std::sqrt(dot(pair.s, pair.s) * dot(pair.y, pair.y))) {
            pair.rho = 1.0 / sy;
            memory.push_back(std::move(pair));
            if (memory.size() > static_cast<std::size_t>(options.history)) memory.pop_front();
        }
        w.swap(w_new);
        g.swap(g_new);
        f = f_new;
        result.loss_history.push_back(f);
        result.iterations = iter + 1;
    }
    if (!std::isfinite(f)) throw DataError("optimizer diverged: non-finite loss");
    for (double v : w)
        if (!std::isfinite(v)) throw DataError("optimizer diverged: non-finite parameters");

    result.bias = w[p - 1];
    w.pop_back();
    result.weights = std::move(w);
    return result;
}

}  // namespace spurious
