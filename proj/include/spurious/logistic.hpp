#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace spurious {

// Compressed sparse rows.
struct SparseMatrix {
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    std::size_t rows() const { return row_ptr.size() - 1; }
    void add_row(std::span<const std::pair<std::uint32_t, double>> entries);
    void add_dense_row(std::span<const double> values);
};

// Mean logistic loss over +/-1 labels plus (l2 / 2) * |w|^2. The bias is the
// last parameter and is not regularized.
class LogisticObjective {
public:
    LogisticObjective(const SparseMatrix& x, std::span<const int> y, double l2);

    std::size_t num_params() const { return x_.cols + 1; }
    double value(std::span<const double> params) const;
    double value_and_gradient(std::span<const double> params, std::span<double> grad) const;

private:
    const SparseMatrix& x_;
    std::span<const int> y_;
    double l2_;
};

struct FitOptions {
    double l2 = 1.0;
    int max_iter = 1000;
    double tol = 1e-6;  // on the Euclidean norm of the gradient
    int history = 10;
};

struct FitResult {
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> loss_history;  // objective after each accepted step, starting at w = 0
    int iterations = 0;
    bool converged = false;
};

// Deterministic L-BFGS from the zero vector with Armijo backtracking, so the
// objective never increases between iterations. Throws DataError on a
// non-finite objective.
FitResult fit_logistic(const SparseMatrix& x, std::span<const int> y, const FitOptions& options);

double sigmoid(double z);

}  // namespace spurious
