#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "clickpath/matrix.hpp"

namespace clickpath::num {

/// Row-major product with a fixed accumulation order. Throws ShapeMismatch.
Matrix matmul(const Matrix& a, const Matrix& b);

/// y = A x (overwrite) or y += A x (accumulate).
void gemv(const Matrix& a, std::span<const double> x, std::span<double> y, bool accumulate = false);
/// y += A^T x.
void gemv_transposed_acc(const Matrix& a, std::span<const double> x, std::span<double> y);
/// A += alpha * u v^T.
void outer_acc(Matrix& a, std::span<const double> u, std::span<const double> v, double alpha = 1.0);

double sigmoid(double x);
Matrix sigmoid(const Matrix& x);
Matrix tanh_act(const Matrix& x);

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);
void softmax_inplace(std::span<double> logits);

/// -log(max(probs[target], 1e-12)). Throws IndexOutOfRange.
double cross_entropy(std::size_t target, std::span<const double> probs);

inline constexpr double kProbFloor = 1e-12;

struct AdamState {
    std::uint64_t step_count = 0;
    Matrix first_moment;
    Matrix second_moment;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 0.001;

    /// Zero moments shaped like `param`.
    static AdamState for_param(const Matrix& param, double learning_rate = 0.001);
};

/// One bias-corrected Adam update of `param` in place. Throws ShapeMismatch.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state);

struct L2Result {
    double loss = 0.0;
    std::vector<Matrix> grads;  // 2*lambda*p, one per parameter
};

/// lambda * sum of squared entries over all parameters.
L2Result l2_penalty(std::span<const Matrix> params, double lambda);

using LossFn = std::function<double(std::span<const double>)>;
using GradFn = std::function<std::vector<double>(std::span<const double>)>;

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_index = 0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

/// Compares grad_fn against central differences (f(p+h)-f(p-h))/2h over every
/// coordinate. Relative error is |a-n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(const LossFn& loss_fn, std::span<const double> params,
                           const GradFn& grad_fn, double h = 1e-5);

}  // namespace clickpath::num
