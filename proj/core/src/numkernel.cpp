#include "clickpath/numkernel.hpp"

#include <algorithm>
#include <cmath>

#include "clickpath/error.hpp"

namespace clickpath::num {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("matmul", a.rows(), a.cols(), b.rows(), b.cols());
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out_row = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            auto b_row = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

void gemv(const Matrix& a, std::span<const double> x, std::span<double> y, bool accumulate) {
    if (x.size() != a.cols() || y.size() != a.rows())
        throw ShapeMismatch("gemv", a.rows(), a.cols(), x.size(), y.size());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
        y[i] = accumulate ? y[i] + s : s;
    }
}

void gemv_transposed_acc(const Matrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != a.rows() || y.size() != a.cols())
        throw ShapeMismatch("gemv_transposed_acc", a.rows(), a.cols(), x.size(), y.size());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        auto r = a.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) y[j] += r[j] * xi;
    }
}

void outer_acc(Matrix& a, std::span<const double> u, std::span<const double> v, double alpha) {
    if (u.size() != a.rows() || v.size() != a.cols())
        throw ShapeMismatch("outer_acc", a.rows(), a.cols(), u.size(), v.size());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double ui = alpha * u[i];
        if (ui == 0.0) continue;
        auto r = a.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += ui * v[j];
    }
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Matrix sigmoid(const Matrix& x) {
    Matrix out = x;
    for (double& v : out.data()) v = sigmoid(v);
    return out;
}

Matrix tanh_act(const Matrix& x) {
    Matrix out = x;
    for (double& v : out.data()) v = std::tanh(v);
    return out;
}

void softmax_inplace(std::span<double> logits) {
    if (logits.empty()) return;
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.begin(), logits.end());
    softmax_inplace(out);
    return out;
}

double cross_entropy(std::size_t target, std::span<const double> probs) {
    if (target >= probs.size()) throw IndexOutOfRange(target, probs.size());
    return -std::log(std::max(probs[target], kProbFloor));
}

AdamState AdamState::for_param(const Matrix& param, double learning_rate) {
    AdamState s;
    s.first_moment = Matrix(param.rows(), param.cols());
    s.second_moment = Matrix(param.rows(), param.cols());
    s.learning_rate = learning_rate;
    return s;
}

void adam_step(Matrix& param, const Matrix& grad, AdamState& state) {
    if (!param.same_shape(grad))
        throw ShapeMismatch("adam_step", param.rows(), param.cols(), grad.rows(), grad.cols());
    if (state.first_moment.empty()) state = AdamState::for_param(param, state.learning_rate);
    if (!param.same_shape(state.first_moment) || !param.same_shape(state.second_moment))
        throw ShapeMismatch("adam_step", param.rows(), param.cols(), state.first_moment.rows(),
                            state.first_moment.cols());

    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    auto p = param.data();
    auto g = grad.data();
    auto m = state.first_moment.data();
    auto v = state.second_moment.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
        v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        p[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

L2Result l2_penalty(std::span<const Matrix> params, double lambda) {
    if (lambda < 0.0) throw InvalidArgument("l2 lambda must be non-negative");
    L2Result r;
    r.grads.reserve(params.size());
    for (const Matrix& p : params) {
        Matrix g(p.rows(), p.cols());
        auto pd = p.data();
        auto gd = g.data();
        for (std::size_t i = 0; i < pd.size(); ++i) {
            r.loss += lambda * pd[i] * pd[i];
            gd[i] = 2.0 * lambda * pd[i];
        }
        r.grads.push_back(std::move(g));
    }
    return r;
}

GradCheckResult grad_check(const LossFn& loss_fn, std::span<const double> params,
                           const GradFn& grad_fn, double h) {
    if (!(h > 0.0)) throw InvalidArgument("grad_check step must be positive");
    std::vector<double> p(params.begin(), params.end());
    const std::vector<double> analytic = grad_fn(p);
    if (analytic.size() != p.size())
        throw ShapeMismatch("grad_check", p.size(), 1, analytic.size(), 1);

    GradCheckResult result;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + h;
        const double up = loss_fn(p);
        p[i] = saved - h;
        const double down = loss_fn(p);
        p[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic[i];
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
        const double rel = std::abs(a - numeric) / denom;
        if (i == 0 || rel > result.max_relative_error) {
            result.max_relative_error = rel;
            result.worst_index = i;
            result.analytic_at_worst = a;
            result.numeric_at_worst = numeric;
        }
    }
    return result;
}

}  // namespace clickpath::num
