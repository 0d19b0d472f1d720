#include <cmath>

#include "apm_internal.hpp"
#include "clickpath/error.hpp"
#include "clickpath/numkernel.hpp"

namespace clickpath::apm {

using num::gemv;
using num::gemv_transposed_acc;
using num::outer_acc;

double squash(double seconds) { return seconds / (seconds + 1.0); }

namespace detail {

void check_shapes(const CellWeights& w, std::size_t e, std::size_t h) {
    for (const num::Matrix* p : {&w.pz, &w.pr, &w.ph}) {
        if (p->rows() != h || p->cols() != e)
            throw ShapeMismatch("cell input weight", p->rows(), p->cols(), h, e);
    }
    for (const num::Matrix* q : {&w.qz, &w.qr, &w.qh}) {
        if (q->rows() != h || q->cols() != h)
            throw ShapeMismatch("cell recurrent weight", q->rows(), q->cols(), h, h);
    }
}

void cell_forward(const CellWeights& w, CandidateMode mode, std::span<const double> u,
                  std::span<const double> h_prev, double seconds, StepCache& cache) {
    const std::size_t H = h_prev.size();
    cache.u.assign(u.begin(), u.end());
    cache.h_prev.assign(h_prev.begin(), h_prev.end());
    cache.z.assign(H, 0.0);
    cache.r.assign(H, 0.0);
    cache.c.assign(H, 0.0);
    cache.h.assign(H, 0.0);

    const double s = squash(seconds);
    gemv(w.pz, u, cache.z);
    gemv(w.qz, h_prev, cache.z, true);
    for (double& v : cache.z) v = num::sigmoid(v + s);

    gemv(w.pr, u, cache.r);
    gemv(w.qr, h_prev, cache.r, true);
    for (double& v : cache.r) v = num::sigmoid(v);

    gemv(w.ph, u, cache.c);
    if (mode == CandidateMode::kStandard) {
        cache.rh.assign(H, 0.0);
        for (std::size_t i = 0; i < H; ++i) cache.rh[i] = cache.r[i] * h_prev[i];
        gemv(w.qh, cache.rh, cache.c, true);
    } else {
        gemv(w.qh, h_prev, cache.c, true);
    }
    for (double& v : cache.c) v = std::tanh(v);

    for (std::size_t i = 0; i < H; ++i)
        cache.h[i] = (1.0 - cache.z[i]) * cache.c[i] + cache.z[i] * h_prev[i];
}

void cell_backward(const CellWeights& w, CandidateMode mode, const StepCache& cache,
                   std::span<const double> dh, CellWeights& grad, std::span<double> du,
                   std::span<double> dh_prev) {
    const std::size_t H = dh.size();
    std::vector<double> daz(H), dah(H);
    for (std::size_t i = 0; i < H; ++i) {
        const double z = cache.z[i];
        const double c = cache.c[i];
        daz[i] = dh[i] * (cache.h_prev[i] - c) * z * (1.0 - z);
        dah[i] = dh[i] * (1.0 - z) * (1.0 - c * c);
        dh_prev[i] = dh[i] * z;
    }

    outer_acc(grad.pz, daz, cache.u);
    outer_acc(grad.qz, daz, cache.h_prev);
    gemv_transposed_acc(w.pz, daz, du);
    gemv_transposed_acc(w.qz, daz, dh_prev);

    outer_acc(grad.ph, dah, cache.u);
    gemv_transposed_acc(w.ph, dah, du);

    if (mode == CandidateMode::kStandard) {
        outer_acc(grad.qh, dah, cache.rh);
        std::vector<double> drh(H, 0.0);
        gemv_transposed_acc(w.qh, dah, drh);
        std::vector<double> dar(H);
        for (std::size_t i = 0; i < H; ++i) {
            const double r = cache.r[i];
            dh_prev[i] += drh[i] * r;
            dar[i] = drh[i] * cache.h_prev[i] * r * (1.0 - r);
        }
        outer_acc(grad.pr, dar, cache.u);
        outer_acc(grad.qr, dar, cache.h_prev);
        gemv_transposed_acc(w.pr, dar, du);
        gemv_transposed_acc(w.qr, dar, dh_prev);
    } else {
        outer_acc(grad.qh, dah, cache.h_prev);
        gemv_transposed_acc(w.qh, dah, dh_prev);
    }
}

}  // namespace detail

std::vector<double> cell_step(const CellWeights& w, CandidateMode mode, std::span<const double> u,
                              std::span<const double> h_prev, double seconds) {
    detail::check_shapes(w, u.size(), h_prev.size());
    detail::StepCache cache;
    detail::cell_forward(w, mode, u, h_prev, seconds, cache);
    return std::move(cache.h);
}

}  // namespace clickpath::apm
