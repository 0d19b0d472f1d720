#pragma once

#include <span>
#include <vector>

#include "clickpath/apm.hpp"

namespace clickpath::apm::detail {

struct StepCache {
    std::vector<double> u;
    std::vector<double> h_prev;
    std::vector<double> z;
    std::vector<double> r;
    std::vector<double> c;
    std::vector<double> rh;  // r o h_prev, standard mode only
    std::vector<double> h;
};

void cell_forward(const CellWeights& w, CandidateMode mode, std::span<const double> u,
                  std::span<const double> h_prev, double seconds, StepCache& cache);

/// Accumulates weight gradients into `grad`, adds d/du into `du` and writes
/// d/dh_prev into `dh_prev` (overwritten).
void cell_backward(const CellWeights& w, CandidateMode mode, const StepCache& cache,
                   std::span<const double> dh, CellWeights& grad, std::span<double> du,
                   std::span<double> dh_prev);

void check_shapes(const CellWeights& w, std::size_t e, std::size_t h);

}  // namespace clickpath::apm::detail
