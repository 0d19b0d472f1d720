#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace clickpath::stats {

enum class Alternative {
    kGreater,  // x tends to exceed y
    kLess,     // x tends to fall below y
};

Alternative parse_alternative(std::string_view s);

struct MannWhitneyResult {
    double u = 0.0;  // U of sample x: rank sum of x minus nx(nx+1)/2
    double p = 1.0;
    bool exact = false;
};

/// Rank-sum U with midranks for ties. The p-value is exact when
/// |x| + |y| <= 12 and from the tie-corrected normal approximation with
/// continuity correction otherwise. Throws EmptySample.
MannWhitneyResult mann_whitney_one_tailed(std::span<const double> x, std::span<const double> y,
                                          Alternative alternative);

/// Exact permutation p-value over all ways to assign the pooled midranks to
/// |x| positions. Throws EmptySample, InvalidArgument above 60 values.
double mann_whitney_exact_p(std::span<const double> x, std::span<const double> y,
                            Alternative alternative);

/// Normal-approximation p-value regardless of sample size. Throws EmptySample.
double mann_whitney_normal_p(std::span<const double> x, std::span<const double> y,
                             Alternative alternative);

inline constexpr std::size_t kExactLimit = 12;

}  // namespace clickpath::stats
