#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "clickpath/error.hpp"
#include "clickpath/stats.hpp"

namespace clickpath::stats {

namespace {

struct Ranked {
    std::vector<double> ranks;  // pooled midranks, x first then y
    double rank_sum_x = 0.0;
    double tie_term = 0.0;      // sum of t^3 - t over tie groups
};

Ranked rank(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw EmptySample();
    const std::size_t n = x.size() + y.size();
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    Ranked r;
    r.ranks.assign(n, 0.0);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) r.ranks[order[k]] = mid;
        double t = static_cast<double>(j - i + 1);
        r.tie_term += t * t * t - t;
        i = j + 1;
    }
    for (std::size_t i = 0; i < x.size(); ++i) r.rank_sum_x += r.ranks[i];
    return r;
}

double u_of(const Ranked& r, std::size_t nx) {
    double m = static_cast<double>(nx);
    return r.rank_sum_x - m * (m + 1.0) / 2.0;
}

}  // namespace

Alternative parse_alternative(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "greater") return Alternative::kGreater;
    if (lower == "less") return Alternative::kLess;
    throw InvalidArgument("alternative must be 'greater' or 'less'");
}

double mann_whitney_exact_p(std::span<const double> x, std::span<const double> y,
                            Alternative alternative) {
    auto r = rank(x, y);
    const std::size_t n = r.ranks.size();
    const std::size_t m = x.size();
    if (n > 60) throw InvalidArgument("exact test supports at most 60 values");
    // Doubled midranks are integers, so subset sums can be counted exactly.
    std::vector<std::size_t> doubled(n);
    for (std::size_t i = 0; i < n; ++i) doubled[i] = static_cast<std::size_t>(std::lround(2.0 * r.ranks[i]));
    const std::size_t max_sum = std::accumulate(doubled.begin(), doubled.end(), std::size_t{0});
    std::vector<std::vector<double>> ways(m + 1, std::vector<double>(max_sum + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = std::min(i + 1, m); j >= 1; --j) {
            for (std::size_t s = max_sum; s >= doubled[i]; --s) {
                ways[j][s] += ways[j - 1][s - doubled[i]];
                if (s == doubled[i]) break;
            }
        }
    }
    const auto observed = static_cast<std::size_t>(std::lround(2.0 * r.rank_sum_x));
    double total = 0.0;
    double tail = 0.0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
        total += ways[m][s];
        bool in_tail = alternative == Alternative::kGreater ? s >= observed : s <= observed;
        if (in_tail) tail += ways[m][s];
    }
    return tail / total;
}

double mann_whitney_normal_p(std::span<const double> x, std::span<const double> y,
                             Alternative alternative) {
    auto r = rank(x, y);
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    const double n = nx + ny;
    const double u = u_of(r, x.size());
    const double mean = nx * ny / 2.0;
    double var = nx * ny / 12.0 * (n + 1.0);
    if (n > 1.0) var -= nx * ny * r.tie_term / (12.0 * n * (n - 1.0));
    if (var <= 0.0) return 1.0;
    const double sd = std::sqrt(var);
    if (alternative == Alternative::kGreater) {
        double z = (u - mean - 0.5) / sd;
        return 0.5 * std::erfc(z / std::sqrt(2.0));
    }
    double z = (u - mean + 0.5) / sd;
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

MannWhitneyResult mann_whitney_one_tailed(std::span<const double> x, std::span<const double> y,
                                          Alternative alternative) {
    auto r = rank(x, y);
    MannWhitneyResult out;
    out.u = u_of(r, x.size());
    out.exact = x.size() + y.size() <= kExactLimit;
    out.p = out.exact ? mann_whitney_exact_p(x, y, alternative)
                      : mann_whitney_normal_p(x, y, alternative);
    return out;
}

}  // namespace clickpath::stats
