#pragma once

#include <span>

namespace fnet {

/// Wilcoxon-Mann-Whitney rank-sum test with midranks for ties and the
/// tie-corrected normal approximation. u_statistic counts pairs where a
/// sample from `a` beats (is smaller than) a sample from `b`, ties at 1/2.
struct RankSumResult {
    double u_statistic = 0.0;
    double z = 0.0;
    double p_less = 1.0;     // H1: a tends to be smaller than b
    double p_two_sided = 1.0;
};
[[nodiscard]] RankSumResult rank_sum_test(std::span<const double> a, std::span<const double> b);

/// Standard normal CDF.
[[nodiscard]] double normal_cdf(double x);

/// Arithmetic mean; NaN for an empty span.
[[nodiscard]] double mean(std::span<const double> values);

} // namespace fnet
