#include "fnet/stats.hpp"

#include "fnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace fnet {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double mean(std::span<const double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

RankSumResult rank_sum_test(std::span<const double> a, std::span<const double> b) {
    const std::size_t m = a.size();
    const std::size_t n = b.size();
    if (m == 0 || n == 0) throw ContractError("rank_sum_test: both samples must be nonempty");

    struct Tagged {
        double value;
        bool from_a;
    };
    std::vector<Tagged> pooled;
    pooled.reserve(m + n);
    for (double v : a) pooled.push_back({v, true});
    for (double v : b) pooled.push_back({v, false});
    std::sort(pooled.begin(), pooled.end(),
              [](const Tagged& x, const Tagged& y) { return x.value < y.value; });

    // Midranks over tie groups; collect tie sizes for the variance correction.
    const std::size_t total = m + n;
    std::vector<double> ranks(total);
    std::vector<std::size_t> tie_sizes;
    std::size_t i = 0;
    while (i < total) {
        std::size_t j = i;
        while (j + 1 < total && pooled[j + 1].value == pooled[i].value) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[k] = midrank;
        if (j > i) tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }

    double rank_sum_a = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
        if (pooled[k].from_a) rank_sum_a += ranks[k];
    }

    RankSumResult result;
    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    // U counts b-values exceeded by a-values; small U means a is smaller.
    result.u_statistic = rank_sum_a - md * (md + 1.0) / 2.0;

    const double mean_u = md * nd / 2.0;
    double tie_term = 0.0;
    for (std::size_t t : tie_sizes) {
        const double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    const double total_d = static_cast<double>(total);
    const double var_u =
        md * nd / 12.0 * (total_d + 1.0 - tie_term / (total_d * (total_d - 1.0)));
    if (var_u <= 0.0) {
        // All values identical: no evidence either way.
        result.z = 0.0;
        result.p_less = 0.5;
        result.p_two_sided = 1.0;
        return result;
    }
    // Continuity correction toward the mean.
    const double shift = result.u_statistic - mean_u;
    const double corrected = shift - (shift > 0.0 ? 0.5 : (shift < 0.0 ? -0.5 : 0.0));
    result.z = corrected / std::sqrt(var_u);
    result.p_less = normal_cdf(result.z);
    result.p_two_sided = 2.0 * normal_cdf(-std::abs(result.z));
    result.p_two_sided = std::min(1.0, result.p_two_sided);
    return result;
}

} // namespace fnet
