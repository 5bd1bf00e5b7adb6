#include "fuse/statkit.hpp"

#include "fuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace fuse::stats {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        raise(ErrorCode::LengthMismatch,
              "pearson needs two equal-length series of size >= 2");
    }
    const auto n = static_cast<double>(x.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= n;
    mean_y /= n;

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        raise(ErrorCode::ZeroVariance, "pearson undefined for constant series");
    }
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // positions i..j share the average of 1-based ranks i+1..j+1
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        raise(ErrorCode::LengthMismatch,
              "spearman needs two equal-length series of size >= 2");
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

double normal_sf(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

namespace {

bool has_ties(std::vector<double> pooled) {
    std::sort(pooled.begin(), pooled.end());
    return std::adjacent_find(pooled.begin(), pooled.end()) != pooled.end();
}

// U statistic for the subset of pooled ranks selected by `mask` (tie-free
// case: U depends only on which sorted positions belong to the sample).
// rank_sum uses 0-based positions, hence the +n1 shift to 1-based ranks.
std::int64_t u_from_mask(std::uint32_t mask, std::size_t n, std::size_t n1) {
    std::int64_t rank_sum = 0;
    for (std::size_t pos = 0; pos < n; ++pos) {
        if (mask & (std::uint32_t{1} << pos)) rank_sum += static_cast<std::int64_t>(pos);
    }
    const auto sn1 = static_cast<std::int64_t>(n1);
    return rank_sum + sn1 - sn1 * (sn1 + 1) / 2;
}

// Exact two-sided p: fraction of the C(n, n1) label assignments whose U is
// at least as far from the null mean n1*n2/2 as the observed one. Uses
// integer arithmetic on 2U - n1*n2 so half-integer means never need floats.
double exact_two_sided_p(std::int64_t u_obs, std::size_t n1, std::size_t n2) {
    const std::size_t n = n1 + n2;
    const std::int64_t prod = static_cast<std::int64_t>(n1) * static_cast<std::int64_t>(n2);
    const std::int64_t dev_obs = std::llabs(2 * u_obs - prod);

    std::uint64_t extreme = 0, total = 0;
    // Gosper's hack: iterate all n-bit masks with n1 bits set.
    std::uint32_t mask = (std::uint32_t{1} << n1) - 1;
    const std::uint32_t limit = std::uint32_t{1} << n;
    while (mask < limit) {
        const std::int64_t u = u_from_mask(mask, n, n1);
        if (std::llabs(2 * u - prod) >= dev_obs) ++extreme;
        ++total;
        const std::uint32_t c = mask & (~mask + 1);
        const std::uint32_t r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace

TestResult mann_whitney(std::span<const double> a, std::span<const double> b,
                        std::size_t exact_limit) {
    if (a.empty() || b.empty()) {
        raise(ErrorCode::EmptyGroup, "mann_whitney needs non-empty samples");
    }
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    const std::size_t n = n1 + n2;

    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = average_ranks(pooled);

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < n1; ++i) rank_sum_a += ranks[i];
    const double u = rank_sum_a - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);

    TestResult result;
    result.statistic = u;
    result.n1 = n1;
    result.n2 = n2;

    const bool tied = has_ties(pooled);
    if (n <= exact_limit && !tied) {
        result.method = TestMethod::Exact;
        result.p_value = exact_two_sided_p(static_cast<std::int64_t>(std::llround(u)), n1, n2);
        return result;
    }

    // Tie-corrected normal approximation with continuity correction.
    result.method = TestMethod::NormalApprox;
    const double dn1 = static_cast<double>(n1);
    const double dn2 = static_cast<double>(n2);
    const double dn = static_cast<double>(n);
    const double mu = 0.5 * dn1 * dn2;

    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    double tie_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_sum += t * t * t - t;
        i = j + 1;
    }
    double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_sum / (dn * (dn - 1.0)));
    if (var <= 0.0) {
        result.p_value = 1.0;  // all observations tied
        return result;
    }
    const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
    result.p_value = std::min(1.0, 2.0 * normal_sf(z));
    return result;
}

double rank_biserial(double u, std::size_t n1, std::size_t n2) {
    return 1.0 - 2.0 * u / (static_cast<double>(n1) * static_cast<double>(n2));
}

double bonferroni(double alpha, std::size_t m_tests) {
    if (m_tests == 0) raise(ErrorCode::InvalidConfig, "bonferroni needs m >= 1");
    return alpha / static_cast<double>(m_tests);
}

double median(std::vector<double> values) {
    if (values.empty()) raise(ErrorCode::EmptyGroup, "median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace fuse::stats
