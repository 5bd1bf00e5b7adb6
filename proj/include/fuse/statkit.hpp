#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fuse::stats {

enum class TestMethod { Exact, NormalApprox };

struct TestResult {
    double statistic = 0.0;  // U for the first sample
    double p_value = 1.0;    // two-sided
    TestMethod method = TestMethod::Exact;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

/// Sample Pearson correlation, two-pass (mean-subtracted) formula.
/// Throws LengthMismatch (sizes differ or < 2) and ZeroVariance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation: Pearson on average ranks (ties share the
/// mean of the rank positions they occupy).
double spearman(std::span<const double> x, std::span<const double> y);

/// Average ranks (1-based) with ties resolved to the mean rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Mann-Whitney U test, two-sided. U is reported for sample `a`.
/// Exact mode enumerates all C(n1+n2, n1) group assignments and counts
/// splits at least as extreme as the observed |U - n1*n2/2|; it applies
/// when n1+n2 <= exact_limit and the pooled values are tie-free.
/// Otherwise: normal approximation with tie correction and a 0.5
/// continuity correction. Throws EmptyGroup when either sample is empty.
TestResult mann_whitney(std::span<const double> a, std::span<const double> b,
                        std::size_t exact_limit = 20);

/// Rank-biserial effect size: r = 1 - 2U/(n1*n2).
double rank_biserial(double u, std::size_t n1, std::size_t n2);

/// Bonferroni-adjusted significance level: alpha/m.
double bonferroni(double alpha, std::size_t m_tests);

/// Standard normal survival function P(Z > z).
double normal_sf(double z);

double median(std::vector<double> values);

}  // namespace fuse::stats
