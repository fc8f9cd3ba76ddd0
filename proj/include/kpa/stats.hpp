#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace kpa {

struct Interval {
    double low;
    double high;
};

/// 95% Wilson score interval for a binomial proportion.
Interval wilson_interval(uint64_t successes, uint64_t trials);

/// Chi-square statistic of observed counts against a uniform distribution.
double chi_square_uniform(std::span<const uint64_t> counts);

/// Upper p-quantile of the chi-square distribution with df degrees of
/// freedom (Wilson-Hilferty approximation; adequate for df >= 3 here).
double chi2_quantile(double p, size_t df);

/// Standard normal quantile (Acklam's rational approximation).
double normal_quantile(double p);

/// One-sided z statistic for H1: p1 > p2 (pooled two-proportion test).
double two_proportion_z(uint64_t s1, uint64_t n1, uint64_t s2, uint64_t n2);

}  // namespace kpa
