#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace cgrg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// p log(p/q) with 0 log(0/q) = 0 and p log(p/0) = +inf for p > 0.
double entropy_term(double p, double q);

/// log of the Poisson(x) probability of m, with Poisson(0) the point mass at 0.
double log_poisson_pmf(double x, std::uint64_t m);

/// e^{-x} x^m / m!, evaluated in log space.
double poisson_pmf(double x, std::uint64_t m);

/// P(X > cap) for X ~ Poisson(x).
double poisson_upper_tail(double x, std::uint64_t cap);

/// log binomial coefficient log C(n, k); -inf when k > n.
double log_binomial(std::uint64_t n, std::uint64_t k);

/// Pairwise (cascade) summation; result depends only on the order of `values`.
double pairwise_sum(std::span<const double> values);

/// log sum_i exp(x_i); -inf for an empty span or all -inf entries.
double log_sum_exp(std::span<const double> x);

}  // namespace cgrg
