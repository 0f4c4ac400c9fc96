#include "cgrg/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cgrg {

double entropy_term(double p, double q) {
    if (p <= 0.0) return 0.0;
    if (q <= 0.0) return kInf;
    return p * std::log(p / q);
}

double log_poisson_pmf(double x, std::uint64_t m) {
    if (x < 0.0) throw std::invalid_argument("poisson_pmf: negative parameter");
    if (x == 0.0) return m == 0 ? 0.0 : -kInf;
    const double md = static_cast<double>(m);
    return -x + md * std::log(x) - std::lgamma(md + 1.0);
}

double poisson_pmf(double x, std::uint64_t m) {
    return std::exp(log_poisson_pmf(x, m));
}

double poisson_upper_tail(double x, std::uint64_t cap) {
    if (x < 0.0) throw std::invalid_argument("poisson_upper_tail: negative parameter");
    if (x == 0.0) return 0.0;
    if (static_cast<double>(cap) < x) {
        // below the mode the complement is better conditioned
        double head = 0.0;
        for (std::uint64_t m = 0; m <= cap; ++m) head += poisson_pmf(x, m);
        return std::max(0.0, 1.0 - head);
    }
    double tail = 0.0;
    for (std::uint64_t m = cap + 1;; ++m) {
        const double term = poisson_pmf(x, m);
        tail += term;
        if (term <= tail * 1e-17 || term == 0.0) break;
    }
    return tail;
}

double log_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return -kInf;
    const auto nd = static_cast<double>(n);
    const auto kd = static_cast<double>(k);
    return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double log_sum_exp(std::span<const double> x) {
    double mx = -kInf;
    for (double v : x) mx = std::max(mx, v);
    if (mx == -kInf) return -kInf;
    if (mx == kInf) return kInf;
    double s = 0.0;
    for (double v : x) s += std::exp(v - mx);
    return mx + std::log(s);
}

}  // namespace cgrg
