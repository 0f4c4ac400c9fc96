#include "cgrg/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace cgrg {

std::size_t Rng::categorical(std::span<const double> cdf) {
    const double u = uniform();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<std::size_t>(it - cdf.begin());
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
    // rejection keeps the draw exactly uniform
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return x % bound;
}

std::vector<double> normalised_cdf(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("normalised_cdf: weights sum to zero");
    std::vector<double> cdf(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        cdf[i] = acc / total;
    }
    // zero-weight trailing entries must never be selected
    std::size_t last = weights.size();
    while (last > 0 && weights[last - 1] == 0.0) --last;
    for (std::size_t i = last - 1; i < weights.size(); ++i) cdf[i] = 1.0;
    return cdf;
}

}  // namespace cgrg
