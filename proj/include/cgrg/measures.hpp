#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cgrg/graph_sample.hpp"
#include "cgrg/model.hpp"

namespace cgrg {

/// Finite measure on the colour alphabet (omega, mu_1, L^1).
class ColourMeasure {
public:
    ColourMeasure() = default;
    explicit ColourMeasure(std::vector<double> weights);

    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t a) const { return weights_[a]; }
    std::span<const double> weights() const { return weights_; }
    double total_mass() const;

    friend bool operator==(const ColourMeasure&, const ColourMeasure&) = default;

private:
    std::vector<double> weights_;
};

/// Finite measure on colour pairs (varpi, L^2, H_2(mu)).
///
/// Symmetry is not enforced at construction because H_2 of an arbitrary
/// neighbourhood measure need not be symmetric; operations that require a
/// symmetric pair measure check it themselves.
class PairMeasure {
public:
    PairMeasure() = default;
    explicit PairMeasure(std::size_t k) : w_(k) {}
    explicit PairMeasure(SquareMatrix weights);

    std::size_t size() const { return w_.size(); }
    double operator()(std::size_t a, std::size_t b) const { return w_(a, b); }
    const SquareMatrix& matrix() const { return w_; }
    double total_mass() const { return w_.sum(); }
    bool is_symmetric(double tol = 1e-12) const { return w_.is_symmetric(tol); }

    friend bool operator==(const PairMeasure&, const PairMeasure&) = default;

private:
    SquareMatrix w_;
};

/// Neighbour counts l(b) per colour, stored sparsely as sorted (colour, count)
/// entries with count > 0.
class Profile {
public:
    using Entry = std::pair<std::uint32_t, std::uint32_t>;

    Profile() = default;
    /// Accepts entries in any order; zero counts are dropped, repeated colours
    /// are rejected.
    explicit Profile(std::vector<Entry> entries);
    static Profile from_dense(std::span<const std::uint32_t> counts);

    std::uint32_t count(std::uint32_t colour) const;
    std::uint64_t total() const;
    std::span<const Entry> entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    /// "(colour:count)" tokens, e.g. "(0:2)" and "(1:1)".
    std::vector<std::string> tokens() const;
    static Profile from_tokens(std::span<const std::string> tokens);

    auto operator<=>(const Profile&) const = default;
    bool operator==(const Profile&) const = default;

private:
    std::vector<Entry> entries_;
};

struct NeighbourhoodKey {
    std::uint32_t colour = 0;
    Profile profile;

    auto operator<=>(const NeighbourhoodKey&) const = default;
    bool operator==(const NeighbourhoodKey&) const = default;
};

/// Finite measure on (colour, profile) pairs (mu, M, Q[varpi, mu_1]).
///
/// Entries are kept sorted by key with no duplicates and no zero weights.
/// `truncated_mass` records mass a constructor such as q_measure could not
/// represent because of a profile cap; it is zero for empirical measures.
class NeighbourhoodMeasure {
public:
    struct Entry {
        NeighbourhoodKey key;
        double weight = 0.0;
        bool operator==(const Entry&) const = default;
    };

    NeighbourhoodMeasure() = default;
    /// Sorts entries, merges repeated keys by adding weights and drops zeros.
    NeighbourhoodMeasure(std::size_t k, std::vector<Entry> entries, double truncated_mass = 0.0);

    std::size_t colours() const { return k_; }
    std::span<const Entry> entries() const { return entries_; }
    double weight(const NeighbourhoodKey& key) const;
    double total_mass() const;
    double truncated_mass() const { return truncated_mass_; }

    bool operator==(const NeighbourhoodMeasure&) const = default;

private:
    std::size_t k_ = 0;
    std::vector<Entry> entries_;
    double truncated_mass_ = 0.0;
};

/// Probability weights delta(m) on total degrees m = 0..size()-1.
class DegreeDistribution {
public:
    DegreeDistribution() = default;
    explicit DegreeDistribution(std::vector<double> weights);

    /// Poisson(mean) truncated where the upper tail drops below tail_tol,
    /// then renormalised to a probability vector.
    static DegreeDistribution poisson(double mean, double tail_tol = 1e-12);
    static DegreeDistribution point_mass(std::size_t m);

    std::size_t size() const { return weights_.size(); }
    /// delta(m), zero beyond the stored support.
    double operator[](std::size_t m) const { return m < weights_.size() ? weights_[m] : 0.0; }
    std::span<const double> weights() const { return weights_; }
    double total_mass() const;
    double mean() const;

    friend bool operator==(const DegreeDistribution&, const DegreeDistribution&) = default;

private:
    std::vector<double> weights_;
};

/// Integer counts behind the empirical measures of one sample.
///
/// pair_counts(a,b) counts ordered edge ends: an (a,b) edge with a != b
/// adds one to (a,b) and one to (b,a); an (a,a) edge adds two to (a,a).
/// Hence L^2 = pair_counts / n and ||L^2|| = 2|E|/n.
struct EmpiricalCounts {
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t edge_count = 0;
    std::vector<std::uint64_t> colour_counts;
    std::vector<std::uint64_t> pair_counts;
    std::vector<std::pair<NeighbourhoodKey, std::uint64_t>> profile_counts;
    std::vector<std::uint64_t> degree_counts;

    std::uint64_t pair_count(std::size_t a, std::size_t b) const { return pair_counts[a * k + b]; }
    /// H_2 of the neighbourhood counts: entry (b,a) = sum over vertices of
    /// colour a of l(b). Equal to pair_counts on every well-formed sample.
    std::vector<std::uint64_t> profile_pair_counts() const;
};

struct EmpiricalMeasures {
    ColourMeasure colour;          // L^1
    PairMeasure pair;              // L^2
    NeighbourhoodMeasure neighbourhood;  // M
    DegreeDistribution degree;     // D
    EmpiricalCounts counts;
};

/// L^1, L^2, M and D of a sample. Throws SampleError on malformed samples.
EmpiricalMeasures empirical_measures(const GraphSample& sample);

/// Sum p log(p/q) over a common support, with 0 log(0/q) = 0 and +inf when
/// p > 0 = q. No mass-correction terms are added for unnormalised inputs.
double relative_entropy(std::span<const double> p, std::span<const double> q);
double relative_entropy(const ColourMeasure& p, const ColourMeasure& q);
double relative_entropy(const PairMeasure& p, const PairMeasure& q);
/// Supports of different length are compared with zero padding.
double relative_entropy(const DegreeDistribution& p, const DegreeDistribution& q);
double relative_entropy(const NeighbourhoodMeasure& p, const NeighbourhoodMeasure& q);

/// H(varpi || rho C omega x omega) + rho ||C omega x omega|| - ||varpi||.
/// Nonnegative, zero iff varpi = rho(d) C omega x omega, +inf when varpi
/// charges a pair where C(a,b) omega(a) omega(b) = 0.
double h_functional(const PairMeasure& varpi, const ColourMeasure& omega, const ModelParameters& params);

/// log Q[varpi, mu_1](a, l) at a single point, without truncation.
double log_q_weight(const PairMeasure& varpi, const ColourMeasure& mu1, const NeighbourhoodKey& key);

/// Q[varpi, mu_1] on profiles with every entry <= cap. Under Q, l(b) given
/// colour a is Poisson(varpi(a,b)/mu_1(a)) independently over b. The mass
/// lost to the cap is stored as the measure's truncated_mass.
/// Throws std::domain_error if varpi(a,.) charges a colour with mu_1(a) = 0.
NeighbourhoodMeasure q_measure(const PairMeasure& varpi, const ColourMeasure& mu1, std::uint32_t cap);

/// Q with a separate cap per colour pair, each doubled from `initial_cap`
/// until that pair's Poisson tail is small enough for the total truncated
/// mass to stay below tol.
NeighbourhoodMeasure q_measure_adaptive(const PairMeasure& varpi, const ColourMeasure& mu1, double tol = 1e-12,
                                        std::uint32_t initial_cap = 8);

struct ProfileMarginals {
    ColourMeasure mu1;
    PairMeasure h2;  // h2(b,a) = sum_l l(b) mu(a,l)
};

ProfileMarginals profile_marginals(const NeighbourhoodMeasure& mu);

enum class Consistency { consistent, sub_consistent, inconsistent };

std::string_view to_string(Consistency c);

/// Classifies (varpi, mu) by entrywise comparison of H_2(mu) with varpi:
/// consistent when |H_2 - varpi| <= tol everywhere, sub_consistent when
/// H_2 <= varpi + tol everywhere, inconsistent otherwise. Only the
/// consistency relation is checked; the additional marginal condition that
/// accompanies it in the joint rate function is not enforced here.
Consistency check_consistency(const PairMeasure& varpi, const NeighbourhoodMeasure& mu, double tol = 1e-9);

/// Half the l1 distance, plus half of each side's truncated mass (so the
/// result bounds the distance to the untruncated measures).
double total_variation(const NeighbourhoodMeasure& p, const NeighbourhoodMeasure& q);
double total_variation(const DegreeDistribution& p, const DegreeDistribution& q);

}  // namespace cgrg
