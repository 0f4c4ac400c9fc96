#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cgrg/graph_sample.hpp"
#include "cgrg/model.hpp"

namespace cgrg {

/// F(t) = P(|U_1 - U_2| <= t) for independent uniform points, taken as
/// rho(d) t^d. Exact on the torus for t <= 1/2 (throws beyond); on the cube
/// it is the small-radius approximation and ignores boundary loss, which
/// biases it upward by O(t).
double pair_distance_cdf(double t, int d, Geometry geometry);

/// All pairs i < j with dist(i,j) <= radii(c_i, c_j), found with a cell grid
/// whose side is at least the largest radius. Sorted, canonical edges.
std::vector<Edge> find_edges_grid(std::span<const double> points, std::span<const std::uint32_t> colours,
                                  const SquareMatrix& radii, int d, Geometry geometry);

/// O(n^2) reference for find_edges_grid.
std::vector<Edge> find_edges_brute(std::span<const double> points, std::span<const std::uint32_t> colours,
                                   const SquareMatrix& radii, int d, Geometry geometry);

/// A CGRG with n vertices under the null law. Positions are i.i.d. uniform,
/// colours i.i.d. nu, and edges follow params.edge_model(). Deterministic
/// in (n, params, seed).
GraphSample sample_cgrg(std::size_t n, const ModelParameters& params, std::uint64_t seed);

/// Potentials f (per colour) and g (per colour pair) of the exponential
/// change of measure, with the derived normaliser U_f, the finite-n
/// correction h_n and its limit beta.
class TiltingPotentials {
public:
    TiltingPotentials(std::vector<double> f, SquareMatrix g, const ModelParameters& params);
    static TiltingPotentials identity(const ModelParameters& params);

    std::span<const double> f() const { return f_; }
    const SquareMatrix& g() const { return g_; }
    /// U_f = log sum_a e^{f(a)} nu(a).
    double log_normaliser() const { return log_normaliser_; }
    bool is_identity() const;

    /// e^{f(a)} nu(a); proportional to the tilted colour law.
    std::vector<double> tilted_colour_weights() const;
    /// e^{f(a) - U_f} nu(a).
    std::vector<double> tilted_colour_law() const;
    /// F e^g / (1 - F + F e^g) with F = F(r_n(a,b)).
    SquareMatrix tilted_connection_probabilities(std::size_t n) const;
    /// h_n(a,b) = -n log(1 - F + F e^{g(a,b)}).
    SquareMatrix h(std::size_t n) const;
    /// beta(a,b) = rho(d) (1 - e^{g(a,b)}) C(a,b), the n -> infinity limit of h_n.
    SquareMatrix beta() const;

    const ModelParameters& params() const { return params_; }

private:
    ModelParameters params_;
    std::vector<double> f_;
    SquareMatrix g_;
    double log_normaliser_;
};

struct TiltedSample {
    GraphSample sample;
    double log_weight = 0.0;  // log dP/dP~ on the realised sample
};

/// A CGRG under the tilted law: colours i.i.d. from the tilted colour law,
/// and each pair of colours (a,b) joined with the tilted probability.
/// Under EdgeModel::geometric this is realised by tilted radii, so the
/// identity tilt reproduces sample_cgrg bit for bit; the product weight is
/// then the pairwise (independent-edge) likelihood ratio. Under
/// EdgeModel::independent the weight is the exact likelihood ratio.
TiltedSample sample_tilted(std::size_t n, const ModelParameters& params, const TiltingPotentials& pots,
                           std::uint64_t seed);

/// log dP/dP~ of a sample under the product form of the change of measure:
/// -[ n<L1, f - U_f> + (n/2)<L2, g> + (n/2)<L1 x L1, h_n> - (1/2)<L1_diag, h_n> ].
double log_likelihood_ratio(const GraphSample& sample, const ModelParameters& params,
                            const TiltingPotentials& pots);

/// Independent-edge sample in which a uniformly chosen set of `planted`
/// vertices is forced isolated and all other pairs follow the null law.
/// Requires EdgeModel::independent.
GraphSample sample_planted_isolated(std::size_t n, const ModelParameters& params, std::size_t planted,
                                    std::uint64_t seed);

}  // namespace cgrg
