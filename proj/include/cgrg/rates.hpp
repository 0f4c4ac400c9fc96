#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cgrg/measures.hpp"
#include "cgrg/model.hpp"

namespace cgrg {

struct RateDiagnostics {
    std::string method;
    int iterations = 0;
    double residual = 0.0;
    bool converged = true;
    std::optional<double> root;    // a(y) for xi1, argmin y for zeta
    std::vector<double> witness;   // argmin omega for zeta / psi
    double truncation_residual = 0.0;
    std::string reason;            // why the value is +inf, if it is
};

/// Extended-real rate value with the solver trace that produced it.
/// Values within 1e-10 below zero are clamped to zero.
struct RateResult {
    double value = 0.0;
    RateDiagnostics diagnostics;

    bool finite() const;
    static RateResult infinite(std::string method, std::string reason);
};

/// H(omega || nu) + (1/2) H_C^d(varpi || omega).
RateResult rate_I(const ColourMeasure& omega, const PairMeasure& varpi, const ModelParameters& params);

/// H(mu || Q[varpi, mu_1]) + H(mu_1 || nu) + (1/2) H_C^d(varpi || mu_1) for a
/// consistent pair, +inf otherwise. Q is evaluated pointwise on the support
/// of mu, so no truncation of Q is involved.
RateResult rate_J(const PairMeasure& varpi, const NeighbourhoodMeasure& mu, const ModelParameters& params,
                  double consistency_tol = 1e-9);

/// Degree rate of the uncoloured graph with kernel c in dimension d.
RateResult rate_eta1(const DegreeDistribution& delta, double c, int d);

/// The function minimised over x >= <delta> in the derivation of eta1:
/// H(delta || q_x) + x/2 log x - x/2 log(rho c) + rho c/2 - x/2.
/// Its minimum over x >= <delta> is at x = <delta> when <delta> >= rho c;
/// below rho c it is not monotone in x.
double eta_inner(const DegreeDistribution& delta, double x, double c, int d);

/// Root a > 0 of a (1 - e^{-a}) = t (a = 0 for t = 0).
struct IsolatedRoot {
    double a = 0.0;
    double residual = 0.0;
    int iterations = 0;
};
IsolatedRoot isolated_root(double t);

/// Rate of the isolated-vertex fraction y in [0, 1].
RateResult rate_xi1(double y, double c, int d);

/// Numerical minimum of eta1 over degree laws on {0..support} with
/// delta(0) = y; an oracle for rate_xi1 independent of its closed form.
struct ContractionResult {
    double value = 0.0;
    DegreeDistribution minimiser;
    int iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;
};
ContractionResult contract_eta1(double y, double c, int d, std::size_t support = 60);

/// The conditional-Poisson law (1-y)/(1-e^{-a}) q_a(k), k >= 1, with
/// delta(0) = y, truncated at `support`.
DegreeDistribution contraction_minimiser(double y, double c, int d, std::size_t support = 60);

/// Range of (1/2) rho(d) omega^T C omega over the simplex restricted to the
/// support of nu.
struct QuadraticRange {
    double min = 0.0;
    double max = 0.0;
    std::vector<double> argmin;
    std::vector<double> argmax;
};
QuadraticRange quadratic_range(const ModelParameters& params, std::uint64_t seed = 1);

/// psi(y) = inf { H(omega || nu) : (1/2) rho omega^T C omega = y }, +inf
/// outside the attainable range.
RateResult psi(double y, const ModelParameters& params, std::uint64_t seed = 1);

/// Edges-per-vertex rate x log x - x + inf_y { psi(y) - x log y + y }.
RateResult rate_zeta(double x, const ModelParameters& params, std::uint64_t seed = 1);

/// The same rate as one joint minimisation over omega:
/// x log x - x + min_omega { H(omega || nu) - x log q(omega) + q(omega) }.
RateResult rate_zeta_direct(double x, const ModelParameters& params, std::uint64_t seed = 1);

struct TypicalMeasures {
    ColourMeasure omega;          // nu
    PairMeasure varpi;            // rho C nu x nu
    NeighbourhoodMeasure mu;      // Q[varpi, nu]
    DegreeDistribution delta;     // total-degree law under mu
};

/// Zeros of the rate functions; mu and delta are truncated where the lost
/// mass drops below tol.
TypicalMeasures typical_measures(const ModelParameters& params, double tol = 1e-12);

}  // namespace cgrg
