#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace cgrg {

/// Objective returning f(x) and writing the gradient into `grad`.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct BfgsOptions {
    double grad_tol = 1e-10;
    int max_iterations = 10000;
};

/// Unconstrained BFGS with Armijo backtracking. Stops when the gradient
/// infinity norm drops below grad_tol, or when a line search can no longer
/// decrease f (reported as converged only if the gradient is also small).
MinimizeResult minimize_bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& opts = {});

struct ScalarMinimum {
    double x = 0.0;
    double value = 0.0;
    int iterations = 0;
};

/// Golden-section search for a minimum of f on [lo, hi]; stops once the
/// bracket is narrower than tol. Endpoints are compared with the interior
/// minimum so boundary optima are returned exactly.
ScalarMinimum golden_section(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-10);

struct RootResult {
    double x = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Root of the increasing function f(x) - target on [lo, hi] (which must
/// bracket it) by Newton steps, falling back to bisection whenever a step
/// leaves the current bracket. df is the derivative of f.
RootResult solve_increasing(const std::function<double(double)>& f, const std::function<double(double)>& df,
                            double target, double lo, double hi, double tol = 1e-12, int max_iterations = 200);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::span<const double> v);

/// softmax(theta) * scale.
std::vector<double> softmax(std::span<const double> theta, double scale = 1.0);

}  // namespace cgrg
