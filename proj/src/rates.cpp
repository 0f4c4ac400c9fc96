#include "cgrg/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cgrg/numeric.hpp"
#include "cgrg/optimize.hpp"
#include "cgrg/rng.hpp"

namespace cgrg {

namespace {

constexpr double kClamp = 1e-10;

RateResult finish(double value, RateDiagnostics diag) {
    if (value < 0.0 && value >= -kClamp) value = 0.0;
    return {value, std::move(diag)};
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void check_probability(std::span<const double> w, const char* what) {
    double total = 0.0;
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": negative or non-finite weight");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument(std::string(what) + ": must be a probability measure (total mass " +
                                    std::to_string(total) + ")");
}

}  // namespace

bool RateResult::finite() const { return std::isfinite(value); }

RateResult RateResult::infinite(std::string method, std::string reason) {
    RateResult r;
    r.value = kInf;
    r.diagnostics.method = std::move(method);
    r.diagnostics.reason = std::move(reason);
    return r;
}

// ---------------------------------------------------------------------------
// Joint rates
// ---------------------------------------------------------------------------

RateResult rate_I(const ColourMeasure& omega, const PairMeasure& varpi, const ModelParameters& params) {
    if (omega.size() != params.k()) throw std::invalid_argument("rate_I: omega does not match the alphabet");
    check_probability(omega.weights(), "rate_I: omega");
    const double h_nu = relative_entropy(omega, ColourMeasure(std::vector<double>(params.nu().begin(), params.nu().end())));
    if (!std::isfinite(h_nu)) return RateResult::infinite("closed_form", "omega charges a colour outside supp(nu)");
    const double h = h_functional(varpi, omega, params);
    if (!std::isfinite(h))
        return RateResult::infinite("closed_form", "varpi not absolutely continuous w.r.t. rho C omega x omega");
    RateDiagnostics diag;
    diag.method = "closed_form";
    return finish(h_nu + 0.5 * h, diag);
}

RateResult rate_J(const PairMeasure& varpi, const NeighbourhoodMeasure& mu, const ModelParameters& params,
                  double consistency_tol) {
    if (varpi.size() != params.k() || mu.colours() != params.k())
        throw std::invalid_argument("rate_J: measures do not match the alphabet");
    if (std::abs(mu.total_mass() + mu.truncated_mass() - 1.0) > 1e-9)
        throw std::invalid_argument("rate_J: mu must be a probability measure");
    if (!varpi.is_symmetric(1e-12)) return RateResult::infinite("closed_form", "varpi is not symmetric");

    const Consistency cls = check_consistency(varpi, mu, consistency_tol);
    if (cls != Consistency::consistent)
        return RateResult::infinite("closed_form", "(varpi, mu) is " + std::string(to_string(cls)));

    const ProfileMarginals marg = profile_marginals(mu);
    double h_q = 0.0;
    try {
        for (const auto& e : mu.entries()) {
            const double lq = log_q_weight(varpi, marg.mu1, e.key);
            if (!std::isfinite(lq))
                return RateResult::infinite("closed_form", "mu charges a profile outside the support of Q");
            h_q += e.weight * (std::log(e.weight) - lq);
        }
    } catch (const std::domain_error& err) {
        return RateResult::infinite("closed_form", err.what());
    }
    const double h_nu = relative_entropy(marg.mu1, ColourMeasure(std::vector<double>(params.nu().begin(), params.nu().end())));
    if (!std::isfinite(h_nu)) return RateResult::infinite("closed_form", "mu_1 charges a colour outside supp(nu)");
    const double h = h_functional(varpi, marg.mu1, params);
    if (!std::isfinite(h))
        return RateResult::infinite("closed_form", "varpi not absolutely continuous w.r.t. rho C mu_1 x mu_1");
    RateDiagnostics diag;
    diag.method = "closed_form";
    diag.truncation_residual = mu.truncated_mass();
    return finish(h_q + h_nu + 0.5 * h, diag);
}

// ---------------------------------------------------------------------------
// Degree and isolated-vertex rates
// ---------------------------------------------------------------------------

namespace {

/// H(delta || q_x), +inf when x = 0 and delta charges m > 0.
double poisson_entropy(const DegreeDistribution& delta, double x) {
    double h = 0.0;
    for (std::size_t m = 0; m < delta.size(); ++m) {
        const double p = delta[m];
        if (p == 0.0) continue;
        const double lq = log_poisson_pmf(x, m);
        if (!std::isfinite(lq)) return kInf;
        h += p * (std::log(p) - lq);
    }
    return h;
}

}  // namespace

RateResult rate_eta1(const DegreeDistribution& delta, double c, int d) {
    if (!(c > 0.0)) throw std::invalid_argument("rate_eta1: c must be > 0");
    check_probability(delta.weights(), "rate_eta1: delta");
    const double rc = ball_volume(d) * c;
    const double m = delta.mean();
    RateDiagnostics diag;
    diag.method = "closed_form";
    const double h = poisson_entropy(delta, m);
    if (!std::isfinite(h)) return RateResult::infinite("closed_form", "delta not absolutely continuous w.r.t. q_<delta>");
    const double value = (m > 0.0 ? 0.5 * m * std::log(m / rc) : 0.0) - 0.5 * m + 0.5 * rc + h;
    return finish(value, diag);
}

double eta_inner(const DegreeDistribution& delta, double x, double c, int d) {
    if (!(x >= 0.0)) throw std::invalid_argument("eta_inner: x must be >= 0");
    const double rc = ball_volume(d) * c;
    return poisson_entropy(delta, x) + 0.5 * xlogx(x) - 0.5 * x * std::log(rc) + 0.5 * rc - 0.5 * x;
}

IsolatedRoot isolated_root(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("isolated_root: t must be finite and >= 0");
    if (t == 0.0) return {0.0, 0.0, 0};
    // a(1 - e^{-a}) is increasing with a(1 - e^{-a}) >= a - 1, so [0, t + 1] brackets the root
    const auto f = [](double a) { return -a * std::expm1(-a); };
    const auto df = [](double a) { return -std::expm1(-a) + a * std::exp(-a); };
    const RootResult r = solve_increasing(f, df, t, 0.0, t + 1.0, 1e-13);
    return {r.x, r.residual, r.iterations};
}

RateResult rate_xi1(double y, double c, int d) {
    if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("rate_xi1: y must lie in [0, 1]");
    if (!(c > 0.0)) throw std::invalid_argument("rate_xi1: c must be > 0");
    const double rc = ball_volume(d) * c;
    RateDiagnostics diag;
    diag.method = "root+closed_form";
    if (y == 1.0) {
        diag.root = 0.0;
        return finish(0.5 * rc, diag);
    }
    const double t = rc * (1.0 - y);
    const IsolatedRoot root = isolated_root(t);
    diag.root = root.a;
    diag.residual = root.residual;
    diag.iterations = root.iterations;
    diag.converged = root.residual < 1e-12;
    const double value = xlogx(y) + rc * y * (1.0 - 0.5 * y) - (1.0 - y) * std::log(rc / root.a) +
                         (root.a - t) * (root.a - t) / (2.0 * rc);
    return finish(value, diag);
}

DegreeDistribution contraction_minimiser(double y, double c, int d, std::size_t support) {
    if (!(y >= 0.0 && y < 1.0)) throw std::invalid_argument("contraction_minimiser: y must lie in [0, 1)");
    const double a = isolated_root(ball_volume(d) * c * (1.0 - y)).a;
    std::vector<double> w(support + 1, 0.0);
    w[0] = y;
    const double scale = (1.0 - y) / -std::expm1(-a);
    for (std::size_t k = 1; k <= support; ++k) w[k] = scale * poisson_pmf(a, k);
    return DegreeDistribution(std::move(w));
}

ContractionResult contract_eta1(double y, double c, int d, std::size_t support) {
    if (!(y >= 0.0 && y < 1.0)) throw std::invalid_argument("contract_eta1: y must lie in [0, 1)");
    if (support < 1) throw std::invalid_argument("contract_eta1: support must be >= 1");
    const double rc = ball_volume(d) * c;
    const double rest = 1.0 - y;
    std::vector<double> log_fact(support + 1, 0.0);
    for (std::size_t k = 1; k <= support; ++k) log_fact[k] = std::lgamma(static_cast<double>(k) + 1.0);

    // delta(k) = (1-y) softmax(theta)_k for k = 1..support; eta1 written as
    // -m/2 log(m rho c) + m/2 + rho c/2 + sum delta log delta + sum delta log k!
    const Objective objective = [&](std::span<const double> theta, std::span<double> grad) {
        const auto p = softmax(theta, rest);
        double m = 0.0, ent = 0.0;
        for (std::size_t i = 0; i < support; ++i) {
            const double k = static_cast<double>(i + 1);
            m += k * p[i];
            ent += xlogx(p[i]) + p[i] * log_fact[i + 1];
        }
        const double value = -0.5 * m * std::log(m * rc) + 0.5 * m + 0.5 * rc + xlogx(y) + ent;
        // d eta / d delta_k = log delta_k + 1 + log k! - (k/2) log(m rho c)
        std::vector<double> g(support);
        double mean_g = 0.0;
        for (std::size_t i = 0; i < support; ++i) {
            const double k = static_cast<double>(i + 1);
            g[i] = (p[i] > 0.0 ? std::log(p[i]) : -745.0) + 1.0 + log_fact[i + 1] - 0.5 * k * std::log(m * rc);
            mean_g += p[i] * g[i];
        }
        mean_g /= rest;
        for (std::size_t i = 0; i < support; ++i) grad[i] = p[i] * (g[i] - mean_g);
        return value;
    };

    BfgsOptions opts;
    opts.grad_tol = 1e-11;
    const MinimizeResult r = minimize_bfgs(objective, std::vector<double>(support, 0.0), opts);
    std::vector<double> w(support + 1);
    w[0] = y;
    const auto p = softmax(r.x, rest);
    std::copy(p.begin(), p.end(), w.begin() + 1);
    return {r.value, DegreeDistribution(std::move(w)), r.iterations, r.grad_norm, r.converged};
}

// ---------------------------------------------------------------------------
// Edges per vertex
// ---------------------------------------------------------------------------

namespace {

/// The colours charged by nu and the model restricted to them.
struct ActiveModel {
    std::vector<std::size_t> colours;
    std::vector<double> nu;
    SquareMatrix kernel;  // rho C on active colours
    std::size_t k_full = 0;

    explicit ActiveModel(const ModelParameters& params) : k_full(params.k()) {
        for (std::size_t a = 0; a < params.k(); ++a)
            if (params.nu(a) > 0.0) colours.push_back(a);
        kernel = SquareMatrix(colours.size());
        for (std::size_t i = 0; i < colours.size(); ++i) {
            nu.push_back(params.nu(colours[i]));
            for (std::size_t j = 0; j < colours.size(); ++j)
                kernel(i, j) = params.rho() * params.kernel(colours[i], colours[j]);
        }
    }

    std::size_t size() const { return colours.size(); }

    double q(std::span<const double> w) const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = 0; j < size(); ++j) s += kernel(i, j) * w[i] * w[j];
        return 0.5 * s;
    }

    /// grad q = rho C omega.
    std::vector<double> grad_q(std::span<const double> w) const {
        std::vector<double> g(size(), 0.0);
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = 0; j < size(); ++j) g[i] += kernel(i, j) * w[j];
        return g;
    }

    double entropy(std::span<const double> w) const {
        double h = 0.0;
        for (std::size_t i = 0; i < size(); ++i) h += entropy_term(w[i], nu[i]);
        return h;
    }

    std::vector<double> expand(std::span<const double> w) const {
        std::vector<double> out(k_full, 0.0);
        for (std::size_t i = 0; i < size(); ++i) out[colours[i]] = w[i];
        return out;
    }

    std::vector<double> log_nu() const {
        std::vector<double> t(size());
        for (std::size_t i = 0; i < size(); ++i) t[i] = std::log(nu[i]);
        return t;
    }
};

std::vector<double> random_simplex_point(std::size_t k, Rng& rng) {
    std::vector<double> w(k);
    double total = 0.0;
    for (double& v : w) total += v = -std::log(rng.uniform_open_left());
    for (double& v : w) v /= total;
    return w;
}

/// Projected gradient ascent (sign=+1) or descent (sign=-1) of q.
std::vector<double> extremise_q(const ActiveModel& m, std::vector<double> w, double sign) {
    double scale = 0.0;
    for (double v : m.kernel.data()) scale = std::max(scale, std::abs(v));
    const double step = 1.0 / (scale * static_cast<double>(m.size()) + 1e-300);
    for (int it = 0; it < 5000; ++it) {
        const auto g = m.grad_q(w);
        std::vector<double> moved(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) moved[i] = w[i] + sign * step * g[i];
        auto next = project_simplex(moved);
        double change = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) change = std::max(change, std::abs(next[i] - w[i]));
        w = std::move(next);
        if (change < 1e-15) break;
    }
    return w;
}

/// softmax gradient chain rule: d/dtheta_j = w_j (G_j - sum_i w_i G_i).
void softmax_chain(std::span<const double> w, std::span<const double> G, std::span<double> grad) {
    double mean = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) mean += w[i] * G[i];
    for (std::size_t i = 0; i < w.size(); ++i) grad[i] = w[i] * (G[i] - mean);
}

constexpr int kRestarts = 20;

}  // namespace

QuadraticRange quadratic_range(const ModelParameters& params, std::uint64_t seed) {
    const ActiveModel m(params);
    Rng rng(seed);
    std::vector<std::vector<double>> starts;
    starts.push_back(m.nu);
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::vector<double> e(m.size(), 0.0);
        e[i] = 1.0;
        starts.push_back(e);
    }
    for (int r = 0; r < kRestarts; ++r) starts.push_back(random_simplex_point(m.size(), rng));

    QuadraticRange out;
    out.min = kInf;
    out.max = -kInf;
    std::vector<double> argmin, argmax;
    for (const auto& s : starts) {
        // the starting points themselves (vertices included) are candidates too
        for (const auto& w : {s, extremise_q(m, s, -1.0), extremise_q(m, s, +1.0)}) {
            const double v = m.q(w);
            if (v < out.min) out.min = v, argmin = w;
            if (v > out.max) out.max = v, argmax = w;
        }
    }
    out.argmin = m.expand(argmin);
    out.argmax = m.expand(argmax);
    return out;
}

namespace {

RateResult psi_on_range(double y, const ActiveModel& m, const QuadraticRange& range, std::uint64_t seed) {
    const double slack = 1e-12 * std::max(1.0, range.max);
    if (y < range.min - slack || y > range.max + slack)
        return RateResult::infinite("augmented_lagrangian", "y outside the attainable range of (1/2) rho omega^T C omega");

    RateDiagnostics diag;
    diag.method = "augmented_lagrangian";
    if (m.size() == 1 || range.max - range.min <= slack) {
        // a single attainable value, taken at omega = nu
        diag.witness = m.expand(m.nu);
        return finish(0.0, diag);
    }

    double best = kInf;
    std::vector<double> best_w;
    double best_residual = kInf;
    int total_iterations = 0;

    // candidate extreme points hit the constraint exactly when y is an endpoint
    for (const auto* cand : {&range.argmin, &range.argmax}) {
        std::vector<double> w;
        for (auto c : m.colours) w.push_back((*cand)[c]);
        const double r = std::abs(m.q(w) - y);
        if (r <= slack) {
            const double h = m.entropy(w);
            if (h < best) best = h, best_w = w, best_residual = r;
        }
    }

    Rng rng(seed ^ 0x5bd1e995ULL);
    for (int restart = 0; restart < kRestarts; ++restart) {
        std::vector<double> theta;
        if (restart == 0) {
            theta = m.log_nu();
        } else {
            const auto w0 = random_simplex_point(m.size(), rng);
            for (double v : w0) theta.push_back(std::log(std::max(v, 1e-300)));
        }
        double lambda = 0.0, penalty = 10.0;
        double prev_violation = kInf;
        MinimizeResult r;
        for (int outer = 0; outer < 60; ++outer) {
            const Objective aug = [&](std::span<const double> th, std::span<double> grad) {
                const auto w = softmax(th);
                const double viol = m.q(w) - y;
                const auto gq = m.grad_q(w);
                std::vector<double> G(m.size());
                for (std::size_t i = 0; i < m.size(); ++i)
                    G[i] = (w[i] > 0.0 ? std::log(w[i] / m.nu[i]) : -745.0) + 1.0 + (lambda + penalty * viol) * gq[i];
                softmax_chain(w, G, grad);
                return m.entropy(w) + lambda * viol + 0.5 * penalty * viol * viol;
            };
            r = minimize_bfgs(aug, theta, {1e-12, 2000});
            total_iterations += r.iterations;
            theta = r.x;
            const auto w = softmax(theta);
            const double viol = m.q(w) - y;
            lambda += penalty * viol;
            if (std::abs(viol) < 1e-13 * std::max(1.0, y)) break;
            if (std::abs(viol) > 0.25 * prev_violation) penalty *= 4.0;
            prev_violation = std::abs(viol);
        }
        const auto w = softmax(theta);
        const double residual = std::abs(m.q(w) - y);
        const double h = m.entropy(w);
        if (residual < 1e-9 * std::max(1.0, y) && h < best) {
            best = h;
            best_w = w;
            best_residual = residual;
        }
    }
    diag.iterations = total_iterations;
    if (!std::isfinite(best)) {
        diag.converged = false;
        diag.reason = "no restart met the constraint";
        return RateResult{kInf, diag};
    }
    diag.residual = best_residual;
    diag.witness = m.expand(best_w);
    return finish(best, diag);
}

}  // namespace

RateResult psi(double y, const ModelParameters& params, std::uint64_t seed) {
    return psi_on_range(y, ActiveModel(params), quadratic_range(params, seed), seed);
}

RateResult rate_zeta(double x, const ModelParameters& params, std::uint64_t seed) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("rate_zeta: x must be finite and >= 0");
    const QuadraticRange range = quadratic_range(params, seed);
    RateDiagnostics diag;
    const double slack = 1e-12 * std::max(1.0, range.max);
    if (range.max - range.min <= slack) {
        // psi is finite (and zero) at a single point y0
        diag.method = "closed_form";
        const double y0 = 0.5 * (range.min + range.max);
        diag.root = y0;
        if (y0 == 0.0) {
            if (x > 0.0) return RateResult::infinite("closed_form", "no edges are possible");
            return finish(0.0, diag);
        }
        return finish(xlogx(x) - x * std::log(y0) - x + y0, diag);
    }

    diag.method = "grid+golden_section";
    const ActiveModel model(params);
    int evaluations = 0;
    const auto phi = [&](double y) {
        ++evaluations;
        if (y <= 0.0 && x > 0.0) return kInf;
        const double p = psi_on_range(y, model, range, seed).value;
        return p - (x > 0.0 ? x * std::log(y) : 0.0) + y;
    };
    constexpr int grid = 64;
    std::vector<double> ys(grid + 1), vals(grid + 1);
    std::size_t best = 0;
    for (int i = 0; i <= grid; ++i) {
        ys[i] = i == grid ? range.max : range.min + (range.max - range.min) * i / grid;
        vals[i] = phi(ys[i]);
        if (vals[i] < vals[best]) best = static_cast<std::size_t>(i);
    }
    const double lo = ys[best == 0 ? 0 : best - 1];
    const double hi = ys[best == grid ? grid : best + 1];
    ScalarMinimum m = golden_section(phi, lo, hi, 1e-10);
    if (vals[best] < m.value) m = {ys[best], vals[best], m.iterations};
    if (!std::isfinite(m.value)) return RateResult::infinite(diag.method, "no attainable y with finite objective");

    const RateResult at = psi_on_range(m.x, model, range, seed);
    diag.root = m.x;
    diag.witness = at.diagnostics.witness;
    diag.residual = at.diagnostics.residual;
    diag.iterations = evaluations;
    return finish(xlogx(x) - x + m.value, diag);
}

RateResult rate_zeta_direct(double x, const ModelParameters& params, std::uint64_t seed) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("rate_zeta_direct: x must be finite and >= 0");
    const ActiveModel m(params);
    RateDiagnostics diag;
    diag.method = "bfgs_softmax";

    const Objective obj = [&](std::span<const double> th, std::span<double> grad) {
        const auto w = softmax(th);
        const double q = m.q(w);
        if (x > 0.0 && !(q > 0.0)) return kInf;
        const auto gq = m.grad_q(w);
        std::vector<double> G(m.size());
        const double coef = 1.0 - (x > 0.0 ? x / q : 0.0);
        for (std::size_t i = 0; i < m.size(); ++i)
            G[i] = (w[i] > 0.0 ? std::log(w[i] / m.nu[i]) : -745.0) + 1.0 + coef * gq[i];
        softmax_chain(w, G, grad);
        return m.entropy(w) - (x > 0.0 ? x * std::log(q) : 0.0) + q;
    };

    double best = kInf;
    std::vector<double> best_w;
    Rng rng(seed ^ 0x9e3779b9ULL);
    for (int restart = 0; restart < kRestarts; ++restart) {
        std::vector<double> theta;
        if (restart == 0) {
            theta = m.log_nu();
        } else {
            for (double v : random_simplex_point(m.size(), rng)) theta.push_back(std::log(std::max(v, 1e-300)));
        }
        std::vector<double> scratch(theta.size());
        if (!std::isfinite(obj(theta, scratch))) continue;
        const MinimizeResult r = minimize_bfgs(obj, theta, {1e-12, 5000});
        diag.iterations += r.iterations;
        if (r.value < best) {
            best = r.value;
            best_w = softmax(r.x);
            diag.residual = r.grad_norm;
        }
    }
    if (!std::isfinite(best)) return RateResult::infinite(diag.method, "no start with finite objective");
    diag.witness = m.expand(best_w);
    diag.root = m.q(best_w);
    return finish(xlogx(x) - x + best, diag);
}

// ---------------------------------------------------------------------------
// Typical point
// ---------------------------------------------------------------------------

TypicalMeasures typical_measures(const ModelParameters& params, double tol) {
    const std::size_t k = params.k();
    SquareMatrix varpi(k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) varpi(a, b) = params.rho() * params.kernel(a, b) * params.nu(a) * params.nu(b);

    TypicalMeasures out;
    out.omega = ColourMeasure(std::vector<double>(params.nu().begin(), params.nu().end()));
    out.varpi = PairMeasure(varpi);
    out.mu = q_measure_adaptive(out.varpi, out.omega, tol);

    // total degree of a colour-a vertex is Poisson(rho sum_b C(a,b) nu(b))
    std::vector<double> lambda(k, 0.0);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) lambda[a] += params.rho() * params.kernel(a, b) * params.nu(b);
    std::uint64_t cap = 0;
    const auto tail = [&](std::uint64_t cap_) {
        double t = 0.0;
        for (std::size_t a = 0; a < k; ++a) t += params.nu(a) * poisson_upper_tail(lambda[a], cap_);
        return t;
    };
    while (tail(cap) >= tol) cap += 1 + cap / 8;
    std::vector<double> w(cap + 1, 0.0);
    for (std::uint64_t m = 0; m <= cap; ++m)
        for (std::size_t a = 0; a < k; ++a) w[m] += params.nu(a) * poisson_pmf(lambda[a], m);
    const double total = pairwise_sum(w);
    for (double& v : w) v /= total;
    out.delta = DegreeDistribution(std::move(w));
    return out;
}

}  // namespace cgrg
