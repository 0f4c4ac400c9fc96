#include "cgrg/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cgrg {

namespace {

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

MinimizeResult minimize_bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& opts) {
    const std::size_t n = x0.size();
    MinimizeResult r;
    r.x = std::move(x0);
    std::vector<double> g(n), g_new(n), x_new(n), p(n), s(n), y(n), Hy(n);
    r.value = f(r.x, g);
    if (!std::isfinite(r.value)) throw std::domain_error("minimize_bfgs: objective not finite at start");

    // inverse Hessian approximation, row-major
    std::vector<double> H(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;

    for (r.iterations = 0; r.iterations < opts.max_iterations; ++r.iterations) {
        r.grad_norm = inf_norm(g);
        if (r.grad_norm < opts.grad_tol) {
            r.converged = true;
            return r;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc -= H[i * n + j] * g[j];
            p[i] = acc;
        }
        double slope = dot(p, g);
        if (!(slope < 0.0)) {
            // lost descent direction: reset to steepest descent
            std::fill(H.begin(), H.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                H[i * n + i] = 1.0;
                p[i] = -g[i];
            }
            slope = dot(p, g);
        }

        double step = 1.0;
        double f_new = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = r.x[i] + step * p[i];
            f_new = f(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= r.value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // no further decrease representable in floating point
            r.converged = r.grad_norm < std::sqrt(opts.grad_tol);
            return r;
        }

        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - r.x[i];
            y[i] = g_new[i] - g[i];
        }
        const double sy = dot(s, y);
        if (sy > 1e-300) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += H[i * n + j] * y[j];
                Hy[i] = acc;
            }
            const double yHy = dot(y, Hy);
            const double rho = 1.0 / sy;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    H[i * n + j] += rho * ((1.0 + rho * yHy) * s[i] * s[j] - Hy[i] * s[j] - s[i] * Hy[j]);
        }
        r.x = x_new;
        g = g_new;
        const double prev = r.value;
        r.value = f_new;
        if (prev - f_new == 0.0 && inf_norm(s) == 0.0) break;
    }
    r.grad_norm = inf_norm(g);
    r.converged = r.grad_norm < opts.grad_tol;
    return r;
}

ScalarMinimum golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(lo <= hi)) throw std::invalid_argument("golden_section: empty bracket");
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    ScalarMinimum best{lo, f(lo), 0};
    const double f_hi = f(hi);
    if (f_hi < best.value) best = {hi, f_hi, 0};
    if (hi - lo <= tol) return best;

    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    int it = 0;
    while (b - a > tol && it < 400) {
        ++it;
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const ScalarMinimum interior = fc <= fd ? ScalarMinimum{c, fc, it} : ScalarMinimum{d, fd, it};
    if (interior.value <= best.value) return interior;
    best.iterations = it;
    return best;
}

RootResult solve_increasing(const std::function<double(double)>& f, const std::function<double(double)>& df,
                            double target, double lo, double hi, double tol, int max_iterations) {
    double flo = f(lo) - target;
    double fhi = f(hi) - target;
    if (flo > 0.0 || fhi < 0.0) throw std::domain_error("solve_increasing: root not bracketed");
    RootResult r;
    if (flo == 0.0) return {lo, 0.0, 0, true};
    if (fhi == 0.0) return {hi, 0.0, 0, true};
    double x = 0.5 * (lo + hi);
    for (r.iterations = 1; r.iterations <= max_iterations; ++r.iterations) {
        const double fx = f(x) - target;
        r.x = x;
        r.residual = std::abs(fx);
        if (r.residual < tol) {
            r.converged = true;
            return r;
        }
        if (fx < 0.0)
            lo = x;
        else
            hi = x;
        const double slope = df(x);
        double next = slope > 0.0 ? x - fx / slope : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x || hi - lo <= 0.0) break;
        x = next;
    }
    r.converged = r.residual < tol;
    return r;
}

std::vector<double> project_simplex(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n == 0) throw std::invalid_argument("project_simplex: empty vector");
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cumulative += u[i];
        const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) theta = t;
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::max(0.0, v[i] - theta);
    return out;
}

std::vector<double> softmax(std::span<const double> theta, double scale) {
    const double m = *std::max_element(theta.begin(), theta.end());
    std::vector<double> out(theta.size());
    double total = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) total += out[i] = std::exp(theta[i] - m);
    for (double& x : out) x *= scale / total;
    return out;
}

}  // namespace cgrg
