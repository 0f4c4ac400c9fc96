#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cgrg/graphgen.hpp"
#include "cgrg/numeric.hpp"
#include "cgrg/optimize.hpp"
#include "cgrg/rates.hpp"

using namespace cgrg;

namespace {

// eta1 written out term by term from the definition, with its own Poisson pmf.
double eta1_oracle(const std::vector<double>& delta, double rc) {
    double mean = 0.0;
    for (std::size_t m = 0; m < delta.size(); ++m) mean += m * delta[m];
    double h = 0.0, log_q = -mean;  // log q_mean(0)
    for (std::size_t m = 0; m < delta.size(); ++m) {
        if (m > 0) log_q += std::log(mean) - std::log(static_cast<double>(m));
        if (delta[m] > 0) h += delta[m] * (std::log(delta[m]) - log_q);
    }
    return 0.5 * mean * std::log(mean / rc) - 0.5 * mean + 0.5 * rc + h;
}

// Best eta1 over the one-parameter family y at 0, (1-y) x zero-truncated Poisson(b).
double xi1_family_oracle(double y, double rc) {
    auto value = [&](double b) {
        std::vector<double> delta(80, 0.0);
        delta[0] = y;
        double log_p = -b;
        for (std::size_t k = 1; k < delta.size(); ++k) {
            log_p += std::log(b) - std::log(static_cast<double>(k));
            delta[k] = (1 - y) * std::exp(log_p) / -std::expm1(-b);
        }
        return eta1_oracle(delta, rc);
    };
    double lo = 1e-3, hi = 20.0;
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int i = 0; i < 200; ++i) {
        const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
        if (value(a) < value(b))
            hi = b;
        else
            lo = a;
    }
    return value(0.5 * (lo + hi));
}

ModelParameters two_colours() {
    return ModelParameters(2, {0.3, 0.7}, SquareMatrix(2, {1.0, 0.5, 0.5, 2.0}));
}

}  // namespace

TEST_CASE("poisson pmf") {
    CHECK(poisson_pmf(0.0, 0) == 1.0);
    CHECK(poisson_pmf(1.0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    double s = 0.0;
    for (unsigned m = 0; m <= 50; ++m) s += poisson_pmf(M_PI, m);
    CHECK(std::abs(s - 1.0) < 1e-12);
}

TEST_CASE("degree rate") {
    for (int d : {1, 2, 3})
        for (double c : {0.5, 1.0, 2.0}) {
            const double rc = ball_volume(d) * c;
            CHECK(std::abs(rate_eta1(DegreeDistribution::poisson(rc), c, d).value) < 1e-9);
            CHECK(rate_eta1(DegreeDistribution::point_mass(0), c, d).value == doctest::Approx(rc / 2).epsilon(1e-14));
        }
    // Poisson(2 pi) at d=2, c=1: pi log 2 - pi/2
    CHECK(rate_eta1(DegreeDistribution::poisson(2 * M_PI), 1.0, 2).value ==
          doctest::Approx(M_PI * std::log(2.0) - M_PI / 2).epsilon(1e-9));

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> w(12);
        double s = 0.0;
        for (auto& x : w) s += (x = u(gen));
        for (auto& x : w) x /= s;
        const auto r = rate_eta1(DegreeDistribution(w), 1.3, 2);
        CHECK(r.value == doctest::Approx(eta1_oracle(w, ball_volume(2) * 1.3)).epsilon(1e-11));
        CHECK(r.value >= 0.0);
    }
}

TEST_CASE("inner degree function is nondecreasing beyond max(<delta>, rho c) but not below") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> w(8);
        double s = 0.0;
        for (auto& x : w) s += (x = u(gen));
        for (auto& x : w) x /= s;
        const DegreeDistribution delta(w);
        const double start = std::max(delta.mean(), M_PI);
        double prev = eta_inner(delta, start, 1.0, 2);
        for (double x = start + 0.1; x < start + 10; x += 0.1) {
            const double v = eta_inner(delta, x, 1.0, 2);
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
    }
    // <delta> = 1 < rho c = pi: moving x from 1 to 2 lowers the value
    const auto point = DegreeDistribution::point_mass(1);
    CHECK(eta_inner(point, 2.0, 1.0, 2) < eta_inner(point, 1.0, 1.0, 2));
    CHECK(eta_inner(point, 1.0, 1.0, 2) == doctest::Approx(rate_eta1(point, 1.0, 2).value).epsilon(1e-13));
}

TEST_CASE("isolated fraction rate") {
    for (int d : {1, 2, 3})
        for (double c : {0.5, 1.0, 2.0}) {
            const double rc = ball_volume(d) * c;
            const auto typical = rate_xi1(std::exp(-rc), c, d);
            CHECK(std::abs(typical.value) < 1e-9);
            CHECK(*typical.diagnostics.root == doctest::Approx(rc).epsilon(1e-10));
            CHECK(rate_xi1(1.0, c, d).value == doctest::Approx(rc / 2).epsilon(1e-14));
        }
    for (double y : {0.0, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.999}) {
        const auto r = rate_xi1(y, 1.0, 2);
        CHECK(r.diagnostics.converged);
        CHECK(r.diagnostics.residual < 1e-12);
        CHECK(r.value >= 0.0);
        if (y > 0.0) CHECK(r.value == doctest::Approx(xi1_family_oracle(y, M_PI)).epsilon(1e-7));
    }
    CHECK(rate_xi1(0.999999, 1.0, 2).value == doctest::Approx(M_PI / 2).epsilon(1e-4));
    CHECK_THROWS_AS(rate_xi1(1.5, 1.0, 2), std::invalid_argument);
}

TEST_CASE("isolated root") {
    for (double t : {1e-8, 0.3, 1.0, M_PI, 50.0}) {
        const auto r = isolated_root(t);
        CHECK(std::abs(r.a * -std::expm1(-r.a) - t) < 1e-12 * std::max(1.0, t));
    }
    CHECK(isolated_root(0.0).a == 0.0);
}

TEST_CASE("contraction of the degree rate onto the isolated fraction") {
    for (double y : {0.1, 0.3, 0.5, 0.7}) {
        const auto num = contract_eta1(y, 1.0, 2);
        const auto closed = contraction_minimiser(y, 1.0, 2);
        CHECK(num.converged);
        CHECK(num.value == doctest::Approx(rate_xi1(y, 1.0, 2).value).epsilon(1e-6));
        for (std::size_t k = 0; k <= 60; ++k) CHECK(std::abs(num.minimiser[k] - closed[k]) < 1e-4);
        CHECK(closed[0] == doctest::Approx(y));
    }
}

TEST_CASE("colour-pair rate") {
    const auto params = two_colours();
    const auto t = typical_measures(params);
    CHECK(std::abs(rate_I(t.omega, t.varpi, params).value) < 1e-12);

    const auto mono = ModelParameters::uncoloured(2, 1.0);
    CHECK(rate_I(ColourMeasure({1.0}), PairMeasure(SquareMatrix(1, 2 * M_PI)), mono).value ==
          doctest::Approx(M_PI * std::log(2.0) - M_PI / 2).epsilon(1e-12));
    // monochrome reduction: degree rate at Poisson(lambda) equals I at varpi = lambda
    for (double lambda : {0.5, 1.0, 2.0, 5.0, 9.0})
        CHECK(rate_I(ColourMeasure({1.0}), PairMeasure(SquareMatrix(1, lambda)), mono).value ==
              doctest::Approx(rate_eta1(DegreeDistribution::poisson(lambda, 1e-15), 1.0, 2).value).epsilon(1e-9));

    const ModelParameters partial(2, {1.0, 0.0}, SquareMatrix(2, 1.0));
    CHECK_FALSE(rate_I(ColourMeasure({0.5, 0.5}), PairMeasure(SquareMatrix(2, 0.5)), partial).finite());
}

TEST_CASE("neighbourhood rate") {
    for (const auto& params : {two_colours(), ModelParameters::uncoloured(1, 0.5), ModelParameters::uncoloured(3, 2.0)}) {
        const auto t = typical_measures(params);
        CHECK(std::abs(rate_J(t.varpi, t.mu, params).value) < 1e-9);
    }

    // k=1, Poisson(2) profiles with varpi = 2: log(2/pi) - 1 + pi/2
    const auto mono = ModelParameters::uncoloured(2, 1.0);
    const PairMeasure varpi(SquareMatrix(1, 2.0));
    const auto mu = q_measure_adaptive(varpi, ColourMeasure({1.0}), 1e-14);
    const NeighbourhoodMeasure mu_exact(1, {mu.entries().begin(), mu.entries().end()});
    CHECK(rate_J(varpi, mu_exact, mono, 1e-12).value ==
          doctest::Approx(std::log(2.0 / M_PI) - 1 + M_PI / 2).epsilon(1e-9));

    // inconsistent pair
    const auto r = rate_J(PairMeasure(SquareMatrix(1, 3.0)), mu_exact, mono);
    CHECK_FALSE(r.finite());
    CHECK_FALSE(r.diagnostics.reason.empty());

    // the empirical pair of a sample is consistent, so its rate is finite and positive
    const auto s = sample_cgrg(2000, two_colours(), 5);
    const auto m = empirical_measures(s);
    const auto rj = rate_J(m.pair, m.neighbourhood, two_colours());
    CHECK(rj.finite());
    CHECK(rj.value > 0.0);
}

TEST_CASE("edges-per-vertex rate") {
    const auto mono = ModelParameters::uncoloured(2, 1.0);
    CHECK(std::abs(rate_zeta(M_PI / 2, mono).value) < 1e-9);
    for (double x : {0.5, M_PI, 4.0}) {
        const double closed = x * std::log(2 * x / M_PI) - x + M_PI / 2;
        CHECK(rate_zeta(x, mono).value == doctest::Approx(closed).epsilon(1e-9));
    }
    CHECK(rate_zeta(0.0, mono).value == doctest::Approx(M_PI / 2).epsilon(1e-12));

    const ModelParameters diag(2, {0.5, 0.5}, SquareMatrix(2, {1.0, 0.0, 0.0, 1.0}));
    CHECK(std::abs(rate_zeta(M_PI / 4, diag).value) < 1e-6);

    const auto params = two_colours();
    const auto var = rate_zeta(2.5, params);
    const auto direct = rate_zeta_direct(2.5, params);
    CHECK(var.finite());
    CHECK(var.value > 0.0);
    CHECK(var.value == doctest::Approx(direct.value).epsilon(1e-6));
}

TEST_CASE("constrained quadratic range") {
    const ModelParameters diag(2, {0.5, 0.5}, SquareMatrix(2, {1.0, 0.0, 0.0, 1.0}));
    const auto r = quadratic_range(diag);
    // (pi/2)(w^2 + (1-w)^2) ranges over [pi/4, pi/2]
    CHECK(r.min == doctest::Approx(M_PI / 4).epsilon(1e-9));
    CHECK(r.max == doctest::Approx(M_PI / 2).epsilon(1e-9));
    CHECK_FALSE(psi(0.1, diag).finite());
    CHECK(psi(M_PI / 2, diag).value == doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("optimisers") {
    const Objective rosen = [](std::span<const double> x, std::span<double> g) {
        const double a = 1 - x[0], b = x[1] - x[0] * x[0];
        g[0] = -2 * a - 400 * x[0] * b;
        g[1] = 200 * b;
        return a * a + 100 * b * b;
    };
    const auto m = minimize_bfgs(rosen, {-1.2, 1.0});
    CHECK(m.converged);
    CHECK(m.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(golden_section([](double x) { return (x - 0.3) * (x - 0.3); }, 0, 1).x == doctest::Approx(0.3).epsilon(1e-8));
    const auto p = project_simplex(std::vector<double>{0.8, 0.6, -0.2});
    CHECK(p[0] == doctest::Approx(0.6));
    CHECK(p[1] == doctest::Approx(0.4));
    CHECK(p[2] == 0.0);
}

TEST_CASE("rate results") {
    const auto inf = RateResult::infinite("test", "why");
    CHECK_FALSE(inf.finite());
    CHECK(inf.value == kInf);
}
