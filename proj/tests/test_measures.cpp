#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "cgrg/graphgen.hpp"
#include "cgrg/measures.hpp"
#include "cgrg/numeric.hpp"

using namespace cgrg;

namespace {

// Poisson pmf by the product recursion, independent of lgamma.
double poisson_by_recursion(double lambda, unsigned m) {
    double p = std::exp(-lambda);
    for (unsigned j = 1; j <= m; ++j) p *= lambda / j;
    return p;
}

double naive_kl(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0) s += p[i] * std::log(p[i] / q[i]);
    return s;
}

GraphSample hand_sample(std::size_t n, std::size_t k, std::vector<std::uint32_t> colours, std::vector<Edge> edges) {
    GraphSample s;
    s.n = n;
    s.d = 1;
    s.k = k;
    s.edge_model = EdgeModel::independent;
    s.colours = std::move(colours);
    s.edges = std::move(edges);
    s.radii = SquareMatrix(k, 0.0);
    return s;
}

}  // namespace

TEST_CASE("ball volume closed forms") {
    CHECK(ball_volume(1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ball_volume(2) == doctest::Approx(M_PI).epsilon(1e-14));
    CHECK(ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-14));
    CHECK(ball_volume(4) == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(ball_volume(0), std::invalid_argument);
}

TEST_CASE("relative entropy agrees with a direct sum") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.01, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> p(5), q(5);
        for (int i = 0; i < 5; ++i) {
            p[i] = (i == rep % 5) ? 0.0 : u(gen);
            q[i] = u(gen);
        }
        CHECK(relative_entropy(ColourMeasure(p), ColourMeasure(q)) == doctest::Approx(naive_kl(p, q)).epsilon(1e-13));
    }
    CHECK(relative_entropy(ColourMeasure({0.5, 0.5}), ColourMeasure({1.0, 0.0})) == kInf);
    CHECK(relative_entropy(ColourMeasure({0.0, 1.0}), ColourMeasure({0.0, 1.0})) == 0.0);
    CHECK_THROWS_AS(relative_entropy(ColourMeasure({1.0}), ColourMeasure({0.5, 0.5})), std::invalid_argument);
}

TEST_CASE("degree distributions") {
    const auto q = DegreeDistribution::poisson(M_PI);
    CHECK(q.total_mass() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(q.mean() == doctest::Approx(M_PI).epsilon(1e-10));
    for (unsigned m = 0; m < 10; ++m) CHECK(q[m] == doctest::Approx(poisson_by_recursion(M_PI, m)).epsilon(1e-11));
    CHECK(q[100000] == 0.0);
    CHECK(DegreeDistribution::point_mass(3)[3] == 1.0);
    CHECK(total_variation(q, q) == 0.0);
    CHECK(total_variation(DegreeDistribution::point_mass(0), DegreeDistribution::point_mass(2)) == 1.0);
    CHECK_THROWS(DegreeDistribution({0.5, -0.1}));
}

TEST_CASE("profiles") {
    const Profile p({{2, 1}, {0, 3}, {1, 0}});
    CHECK(p.count(0) == 3);
    CHECK(p.count(1) == 0);
    CHECK(p.total() == 4);
    const auto tokens = p.tokens();
    REQUIRE(tokens.size() == 2);
    CHECK(tokens[0] == "(0:3)");
    CHECK(Profile::from_tokens(tokens) == p);
    CHECK_THROWS(Profile({{1, 1}, {1, 2}}));
    const std::vector<std::string> bad{"(0;3)"};
    CHECK_THROWS(Profile::from_tokens(bad));
}

TEST_CASE("empirical measures of a coloured path") {
    // 0 -- 1 -- 2, colours (0, 1, 0), plus an isolated vertex 3 of colour 1
    const auto s = hand_sample(4, 2, {0, 1, 0, 1}, {{0, 1}, {1, 2}});
    const auto m = empirical_measures(s);
    CHECK(m.colour[0] == 0.5);
    CHECK(m.colour[1] == 0.5);
    CHECK(m.pair(0, 0) == 0.0);
    CHECK(m.pair(0, 1) == 0.5);
    CHECK(m.pair(1, 0) == 0.5);
    CHECK(m.pair(1, 1) == 0.0);
    CHECK(m.pair.total_mass() == doctest::Approx(2.0 * 2 / 4));
    CHECK(m.neighbourhood.weight({0, Profile({{1, 1}})}) == 0.5);
    CHECK(m.neighbourhood.weight({1, Profile({{0, 2}})}) == 0.25);
    CHECK(m.neighbourhood.weight({1, Profile()}) == 0.25);
    CHECK(m.degree[0] == 0.25);
    CHECK(m.degree[1] == 0.5);
    CHECK(m.degree[2] == 0.25);
    CHECK(check_consistency(m.pair, m.neighbourhood) == Consistency::consistent);
}

TEST_CASE("monochromatic edges count twice on the diagonal") {
    const auto s = hand_sample(3, 1, {0, 0, 0}, {{0, 1}, {0, 2}, {1, 2}});
    const auto m = empirical_measures(s);
    CHECK(m.counts.pair_count(0, 0) == 6);
    CHECK(m.pair(0, 0) == 2.0);
    CHECK(m.degree[2] == 1.0);
}

TEST_CASE("H2 of the neighbourhood counts equals the pair counts on sampled graphs") {
    const ModelParameters params(2, {0.2, 0.5, 0.3}, SquareMatrix(3, {1.0, 0.5, 2.0, 0.5, 1.5, 0.2, 2.0, 0.2, 3.0}));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto s = sample_cgrg(500, params, seed);
        const auto m = empirical_measures(s);
        CHECK(m.counts.profile_pair_counts() == m.counts.pair_counts);
        CHECK(check_consistency(m.pair, m.neighbourhood, 1e-12) == Consistency::consistent);
    }
}

TEST_CASE("consistency classes") {
    const NeighbourhoodMeasure mu(1, {{{0, Profile({{0, 2}})}, 1.0}});
    CHECK(check_consistency(PairMeasure(SquareMatrix(1, 2.0)), mu) == Consistency::consistent);
    CHECK(check_consistency(PairMeasure(SquareMatrix(1, 3.0)), mu) == Consistency::sub_consistent);
    CHECK(check_consistency(PairMeasure(SquareMatrix(1, 1.0)), mu) == Consistency::inconsistent);
}

TEST_CASE("Q weights are products of Poisson factors") {
    const PairMeasure varpi(SquareMatrix(2, {0.6, 0.3, 0.3, 1.2}));
    const ColourMeasure mu1({0.4, 0.6});
    const NeighbourhoodKey key{1, Profile({{0, 2}, {1, 1}})};
    const double expected = 0.6 * poisson_by_recursion(0.3 / 0.6, 2) * poisson_by_recursion(1.2 / 0.6, 1);
    CHECK(std::exp(log_q_weight(varpi, mu1, key)) == doctest::Approx(expected).epsilon(1e-13));

    const auto q = q_measure(varpi, mu1, 6);
    CHECK(q.weight(key) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(q.total_mass() + q.truncated_mass() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("H2 of Q recovers varpi under adaptive truncation") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t k = 1 + rep % 3;
        std::vector<double> mu1(k), w(k * k);
        for (auto& x : mu1) x = u(gen);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a; b < k; ++b) w[a * k + b] = w[b * k + a] = 3.0 * u(gen);
        const PairMeasure varpi(SquareMatrix(k, w));
        const auto q = q_measure_adaptive(varpi, ColourMeasure(mu1), 1e-12);
        const auto marg = profile_marginals(q);
        for (std::size_t a = 0; a < k; ++a) {
            CHECK(marg.mu1[a] == doctest::Approx(mu1[a]).epsilon(1e-9));
            for (std::size_t b = 0; b < k; ++b) CHECK(std::abs(marg.h2(a, b) - varpi(a, b)) < 1e-9);
        }
    }
}

TEST_CASE("h functional") {
    const ModelParameters params = ModelParameters::uncoloured(2, 1.0);
    const ColourMeasure omega({1.0});
    // zero at varpi = rho C omega x omega
    CHECK(h_functional(PairMeasure(SquareMatrix(1, M_PI)), omega, params) == doctest::Approx(0.0).epsilon(1e-14));
    // scalar form x log(x/pi) + pi - x
    const double x = 2.0;
    CHECK(h_functional(PairMeasure(SquareMatrix(1, x)), omega, params) ==
          doctest::Approx(x * std::log(x / M_PI) + M_PI - x).epsilon(1e-14));
    CHECK(h_functional(PairMeasure(SquareMatrix(1, 0.0)), omega, params) == doctest::Approx(M_PI));
    CHECK_THROWS_AS(h_functional(PairMeasure(SquareMatrix(2, {0.0, 1.0, 0.5, 0.0})), ColourMeasure({0.5, 0.5}),
                                 ModelParameters(2, {0.5, 0.5}, SquareMatrix(2, 1.0))),
                    std::invalid_argument);
}

TEST_CASE("neighbourhood total variation") {
    const NeighbourhoodMeasure p(1, {{{0, Profile()}, 0.5}, {{0, Profile({{0, 1}})}, 0.5}});
    const NeighbourhoodMeasure q(1, {{{0, Profile()}, 0.25}, {{0, Profile({{0, 2}})}, 0.75}});
    CHECK(total_variation(p, q) == doctest::Approx(0.75));
    CHECK(total_variation(p, p) == 0.0);
}
