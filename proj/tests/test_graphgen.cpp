#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cgrg/graphgen.hpp"
#include "cgrg/measures.hpp"

using namespace cgrg;

namespace {

ModelParameters three_colours(Geometry g = Geometry::torus, EdgeModel e = EdgeModel::geometric) {
    return ModelParameters(2, {0.2, 0.5, 0.3}, SquareMatrix(3, {1.0, 0.5, 2.0, 0.5, 1.5, 0.2, 2.0, 0.2, 3.0}), g, e);
}

// log P(sample) - log P~(sample) summed over every vertex and every pair.
double brute_log_ratio(const GraphSample& s, const ModelParameters& params, const TiltingPotentials& pots) {
    const auto law = pots.tilted_colour_law();
    const auto p = params.connection_probabilities(s.n);
    const auto pt = pots.tilted_connection_probabilities(s.n);
    std::vector<std::vector<bool>> adj(s.n, std::vector<bool>(s.n, false));
    for (auto [i, j] : s.edges) adj[i][j] = true;
    double lr = 0.0;
    for (std::size_t v = 0; v < s.n; ++v) lr += std::log(params.nu(s.colours[v]) / law[s.colours[v]]);
    for (std::size_t i = 0; i < s.n; ++i)
        for (std::size_t j = i + 1; j < s.n; ++j) {
            const auto a = s.colours[i], b = s.colours[j];
            lr += adj[i][j] ? std::log(p(a, b) / pt(a, b)) : std::log((1 - p(a, b)) / (1 - pt(a, b)));
        }
    return lr;
}

}  // namespace

TEST_CASE("pair distance cdf on the torus matches simulation") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int d : {1, 2, 3}) {
        const double t = 0.2;
        const int trials = 400000;
        int inside = 0;
        for (int i = 0; i < trials; ++i) {
            double s2 = 0.0;
            for (int j = 0; j < d; ++j) {
                double z = std::abs(u(gen) - u(gen));
                z = std::min(z, 1.0 - z);
                s2 += z * z;
            }
            inside += s2 <= t * t;
        }
        const double p = pair_distance_cdf(t, d, Geometry::torus);
        const double se = std::sqrt(p * (1 - p) / trials);
        CHECK(std::abs(static_cast<double>(inside) / trials - p) < 4 * se);
    }
    CHECK(pair_distance_cdf(0.1, 2, Geometry::torus) == doctest::Approx(M_PI * 0.01).epsilon(1e-14));
    CHECK_THROWS(pair_distance_cdf(0.6, 2, Geometry::torus));
}

TEST_CASE("cell grid finds the same edges as brute force") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        const int d = 1 + rep % 3;
        const std::size_t k = rep % 2 ? 3 : 1;
        const std::size_t n = 20 + 10 * rep;
        const Geometry g = rep % 4 < 2 ? Geometry::torus : Geometry::cube;
        std::vector<double> pts(n * d);
        for (auto& x : pts) x = u(gen);
        std::vector<std::uint32_t> col(n);
        for (auto& c : col) c = static_cast<std::uint32_t>(gen() % k);
        SquareMatrix radii(k, 0.0);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a; b < k; ++b) radii(a, b) = radii(b, a) = 0.02 + 0.3 * u(gen);
        CHECK(find_edges_grid(pts, col, radii, d, g) == find_edges_brute(pts, col, radii, d, g));
    }
}

TEST_CASE("wrap-around edges exist only on the torus") {
    const std::vector<double> pts{0.01, 0.5, 0.99, 0.5};
    const std::vector<std::uint32_t> col{0, 0};
    const SquareMatrix r(1, 0.05);
    CHECK(find_edges_grid(pts, col, r, 2, Geometry::torus).size() == 1);
    CHECK(find_edges_grid(pts, col, r, 2, Geometry::cube).empty());
}

TEST_CASE("samples are deterministic and satisfy their invariants") {
    for (auto g : {Geometry::torus, Geometry::cube})
        for (auto e : {EdgeModel::geometric, EdgeModel::independent}) {
            const auto params = three_colours(g, e);
            const auto a = sample_cgrg(400, params, 99);
            const auto b = sample_cgrg(400, params, 99);
            const auto c = sample_cgrg(400, params, 100);
            CHECK(a == b);
            CHECK(a.edges != c.edges);
            CHECK_NOTHROW(validate_structure(a));
            CHECK_NOTHROW(validate_geometry(a));
            CHECK(a.points.empty() == (e == EdgeModel::independent));
        }
}

TEST_CASE("tiny n is rejected with a clear message") {
    const auto params = ModelParameters::uncoloured(2, 1.0);
    CHECK_THROWS_WITH_AS(sample_cgrg(2, params, 1), doctest::Contains("larger n"), std::domain_error);
}

TEST_CASE("expected edge count on the torus is exact") {
    // E|E| = C(n,2) rho c / n for the geometric model; the same for independent edges.
    for (auto e : {EdgeModel::geometric, EdgeModel::independent}) {
        const auto params = ModelParameters::uncoloured(2, 1.0, Geometry::torus, e);
        const std::size_t n = 300, reps = 400;
        double s = 0.0, s2 = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            const double m = static_cast<double>(sample_cgrg(n, params, 1000 + r).edges.size());
            s += m;
            s2 += m * m;
        }
        const double mean = s / reps;
        const double se = std::sqrt((s2 / reps - mean * mean) / (reps - 1));
        const double expected = (n - 1) / 2.0 * M_PI;
        CHECK(std::abs(mean - expected) < 4 * se);
    }
}

TEST_CASE("identity tilt reproduces the null sampler bit for bit") {
    const auto params = three_colours();
    const auto id = TiltingPotentials::identity(params);
    CHECK(id.is_identity());
    const auto t = sample_tilted(500, params, id, 3);
    CHECK(t.sample == sample_cgrg(500, params, 3));
    CHECK(t.log_weight == 0.0);
}

TEST_CASE("tilting potentials") {
    const auto params = three_colours();
    const TiltingPotentials pots({0.3, -0.2, 0.1}, SquareMatrix(3, {0.2, 0.1, 0.0, 0.1, -0.3, 0.4, 0.0, 0.4, 0.1}), params);
    const auto law = pots.tilted_colour_law();
    CHECK(law[0] + law[1] + law[2] == doctest::Approx(1.0).epsilon(1e-15));
    const auto h = pots.h(100000000);
    const auto beta = pots.beta();
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) CHECK(h(a, b) == doctest::Approx(beta(a, b)).epsilon(1e-6));
    CHECK_THROWS(TiltingPotentials({0.0}, SquareMatrix(3, 0.0), params));
}

TEST_CASE("likelihood ratio matches a pair-by-pair evaluation") {
    const auto params = three_colours(Geometry::torus, EdgeModel::independent);
    const TiltingPotentials pots({0.3, -0.2, 0.1}, SquareMatrix(3, {0.2, 0.1, 0.0, 0.1, -0.3, 0.4, 0.0, 0.4, 0.1}), params);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto t = sample_tilted(120, params, pots, seed);
        const double oracle = brute_log_ratio(t.sample, params, pots);
        CHECK(t.log_weight == doctest::Approx(oracle).epsilon(1e-10));
        CHECK(log_likelihood_ratio(t.sample, params, pots) == doctest::Approx(oracle).epsilon(1e-10));
    }
}

TEST_CASE("planted isolated vertices") {
    const auto params = ModelParameters::uncoloured(2, 1.0, Geometry::torus, EdgeModel::independent);
    const auto s = sample_planted_isolated(300, params, 120, 4);
    const auto m = empirical_measures(s);
    CHECK(m.counts.degree_counts[0] >= 120);
    CHECK_THROWS(sample_planted_isolated(300, ModelParameters::uncoloured(2, 1.0), 10, 1));
    CHECK_THROWS(sample_planted_isolated(300, params, 301, 1));
}
