#include "cgrg/graphgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include "cgrg/rng.hpp"

namespace cgrg {

double pair_distance_cdf(double t, int d, Geometry geometry) {
    if (!(t >= 0.0)) throw std::invalid_argument("pair_distance_cdf: t must be >= 0");
    if (geometry == Geometry::torus && t > 0.5)
        throw std::domain_error("pair_distance_cdf: t=" + std::to_string(t) +
                                " > 1/2 on the torus, where rho(d) t^d is no longer exact");
    return ball_volume(d) * std::pow(t, d);
}

// ---------------------------------------------------------------------------
// Edge detection
// ---------------------------------------------------------------------------

namespace {

bool within(std::span<const double> x, std::span<const double> y, double r, Geometry geometry) {
    return r > 0.0 && squared_distance(x, y, geometry) <= r * r;
}

}  // namespace

std::vector<Edge> find_edges_brute(std::span<const double> points, std::span<const std::uint32_t> colours,
                                   const SquareMatrix& radii, int d, Geometry geometry) {
    const std::size_t n = colours.size();
    const auto du = static_cast<std::size_t>(d);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (within(points.subspan(i * du, du), points.subspan(j * du, du), radii(colours[i], colours[j]),
                       geometry))
                edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    return edges;
}

std::vector<Edge> find_edges_grid(std::span<const double> points, std::span<const std::uint32_t> colours,
                                  const SquareMatrix& radii, int d, Geometry geometry) {
    const std::size_t n = colours.size();
    const auto du = static_cast<std::size_t>(d);
    const double rmax = radii.max();
    if (n < 2 || !(rmax > 0.0)) return {};

    // Cells per axis: side 1/m must be >= rmax (with slack for rounding in
    // x*m), and the grid is capped at about 2n cells in total.
    const double by_radius = std::floor(1.0 / (rmax * (1.0 + 1e-9)));
    const double by_count = std::floor(std::pow(2.0 * static_cast<double>(n), 1.0 / d));
    const auto m = static_cast<std::int64_t>(std::max(1.0, std::min(by_radius, std::max(1.0, by_count))));

    std::size_t cells = 1;
    for (int i = 0; i < d; ++i) cells *= static_cast<std::size_t>(m);

    std::vector<std::int64_t> coord(n * du);
    std::vector<std::size_t> cell_of(n);
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t idx = 0;
        for (std::size_t a = du; a-- > 0;) {
            auto c = static_cast<std::int64_t>(points[v * du + a] * static_cast<double>(m));
            c = std::clamp<std::int64_t>(c, 0, m - 1);
            coord[v * du + a] = c;
            idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(c);
        }
        cell_of[v] = idx;
    }
    // counting sort of vertices by cell
    std::vector<std::size_t> start(cells + 1, 0);
    for (auto c : cell_of) ++start[c + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());
    std::vector<std::uint32_t> members(n);
    {
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (std::size_t v = 0; v < n; ++v) members[fill[cell_of[v]]++] = static_cast<std::uint32_t>(v);
    }

    // neighbour offsets in {-1,0,1}^d
    std::vector<std::int64_t> deltas;
    {
        std::size_t offsets = 1;
        for (int i = 0; i < d; ++i) offsets *= 3;
        deltas.reserve(offsets * du);
        for (std::size_t o = 0; o < offsets; ++o) {
            std::size_t rem = o;
            for (std::size_t a = 0; a < du; ++a) {
                deltas.push_back(static_cast<std::int64_t>(rem % 3) - 1);
                rem /= 3;
            }
        }
    }

    std::vector<Edge> edges;
    std::vector<std::size_t> neighbours;
    for (std::size_t v = 0; v < n; ++v) {
        neighbours.clear();
        for (std::size_t o = 0; o < deltas.size(); o += du) {
            std::size_t idx = 0;
            bool inside = true;
            for (std::size_t a = du; a-- > 0;) {
                std::int64_t c = coord[v * du + a] + deltas[o + a];
                if (geometry == Geometry::torus) {
                    c = ((c % m) + m) % m;
                } else if (c < 0 || c >= m) {
                    inside = false;
                    break;
                }
                idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(c);
            }
            if (inside) neighbours.push_back(idx);
        }
        std::sort(neighbours.begin(), neighbours.end());
        neighbours.erase(std::unique(neighbours.begin(), neighbours.end()), neighbours.end());

        const auto pv = points.subspan(v * du, du);
        for (auto cell : neighbours)
            for (std::size_t s = start[cell]; s < start[cell + 1]; ++s) {
                const std::uint32_t w = members[s];
                if (w <= v) continue;
                if (within(pv, points.subspan(w * du, du), radii(colours[v], colours[w]), geometry))
                    edges.emplace_back(static_cast<std::uint32_t>(v), w);
            }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

namespace {

void check_radii(const SquareMatrix& radii, Geometry geometry, std::size_t n) {
    if (n < 2) return;  // no pairs, so the radius never enters
    const double rmax = radii.max();
    const double limit = geometry == Geometry::torus ? 0.5 : 1.0;
    if (rmax > limit)
        throw std::domain_error("connection radius " + std::to_string(rmax) + " exceeds " +
                                std::to_string(limit) + " at n=" + std::to_string(n) + " (" +
                                std::string(to_string(geometry)) +
                                "); the near-intermediate regime needs a larger n");
}

void check_probabilities(const SquareMatrix& p, std::size_t n) {
    if (n >= 2 && p.max() > 1.0)
        throw std::domain_error("connection probability " + std::to_string(p.max()) + " exceeds 1 at n=" +
                                std::to_string(n) + "; use a larger n");
}

std::vector<double> uniform_points(std::size_t n, int d, Rng& rng) {
    std::vector<double> pts(n * static_cast<std::size_t>(d));
    for (double& x : pts) x = rng.uniform();
    return pts;
}

std::vector<std::uint32_t> draw_colours(std::size_t n, std::span<const double> weights, Rng& rng) {
    const auto cdf = normalised_cdf(weights);
    std::vector<std::uint32_t> colours(n);
    for (auto& c : colours) c = static_cast<std::uint32_t>(rng.categorical(cdf));
    return colours;
}

/// Number of failures before the next success of Bernoulli(p), 0 < p < 1.
std::uint64_t geometric_skip(double p, Rng& rng) {
    const double s = std::floor(std::log(rng.uniform_open_left()) / std::log1p(-p));
    return s >= 1e18 ? std::uint64_t{1} << 62 : static_cast<std::uint64_t>(s);
}

/// Independent edges among the vertices with active[v] = true, pair (u,v)
/// joined with probability p(c_u, c_v). Skip sampling per colour block.
std::vector<Edge> independent_edges(std::span<const std::uint32_t> colours, const std::vector<bool>& active,
                                    const SquareMatrix& p, Rng& rng) {
    const std::size_t k = p.size();
    std::vector<std::vector<std::uint32_t>> blocks(k);
    for (std::size_t v = 0; v < colours.size(); ++v)
        if (active[v]) blocks[colours[v]].push_back(static_cast<std::uint32_t>(v));

    std::vector<Edge> edges;
    auto add = [&edges](std::uint32_t u, std::uint32_t v) { edges.emplace_back(std::min(u, v), std::max(u, v)); };
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a; b < k; ++b) {
            const double prob = p(a, b);
            const auto& A = blocks[a];
            const auto& B = blocks[b];
            if (!(prob > 0.0)) continue;
            const std::uint64_t total = a == b ? A.size() * (A.size() - (A.empty() ? 0 : 1)) / 2
                                               : std::uint64_t{A.size()} * B.size();
            if (total == 0) continue;
            // pair index -> (i, j): rows of the strict lower triangle for a == b
            auto emit = [&](std::uint64_t idx) {
                if (a != b) {
                    add(A[idx / B.size()], B[idx % B.size()]);
                } else {
                    auto row = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(idx))) / 2.0);
                    while (row * (row - 1) / 2 > idx) --row;
                    while ((row + 1) * row / 2 <= idx) ++row;
                    add(A[row], A[idx - row * (row - 1) / 2]);
                }
            };
            if (prob >= 1.0) {
                for (std::uint64_t idx = 0; idx < total; ++idx) emit(idx);
                continue;
            }
            std::uint64_t idx = geometric_skip(prob, rng);
            while (idx < total) {
                emit(idx);
                const std::uint64_t skip = geometric_skip(prob, rng);
                if (skip >= total) break;
                idx += skip + 1;
            }
        }
    std::sort(edges.begin(), edges.end());
    return edges;
}

GraphSample assemble(std::size_t n, const ModelParameters& params, std::uint64_t seed) {
    GraphSample s;
    s.n = n;
    s.d = params.d();
    s.k = params.k();
    s.geometry = params.geometry();
    s.edge_model = params.edge_model();
    s.seed = seed;
    return s;
}

/// Shared body of the null and tilted samplers: `colour_weights` and
/// `probs` are the (possibly tilted) colour weights and connection
/// probabilities; `radii` the matching radii for the geometric model.
GraphSample draw(std::size_t n, const ModelParameters& params, std::uint64_t seed,
                 std::span<const double> colour_weights, const SquareMatrix& probs, const SquareMatrix& radii) {
    if (n == 0) throw std::invalid_argument("sample: n must be >= 1");
    GraphSample s = assemble(n, params, seed);
    Rng rng(seed);
    if (params.edge_model() == EdgeModel::geometric) {
        check_radii(radii, params.geometry(), n);
        s.points = uniform_points(n, params.d(), rng);
        s.colours = draw_colours(n, colour_weights, rng);
        s.edges = find_edges_grid(s.points, s.colours, radii, params.d(), params.geometry());
    } else {
        check_probabilities(probs, n);
        s.colours = draw_colours(n, colour_weights, rng);
        s.edges = independent_edges(s.colours, std::vector<bool>(n, true), probs, rng);
    }
    s.radii = radii;
    return s;
}

}  // namespace

GraphSample sample_cgrg(std::size_t n, const ModelParameters& params, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample_cgrg: n must be >= 1");
    return draw(n, params, seed, params.nu(), params.connection_probabilities(n), params.radii(n));
}

// ---------------------------------------------------------------------------
// Change of measure
// ---------------------------------------------------------------------------

TiltingPotentials::TiltingPotentials(std::vector<double> f, SquareMatrix g, const ModelParameters& params)
    : params_(params), f_(std::move(f)), g_(std::move(g)), log_normaliser_(0.0) {
    const std::size_t k = params_.k();
    if (f_.size() != k || g_.size() != k)
        throw std::invalid_argument("TiltingPotentials: f and g must match the alphabet size " + std::to_string(k));
    for (double v : f_)
        if (!std::isfinite(v)) throw std::invalid_argument("TiltingPotentials: f must be finite");
    for (double v : g_.data())
        if (!std::isfinite(v)) throw std::invalid_argument("TiltingPotentials: g must be finite");
    if (!g_.is_symmetric(0.0)) throw std::invalid_argument("TiltingPotentials: g must be symmetric");
    // normalised by sum nu so that f = 0 gives U_f = 0 exactly
    double num = 0.0, den = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        num += std::exp(f_[a]) * params_.nu(a);
        den += params_.nu(a);
    }
    log_normaliser_ = std::log(num / den);
}

TiltingPotentials TiltingPotentials::identity(const ModelParameters& params) {
    return TiltingPotentials(std::vector<double>(params.k(), 0.0), SquareMatrix(params.k()), params);
}

bool TiltingPotentials::is_identity() const {
    return std::all_of(f_.begin(), f_.end(), [](double v) { return v == 0.0; }) &&
           std::all_of(g_.data().begin(), g_.data().end(), [](double v) { return v == 0.0; });
}

std::vector<double> TiltingPotentials::tilted_colour_weights() const {
    std::vector<double> w(f_.size());
    for (std::size_t a = 0; a < w.size(); ++a) w[a] = std::exp(f_[a]) * params_.nu(a);
    return w;
}

std::vector<double> TiltingPotentials::tilted_colour_law() const {
    std::vector<double> w(f_.size());
    for (std::size_t a = 0; a < w.size(); ++a) w[a] = std::exp(f_[a] - log_normaliser_) * params_.nu(a);
    return w;
}

SquareMatrix TiltingPotentials::tilted_connection_probabilities(std::size_t n) const {
    SquareMatrix p = params_.connection_probabilities(n);
    for (std::size_t a = 0; a < p.size(); ++a)
        for (std::size_t b = 0; b < p.size(); ++b) {
            const double F = p(a, b);
            p(a, b) = F * std::exp(g_(a, b)) / (1.0 + F * std::expm1(g_(a, b)));
        }
    return p;
}

SquareMatrix TiltingPotentials::h(std::size_t n) const {
    const SquareMatrix p = params_.connection_probabilities(n);
    SquareMatrix out(p.size());
    for (std::size_t a = 0; a < p.size(); ++a)
        for (std::size_t b = 0; b < p.size(); ++b)
            out(a, b) = -static_cast<double>(n) * std::log1p(p(a, b) * std::expm1(g_(a, b)));
    return out;
}

SquareMatrix TiltingPotentials::beta() const {
    SquareMatrix out(g_.size());
    for (std::size_t a = 0; a < g_.size(); ++a)
        for (std::size_t b = 0; b < g_.size(); ++b)
            out(a, b) = -params_.rho() * std::expm1(g_(a, b)) * params_.kernel(a, b);
    return out;
}

TiltedSample sample_tilted(std::size_t n, const ModelParameters& params, const TiltingPotentials& pots,
                           std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample_tilted: n must be >= 1");
    if (pots.f().size() != params.k()) throw std::invalid_argument("sample_tilted: potentials do not match model");
    const SquareMatrix null_p = params.connection_probabilities(n);
    const SquareMatrix tilted_p = pots.tilted_connection_probabilities(n);
    // geometric realisation: scale radii so that rho r~^d = F~ (ratio form
    // keeps the identity tilt bit-identical to the null radii)
    SquareMatrix radii = params.radii(n);
    for (std::size_t a = 0; a < radii.size(); ++a)
        for (std::size_t b = 0; b < radii.size(); ++b) {
            const double g = pots.g()(a, b);
            const double ratio = std::exp(g) / (1.0 + null_p(a, b) * std::expm1(g));
            radii(a, b) *= std::pow(ratio, 1.0 / params.d());
        }
    TiltedSample out;
    out.sample = draw(n, params, seed, pots.tilted_colour_weights(), tilted_p, radii);
    out.log_weight = log_likelihood_ratio(out.sample, params, pots);
    return out;
}

double log_likelihood_ratio(const GraphSample& sample, const ModelParameters& params,
                            const TiltingPotentials& pots) {
    const std::size_t k = params.k();
    const std::size_t n = sample.n;
    if (sample.k != k) throw std::invalid_argument("log_likelihood_ratio: sample alphabet does not match model");
    std::vector<std::uint64_t> colour_counts(k, 0);
    for (auto c : sample.colours) ++colour_counts[c];
    std::vector<std::uint64_t> edge_counts(k * k, 0);
    for (const auto& [u, v] : sample.edges) {
        const auto a = std::min(sample.colours[u], sample.colours[v]);
        const auto b = std::max(sample.colours[u], sample.colours[v]);
        ++edge_counts[a * k + b];
    }
    const SquareMatrix F = params.connection_probabilities(n);

    // n<L1, f - U_f>
    double colour_term = 0.0;
    for (std::size_t a = 0; a < k; ++a)
        colour_term += static_cast<double>(colour_counts[a]) * (pots.f()[a] - pots.log_normaliser());
    // (n/2)<L2, g> = sum over edges of g, and
    // (n/2)<L1 x L1, h_n> - (1/2)<L1_diag, h_n> = (1/n) sum over unordered pairs of h_n
    double edge_term = 0.0;
    double pair_term = 0.0;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a; b < k; ++b) {
            const double g = pots.g()(a, b);
            edge_term += static_cast<double>(edge_counts[a * k + b]) * g;
            const auto na = static_cast<double>(colour_counts[a]);
            const auto nb = static_cast<double>(colour_counts[b]);
            const double pairs = a == b ? na * (na - 1.0) / 2.0 : na * nb;
            pair_term += pairs * -std::log1p(F(a, b) * std::expm1(g));
        }
    return -(colour_term + edge_term + pair_term);
}

GraphSample sample_planted_isolated(std::size_t n, const ModelParameters& params, std::size_t planted,
                                    std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample_planted_isolated: n must be >= 1");
    if (params.edge_model() != EdgeModel::independent)
        throw std::invalid_argument("sample_planted_isolated: requires the independent edge model");
    if (planted > n) throw std::invalid_argument("sample_planted_isolated: planted set larger than n");
    const SquareMatrix probs = params.connection_probabilities(n);
    check_probabilities(probs, n);
    GraphSample s = assemble(n, params, seed);
    Rng rng(seed);
    s.colours = draw_colours(n, params.nu(), rng);
    // partial Fisher-Yates for a uniform planted subset
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::vector<bool> active(n, true);
    for (std::size_t i = 0; i < planted; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(order[i], order[j]);
        active[order[i]] = false;
    }
    s.edges = independent_edges(s.colours, active, probs, rng);
    s.radii = params.radii(n);
    return s;
}

}  // namespace cgrg
