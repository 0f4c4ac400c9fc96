#include "cgrg/mc.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "cgrg/numeric.hpp"
#include "cgrg/rates.hpp"
#include "cgrg/rng.hpp"

namespace cgrg {

std::string_view to_string(Observable o) {
    switch (o) {
        case Observable::isolated_fraction: return "isolated_fraction";
        case Observable::edges_per_vertex: return "edges_per_vertex";
        case Observable::degree_tv: return "degree_tv";
        case Observable::colour_measure: return "colour_measure";
        case Observable::pair_measure: return "pair_measure";
    }
    return "?";
}

std::string_view to_string(Comparison c) { return c == Comparison::at_least ? ">=" : "<="; }

std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::plain: return "plain";
        case Scheme::tilted: return "tilted";
        case Scheme::planted_isolated: return "planted_isolated";
    }
    return "?";
}

Observable parse_observable(std::string_view s) {
    for (auto o : {Observable::isolated_fraction, Observable::edges_per_vertex, Observable::degree_tv,
                   Observable::colour_measure, Observable::pair_measure})
        if (s == to_string(o)) return o;
    throw std::invalid_argument("unknown observable '" + std::string(s) + "'");
}

Comparison parse_comparison(std::string_view s) {
    if (s == ">=" || s == "at_least") return Comparison::at_least;
    if (s == "<=" || s == "at_most") return Comparison::at_most;
    throw std::invalid_argument("unknown comparison '" + std::string(s) + "' (expected >= or <=)");
}

Scheme parse_scheme(std::string_view s) {
    for (auto v : {Scheme::plain, Scheme::tilted, Scheme::planted_isolated})
        if (s == to_string(v)) return v;
    throw std::invalid_argument("unknown scheme '" + std::string(s) + "'");
}

namespace {

bool is_scalar(Observable o) {
    return o == Observable::isolated_fraction || o == Observable::edges_per_vertex || o == Observable::degree_tv;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (replicas == 0) throw std::invalid_argument("experiment: replicas must be >= 1");
    if (n_grid.empty()) throw std::invalid_argument("experiment: n_grid must not be empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] == 0) throw std::invalid_argument("experiment: n_grid entries must be >= 1");
        if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("experiment: n_grid must be strictly increasing");
    }
    if (event && !is_scalar(event->observable))
        throw std::invalid_argument("experiment: events need a scalar observable, not " +
                                    std::string(to_string(event->observable)));
    if (scheme == Scheme::tilted && !tilt) throw std::invalid_argument("experiment: scheme 'tilted' needs a tilt");
    if (tilt && tilt->f().size() != params.k()) throw std::invalid_argument("experiment: tilt does not match the model");
    if (scheme == Scheme::planted_isolated) {
        if (params.k() != 1 || params.edge_model() != EdgeModel::independent)
            throw std::invalid_argument("experiment: scheme 'planted_isolated' needs k = 1 and edge_model 'independent'");
        if (!event || event->observable != Observable::isolated_fraction || event->comparison != Comparison::at_least)
            throw std::invalid_argument("experiment: scheme 'planted_isolated' needs an event isolated_fraction >= y");
        if (planted_fraction && !(*planted_fraction >= 0.0 && *planted_fraction <= 1.0))
            throw std::invalid_argument("experiment: planted_fraction must lie in [0, 1]");
    }
}

std::uint64_t replica_seed(std::uint64_t master, std::size_t n, std::size_t replica) {
    return derive_seed(master, n, replica);
}

double scalar_observable(const EmpiricalMeasures& m, Observable o, const DegreeDistribution& typical_degree) {
    switch (o) {
        case Observable::isolated_fraction: return m.degree[0];
        case Observable::edges_per_vertex:
            return static_cast<double>(m.counts.edge_count) / static_cast<double>(m.counts.n);
        case Observable::degree_tv: return total_variation(m.degree, typical_degree);
        default: break;
    }
    throw std::invalid_argument("observable " + std::string(to_string(o)) + " is not scalar");
}

MeanSe mean_and_se(std::span<const double> values) {
    const std::size_t r = values.size();
    if (r == 0) return {};
    const double mean = pairwise_sum(values) / static_cast<double>(r);
    if (r == 1) return {mean, 0.0};
    std::vector<double> sq(r);
    for (std::size_t i = 0; i < r; ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
    const double var = pairwise_sum(sq) / static_cast<double>(r - 1);
    return {mean, std::sqrt(var / static_cast<double>(r))};
}

// ---------------------------------------------------------------------------
// Typical behaviour
// ---------------------------------------------------------------------------

namespace {

struct TypicalReplica {
    double isolated = 0.0;
    double edges = 0.0;
    std::vector<double> observable;
    std::vector<std::uint64_t> degree_counts;
    std::vector<std::pair<NeighbourhoodKey, std::uint64_t>> profile_counts;
};

std::vector<double> observable_vector(const EmpiricalMeasures& m, Observable o, const DegreeDistribution& delta) {
    switch (o) {
        case Observable::colour_measure: return {m.colour.weights().begin(), m.colour.weights().end()};
        case Observable::pair_measure: return {m.pair.matrix().data().begin(), m.pair.matrix().data().end()};
        default: return {scalar_observable(m, o, delta)};
    }
}

}  // namespace

TypicalSummary run_typical(const ExperimentConfig& config) {
    config.validate();
    const TypicalMeasures typical = typical_measures(config.params);
    TypicalSummary summary;
    for (std::size_t n : config.n_grid) {
        const std::function<TypicalReplica(std::size_t)> one = [&](std::size_t r) {
            const GraphSample s = sample_cgrg(n, config.params, replica_seed(config.master_seed, n, r));
            EmpiricalMeasures m = empirical_measures(s);
            TypicalReplica out;
            out.isolated = m.degree[0];
            out.edges = static_cast<double>(m.counts.edge_count) / static_cast<double>(n);
            out.observable = observable_vector(m, config.observable, typical.delta);
            out.degree_counts = std::move(m.counts.degree_counts);
            out.profile_counts = std::move(m.counts.profile_counts);
            return out;
        };
        const auto reps = run_replicas(config.replicas, config.threads, one);

        TypicalRow row;
        row.n = n;
        row.replicas = reps.size();
        std::vector<double> iso, edges;
        for (const auto& r : reps) {
            iso.push_back(r.isolated);
            edges.push_back(r.edges);
        }
        row.isolated_fraction = mean_and_se(iso);
        row.edges_per_vertex = mean_and_se(edges);
        for (std::size_t c = 0; c < reps.front().observable.size(); ++c) {
            std::vector<double> v;
            for (const auto& r : reps) v.push_back(r.observable[c]);
            row.observable.push_back(mean_and_se(v));
        }

        // pooled histograms: integer counts, so the merge order is irrelevant
        std::vector<std::uint64_t> degree;
        std::map<NeighbourhoodKey, std::uint64_t> profiles;
        for (const auto& r : reps) {
            if (r.degree_counts.size() > degree.size()) degree.resize(r.degree_counts.size(), 0);
            for (std::size_t m = 0; m < r.degree_counts.size(); ++m) degree[m] += r.degree_counts[m];
            for (const auto& [key, count] : r.profile_counts) profiles[key] += count;
        }
        const double total = static_cast<double>(n) * static_cast<double>(reps.size());
        std::vector<double> dw(degree.size());
        for (std::size_t m = 0; m < degree.size(); ++m) dw[m] = static_cast<double>(degree[m]) / total;
        row.pooled_degree_tv = total_variation(DegreeDistribution(std::move(dw)), typical.delta);
        std::vector<NeighbourhoodMeasure::Entry> entries;
        for (const auto& [key, count] : profiles) entries.push_back({key, static_cast<double>(count) / total});
        row.pooled_neighbourhood_tv =
            total_variation(NeighbourhoodMeasure(config.params.k(), std::move(entries)), typical.mu);
        summary.rows.push_back(std::move(row));
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Tail estimation
// ---------------------------------------------------------------------------

double planted_fraction_for(double y, double c, int d) {
    if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("planted_fraction_for: y must lie in [0, 1]");
    const double rc = ball_volume(d) * c;
    if (y == 1.0) return 1.0;
    const double a = isolated_root(rc * (1.0 - y)).a;
    const double e = std::exp(-a);
    return std::max(0.0, (y - e) / (1.0 - e));
}

namespace {

std::size_t isolated_count(const EmpiricalMeasures& m) {
    return m.counts.degree_counts.empty() ? 0 : static_cast<std::size_t>(m.counts.degree_counts[0]);
}

/// log dP/dQ for the planted-isolated mixture Q: choose S uniformly among
/// s-subsets, force S isolated, leave all other pairs as under P. Then
/// Q(G) = P(G) C(I(G), s) / (C(n, s) P{S isolated}).
double planted_log_weight(std::size_t n, std::size_t s, std::size_t isolated, double p) {
    const auto nn = static_cast<double>(n), ss = static_cast<double>(s);
    const double forced_pairs = ss * (nn - ss) + ss * (ss - 1.0) / 2.0;
    return log_binomial(n, s) + forced_pairs * std::log1p(-p) - log_binomial(isolated, s);
}

}  // namespace

TailEstimate estimate_tail(const ExperimentConfig& config) {
    config.validate();
    if (!config.event) throw std::invalid_argument("estimate_tail: an event is required");
    const EventSpec event = *config.event;
    const TypicalMeasures typical = typical_measures(config.params);

    TailEstimate est;
    for (std::size_t n : config.n_grid) {
        std::size_t planted = 0;
        double p_null = 0.0;
        if (config.scheme == Scheme::planted_isolated) {
            const double fraction = config.planted_fraction
                                        ? *config.planted_fraction
                                        : planted_fraction_for(event.threshold, config.params.kernel(0, 0), config.params.d());
            planted = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
            p_null = config.params.connection_probabilities(n)(0, 0);
        }

        const std::function<ReplicaRecord(std::size_t)> one = [&](std::size_t r) {
            ReplicaRecord rec;
            rec.n = n;
            rec.replica = r;
            rec.seed = replica_seed(config.master_seed, n, r);
            GraphSample s;
            switch (config.scheme) {
                case Scheme::plain: s = sample_cgrg(n, config.params, rec.seed); break;
                case Scheme::tilted: {
                    TiltedSample t = sample_tilted(n, config.params, *config.tilt, rec.seed);
                    s = std::move(t.sample);
                    rec.log_weight = t.log_weight;
                    break;
                }
                case Scheme::planted_isolated: s = sample_planted_isolated(n, config.params, planted, rec.seed); break;
            }
            const EmpiricalMeasures m = empirical_measures(s);
            if (config.scheme == Scheme::planted_isolated)
                rec.log_weight = planted_log_weight(n, planted, isolated_count(m), p_null);
            rec.value = scalar_observable(m, event.observable, typical.delta);
            rec.hit = event.holds(rec.value);
            return rec;
        };
        auto reps = run_replicas(config.replicas, config.threads, one);

        TailRow row;
        row.n = n;
        row.planted = planted;
        row.replicas = reps.size();
        const double R = static_cast<double>(reps.size());
        const double log_r = std::log(R);
        std::vector<double> lw_all, lw_hit, lw2_hit;
        for (const auto& rec : reps) {
            lw_all.push_back(rec.log_weight);
            if (rec.hit) {
                ++row.hits;
                lw_hit.push_back(rec.log_weight);
                lw2_hit.push_back(2.0 * rec.log_weight);
            }
        }

        // E[w] = 1 diagnostic over all replicas
        {
            std::vector<double> w(lw_all.size());
            for (std::size_t i = 0; i < lw_all.size(); ++i) w[i] = std::exp(lw_all[i]);
            const MeanSe ws = mean_and_se(w);
            row.mean_weight = ws.mean;
            row.mean_weight_se = ws.std_err;
        }

        if (row.hits == 0) {
            row.p_hat = 0.0;
            row.log_p_hat = -kInf;
            row.rule_of_three = 3.0 / R;
        } else {
            row.log_p_hat = log_sum_exp(lw_hit) - log_r;
            row.effective_sample_size = std::exp(2.0 * log_sum_exp(lw_hit) - log_sum_exp(lw2_hit));
            row.p_hat = std::exp(row.log_p_hat);
            // E[X^2] / p_hat^2 in log space, X = w 1{hit}
            const double log_m2 = log_sum_exp(lw2_hit) - log_r;
            const double rel_var = R > 1.0 ? std::max(0.0, std::exp(log_m2 - 2.0 * row.log_p_hat) - 1.0) / (R - 1.0) : 0.0;
            const double rel_se = std::sqrt(rel_var);
            row.std_err = row.p_hat * rel_se;
            row.neg_log_rate = -row.log_p_hat / static_cast<double>(n);
            row.neg_log_rate_se = rel_se / static_cast<double>(n);
        }
        est.rows.push_back(row);
        est.replicas.insert(est.replicas.end(), reps.begin(), reps.end());
    }
    return est;
}

// ---------------------------------------------------------------------------
// Deterministic checks
// ---------------------------------------------------------------------------

std::vector<EulerRow> euler_check(double alpha, const ModelParameters& params, const std::vector<std::size_t>& n_grid) {
    if (params.geometry() != Geometry::torus) throw std::invalid_argument("euler_check: needs torus geometry");
    std::vector<EulerRow> rows;
    for (std::size_t n : n_grid) {
        if (n == 0) throw std::invalid_argument("euler_check: n must be >= 1");
        const SquareMatrix radii = params.radii(n);
        for (std::size_t a = 0; a < params.k(); ++a)
            for (std::size_t b = a; b < params.k(); ++b) {
                EulerRow row;
                row.n = n;
                row.a = a;
                row.b = b;
                const double F = pair_distance_cdf(radii(a, b), params.d(), params.geometry());
                if (!(alpha * F > -1.0)) throw std::domain_error("euler_check: 1 + alpha F must be positive");
                row.value = std::exp(static_cast<double>(n) * std::log1p(alpha * F));
                row.limit = std::exp(alpha * params.rho() * params.kernel(a, b));
                row.abs_error = std::abs(row.value - row.limit);
                row.rel_error = row.abs_error / row.limit;
                rows.push_back(row);
            }
    }
    return rows;
}

TailBoundReport tail_bound_check(const ModelParameters& params, double l, std::size_t n, std::size_t replicas,
                                 std::uint64_t master_seed, unsigned threads) {
    if (replicas == 0) throw std::invalid_argument("tail_bound_check: replicas must be >= 1");
    if (n == 0) throw std::invalid_argument("tail_bound_check: n must be >= 1");
    TailBoundReport rep;
    rep.n = n;
    rep.l = l;
    rep.replicas = replicas;
    const double c = params.kernel().max();
    const double threshold = l * static_cast<double>(n);
    const std::function<int(std::size_t)> one = [&](std::size_t r) {
        const GraphSample s = sample_cgrg(n, params, replica_seed(master_seed, n, r));
        return static_cast<double>(s.edges.size()) >= threshold ? 1 : 0;
    };
    for (int hit : run_replicas(replicas, threads, one)) rep.hits += static_cast<std::size_t>(hit);
    rep.p_hat = static_cast<double>(rep.hits) / static_cast<double>(replicas);
    rep.bound_term = std::exp(-static_cast<double>(n) * (l - params.rho() * c * (std::exp(1.0) - 1.0)));
    rep.rule_of_three = 3.0 / static_cast<double>(replicas);
    rep.empirical_within_bound = rep.p_hat <= rep.safety * rep.bound_term;
    rep.rule_of_three_below_bound = rep.rule_of_three < rep.bound_term;
    return rep;
}

}  // namespace cgrg
