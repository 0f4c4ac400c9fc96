#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string_view>
#include <thread>
#include <vector>

#include "cgrg/graphgen.hpp"
#include "cgrg/measures.hpp"
#include "cgrg/model.hpp"

namespace cgrg {

enum class Observable { isolated_fraction, edges_per_vertex, degree_tv, colour_measure, pair_measure };
enum class Comparison { at_least, at_most };

/// How replicas are drawn in estimate_tail.
///
/// `tilted` samples from the exponentially tilted law and reweights with
/// dP/dP~. `planted_isolated` (uncoloured, independent edges, isolated-
/// fraction events only) forces a uniformly chosen set of vertices to be
/// isolated and reweights by the exact mixture likelihood ratio.
enum class Scheme { plain, tilted, planted_isolated };

std::string_view to_string(Observable o);
std::string_view to_string(Comparison c);
std::string_view to_string(Scheme s);
Observable parse_observable(std::string_view s);
Comparison parse_comparison(std::string_view s);
Scheme parse_scheme(std::string_view s);

/// Threshold event on a scalar observable.
struct EventSpec {
    Observable observable = Observable::isolated_fraction;
    Comparison comparison = Comparison::at_least;
    double threshold = 0.0;

    bool holds(double value) const { return comparison == Comparison::at_least ? value >= threshold : value <= threshold; }
};

struct ExperimentConfig {
    explicit ExperimentConfig(ModelParameters p) : params(std::move(p)) {}

    ModelParameters params;
    std::vector<std::size_t> n_grid{1000};
    std::size_t replicas = 100;
    std::uint64_t master_seed = 1;
    Observable observable = Observable::isolated_fraction;
    std::optional<EventSpec> event;
    Scheme scheme = Scheme::plain;
    std::optional<TiltingPotentials> tilt;
    /// Planted set size as a fraction of n; derived from the event threshold when unset.
    std::optional<double> planted_fraction;
    unsigned threads = 1;

    /// Throws std::invalid_argument on replicas = 0, a non-increasing n_grid,
    /// or a scheme/event combination that cannot be run.
    void validate() const;
};

/// Seed of replica r at size n.
std::uint64_t replica_seed(std::uint64_t master, std::size_t n, std::size_t replica);

/// fn(0..count-1) on up to `threads` workers; results in index order, so
/// any reduction over them is independent of the schedule. The first
/// exception thrown by a worker is rethrown.
template <class T>
std::vector<T> run_replicas(std::size_t count, unsigned threads, const std::function<T(std::size_t)>& fn) {
    std::vector<std::optional<T>> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    std::vector<T> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

/// Scalar value of an observable (isolated_fraction, edges_per_vertex or
/// degree_tv against `typical_degree`).
double scalar_observable(const EmpiricalMeasures& m, Observable o, const DegreeDistribution& typical_degree);

struct MeanSe {
    double mean = 0.0;
    double std_err = 0.0;
};

/// Mean and standard error of the mean (pairwise-summed, order-stable).
MeanSe mean_and_se(std::span<const double> values);

struct TypicalRow {
    std::size_t n = 0;
    std::size_t replicas = 0;
    MeanSe isolated_fraction;
    MeanSe edges_per_vertex;
    std::vector<MeanSe> observable;      // one entry per component of the configured observable
    double pooled_degree_tv = 0.0;       // TV(pooled D, delta*)
    double pooled_neighbourhood_tv = 0.0;  // TV(pooled M, mu*)
};

struct TypicalSummary {
    std::vector<TypicalRow> rows;
};

/// Null-law replicas on each n of the grid.
TypicalSummary run_typical(const ExperimentConfig& config);

struct ReplicaRecord {
    std::size_t n = 0;
    std::size_t replica = 0;
    std::uint64_t seed = 0;
    double value = 0.0;
    double log_weight = 0.0;
    bool hit = false;
};

struct TailRow {
    std::size_t n = 0;
    std::size_t replicas = 0;
    std::size_t hits = 0;
    double p_hat = 0.0;
    double log_p_hat = 0.0;     // -inf when there are no hits
    double std_err = 0.0;
    std::optional<double> neg_log_rate;  // -(1/n) log p_hat; absent for zero-hit rows
    double neg_log_rate_se = 0.0;
    double effective_sample_size = 0.0;  // (sum w)^2 / sum w^2 over the hits
    // mean weight over all replicas: 1 under `tilted`; under `planted_isolated`
    // the proposal only covers {at least `planted` isolated}, whose probability it estimates
    double mean_weight = 1.0;
    double mean_weight_se = 0.0;
    std::optional<double> rule_of_three;  // 3 / replicas, reported for zero-hit rows
    std::size_t planted = 0;
};

struct TailEstimate {
    std::vector<TailRow> rows;
    std::vector<ReplicaRecord> replicas;
};

/// Tail probability of config.event on each n, by plain or importance-
/// sampled Monte Carlo.
TailEstimate estimate_tail(const ExperimentConfig& config);

/// Planted set size for isolated fraction target y at size n: the fraction
/// (y - e^{-a}) / (1 - e^{-a}) with a = a(y), which makes y the typical
/// isolated fraction of the planted law.
double planted_fraction_for(double y, double c, int d);

struct EulerRow {
    std::size_t n = 0;
    std::size_t a = 0, b = 0;
    double value = 0.0;   // (1 + alpha F(r_n(a,b)))^n
    double limit = 0.0;   // e^{alpha rho C(a,b)}
    double abs_error = 0.0;
    double rel_error = 0.0;
};

std::vector<EulerRow> euler_check(double alpha, const ModelParameters& params, const std::vector<std::size_t>& n_grid);

struct TailBoundReport {
    std::size_t n = 0;
    double l = 0.0;
    std::size_t replicas = 0;
    std::size_t hits = 0;
    double p_hat = 0.0;
    double bound_term = 0.0;  // e^{-n (l - rho c (e - 1))}
    double safety = 10.0;
    double rule_of_three = 0.0;
    bool empirical_within_bound = false;   // p_hat <= safety * bound_term
    bool rule_of_three_below_bound = false;  // 3 / replicas < bound_term
};

/// Plain Monte Carlo for P{|E| >= l n} against the exponential-tightness
/// bound with c = max C. Throws on replicas = 0.
TailBoundReport tail_bound_check(const ModelParameters& params, double l, std::size_t n, std::size_t replicas,
                                 std::uint64_t master_seed = 1, unsigned threads = 1);

}  // namespace cgrg
