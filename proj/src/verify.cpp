#include "cgrg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cgrg/mc.hpp"
#include "cgrg/rates.hpp"

namespace cgrg {

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> names{"typical", "contraction", "euler", "tail-bound", "ldp-slope"};
    return names;
}

namespace {

template <class T>
T setting(const json& config, const char* suite, const char* key) {
    try {
        return config.at("verify").at(suite).at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: 'verify.") + suite + "." + key + "' is missing or invalid");
    }
}

double uncoloured_c(const ModelParameters& params, const char* suite) {
    if (params.k() != 1) throw ConfigError(std::string("verify ") + suite + ": needs an uncoloured model (k = 1)");
    return params.kernel(0, 0);
}

VerifyReport verify_typical(const json& config) {
    const ExperimentConfig ec = experiment_from_config(config);
    const double band = setting<double>(config, "typical", "se_band");
    const double dtv = setting<double>(config, "typical", "degree_tv");
    const double mtv = setting<double>(config, "typical", "neighbourhood_tv");
    const TypicalMeasures typical = typical_measures(ec.params);
    const TypicalSummary summary = run_typical(ec);

    // nu^T C nu
    double quad = 0.0;
    for (std::size_t a = 0; a < ec.params.k(); ++a)
        for (std::size_t b = 0; b < ec.params.k(); ++b)
            quad += ec.params.nu(a) * ec.params.nu(b) * ec.params.kernel(a, b);

    VerifyReport rep{"typical", {}, to_json(summary)};
    for (const auto& row : summary.rows) {
        const std::string at = " (n=" + std::to_string(row.n) + ")";
        const double iso_target = typical.delta[0];
        const auto& iso = row.isolated_fraction;
        rep.checks.push_back({"isolated fraction within " + std::to_string(band) + " se of delta*(0)" + at,
                              std::abs(iso.mean - iso_target) <= band * iso.std_err,
                              {{"mean", iso.mean}, {"std_err", iso.std_err}, {"target", iso_target}}});
        if (ec.params.geometry() == Geometry::torus) {
            const double nn = static_cast<double>(row.n);
            const double target = (nn - 1.0) / (2.0 * nn) * ec.params.rho() * quad;
            const auto& e = row.edges_per_vertex;
            rep.checks.push_back({"edges per vertex within " + std::to_string(band) + " se of exact mean" + at,
                                  std::abs(e.mean - target) <= band * e.std_err,
                                  {{"mean", e.mean}, {"std_err", e.std_err}, {"target", target}}});
        }
        rep.checks.push_back({"pooled degree TV to delta*" + at, row.pooled_degree_tv < dtv,
                              {{"tv", row.pooled_degree_tv}, {"limit", dtv}}});
        rep.checks.push_back({"pooled neighbourhood TV to mu*" + at, row.pooled_neighbourhood_tv < mtv,
                              {{"tv", row.pooled_neighbourhood_tv}, {"limit", mtv}}});
    }
    return rep;
}

VerifyReport verify_contraction(const json& config) {
    const ModelParameters params = model_from_config(config);
    const double c = uncoloured_c(params, "contraction");
    const auto ys = setting<std::vector<double>>(config, "contraction", "y");
    const auto support = setting<std::size_t>(config, "contraction", "support");
    const double vtol = setting<double>(config, "contraction", "value_tol");
    const double mtol = setting<double>(config, "contraction", "minimiser_tol");

    VerifyReport rep{"contraction", {}, json::array()};
    for (double y : ys) {
        const RateResult xi = rate_xi1(y, c, params.d());
        const ContractionResult num = contract_eta1(y, c, params.d(), support);
        const DegreeDistribution closed = contraction_minimiser(y, c, params.d(), support);
        double diff = 0.0;
        for (std::size_t k = 0; k <= support; ++k) diff = std::max(diff, std::abs(num.minimiser[k] - closed[k]));
        const json row = {{"y", y},
                          {"xi1", xi.value},
                          {"a", *xi.diagnostics.root},
                          {"contracted_eta1", num.value},
                          {"iterations", num.iterations},
                          {"minimiser_max_diff", diff}};
        rep.data.push_back(row);
        const std::string at = " (y=" + std::to_string(y) + ")";
        rep.checks.push_back({"min eta1 over delta(0)=y equals xi1" + at, std::abs(num.value - xi.value) <= vtol, row});
        rep.checks.push_back({"minimiser is conditional Poisson" + at, diff <= mtol, row});
    }
    return rep;
}

VerifyReport verify_euler(const json& config) {
    const ModelParameters params = model_from_config(config);
    const auto alphas = setting<std::vector<double>>(config, "euler", "alpha");
    const auto grid = setting<std::vector<std::size_t>>(config, "euler", "n_grid");
    const double tol = setting<double>(config, "euler", "rel_tol");
    if (grid.empty()) throw ConfigError("config: 'verify.euler.n_grid' must not be empty");

    VerifyReport rep{"euler", {}, json::array()};
    for (double alpha : alphas) {
        const auto rows = euler_check(alpha, params, grid);
        rep.data.push_back({{"alpha", alpha}, {"rows", to_json(rows)}});
        std::map<std::pair<std::size_t, std::size_t>, std::vector<EulerRow>> by_pair;
        for (const auto& r : rows) by_pair[{r.a, r.b}].push_back(r);
        for (const auto& [ab, series] : by_pair) {
            const std::string at = " (alpha=" + std::to_string(alpha) + ", C(" + std::to_string(ab.first) + "," +
                                   std::to_string(ab.second) + "))";
            const EulerRow& last = series.back();
            rep.checks.push_back({"relative error below tolerance at n=" + std::to_string(last.n) + at,
                                  last.rel_error < tol, {{"rel_error", last.rel_error}, {"tolerance", tol}}});
            bool decreasing = true;
            for (std::size_t i = 1; i < series.size(); ++i)
                decreasing = decreasing && series[i].abs_error <= series[i - 1].abs_error;
            rep.checks.push_back({"error decreases along n" + at, decreasing, json::object()});
        }
    }
    return rep;
}

VerifyReport verify_tail_bound(const json& config) {
    const ExperimentConfig ec = experiment_from_config(config);
    TailBoundReport r = tail_bound_check(ec.params, setting<double>(config, "tail_bound", "l"),
                                         setting<std::size_t>(config, "tail_bound", "n"),
                                         setting<std::size_t>(config, "tail_bound", "replicas"), ec.master_seed,
                                         ec.threads);
    r.safety = setting<double>(config, "tail_bound", "safety");
    r.empirical_within_bound = r.p_hat <= r.safety * r.bound_term;
    const json d = to_json(r);
    return {"tail-bound",
            {{"empirical P{|E| >= l n} <= safety x bound term", r.empirical_within_bound, d},
             {"rule-of-three upper bound below bound term", r.rule_of_three_below_bound, d}},
            d};
}

VerifyReport verify_ldp_slope(const json& config) {
    const ExperimentConfig base = experiment_from_config(config);
    const double c = uncoloured_c(base.params, "ldp-slope");
    const double y = setting<double>(config, "ldp_slope", "y");
    const double tol = setting<double>(config, "ldp_slope", "rel_tol");

    ExperimentConfig ec(base.params.with_edge_model(EdgeModel::independent));
    ec.n_grid = setting<std::vector<std::size_t>>(config, "ldp_slope", "n_grid");
    ec.replicas = setting<std::size_t>(config, "ldp_slope", "replicas");
    ec.master_seed = base.master_seed;
    ec.threads = base.threads;
    ec.scheme = Scheme::planted_isolated;
    ec.event = EventSpec{Observable::isolated_fraction, Comparison::at_least, y};
    const TailEstimate est = estimate_tail(ec);
    const double target = rate_xi1(y, c, ec.params.d()).value;

    VerifyReport rep{"ldp-slope", {}, to_json(est)};
    rep.data["xi1"] = target;
    bool all_hit = true;
    for (const auto& r : est.rows) all_hit = all_hit && r.neg_log_rate.has_value();
    rep.checks.push_back({"every n has hits", all_hit, json::object()});
    if (!all_hit) return rep;

    const auto& last = est.rows.back();
    const double rel = std::abs(*last.neg_log_rate - target) / target;
    rep.checks.push_back({"-(1/n) log p_hat within tolerance of xi1 at n=" + std::to_string(last.n), rel <= tol,
                          {{"estimate", *last.neg_log_rate}, {"xi1", target}, {"rel_error", rel}, {"tolerance", tol}}});
    std::size_t steps = 0, toward = 0;
    for (std::size_t i = 1; i < est.rows.size(); ++i) {
        ++steps;
        if (std::abs(*est.rows[i].neg_log_rate - target) < std::abs(*est.rows[i - 1].neg_log_rate - target)) ++toward;
    }
    const std::size_t needed = std::min<std::size_t>(3, steps);
    rep.checks.push_back({"sequence moves toward xi1 in at least " + std::to_string(needed) + " steps",
                          toward >= needed, {{"steps", steps}, {"toward", toward}}});
    return rep;
}

}  // namespace

VerifyReport run_verify(std::string_view suite, const json& config) {
    if (suite == "typical") return verify_typical(config);
    if (suite == "contraction") return verify_contraction(config);
    if (suite == "euler") return verify_euler(config);
    if (suite == "tail-bound") return verify_tail_bound(config);
    if (suite == "ldp-slope") return verify_ldp_slope(config);
    throw ConfigError("unknown verify suite '" + std::string(suite) +
                      "' (expected typical, contraction, euler, tail-bound or ldp-slope)");
}

json to_json(const VerifyReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return {{"suite", report.suite}, {"passed", report.passed()}, {"checks", checks}, {"data", report.data}};
}

}  // namespace cgrg
