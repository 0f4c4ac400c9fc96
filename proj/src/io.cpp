#include "cgrg/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cgrg/numeric.hpp"

namespace cgrg {

json extended_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
    return x;
}

double parse_extended_real(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "+inf" || s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        if (s == "nan") return std::nan("");
    }
    throw IoError("expected a number or \"+inf\", got " + j.dump());
}

namespace {

std::vector<double> double_array(const json& j, const char* what) {
    if (!j.is_array()) throw IoError(std::string(what) + ": expected an array");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(parse_extended_real(v));
    return out;
}

const json& field(const json& j, const char* key, const char* what) {
    if (!j.is_object() || !j.contains(key)) throw IoError(std::string(what) + ": missing field '" + key + "'");
    return j.at(key);
}

template <class T>
T get_as(const json& j, const char* key, const char* what) {
    try {
        return field(j, key, what).get<T>();
    } catch (const json::exception& e) {
        throw IoError(std::string(what) + ": field '" + key + "' has the wrong type");
    }
}

SquareMatrix matrix_from_rows(const json& rows, const char* what) {
    if (!rows.is_array()) throw IoError(std::string(what) + ": expected an array of rows");
    const std::size_t k = rows.size();
    std::vector<double> flat;
    for (const auto& row : rows) {
        const auto r = double_array(row, what);
        if (r.size() != k) throw IoError(std::string(what) + ": matrix must be square");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return SquareMatrix(k, std::move(flat));
}

json matrix_rows(const SquareMatrix& m) {
    json rows = json::array();
    for (std::size_t a = 0; a < m.size(); ++a) {
        json row = json::array();
        for (std::size_t b = 0; b < m.size(); ++b) row.push_back(extended_real(m(a, b)));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

json to_json(const ColourMeasure& m) {
    json support = json::array(), weights = json::array();
    for (std::size_t a = 0; a < m.size(); ++a) {
        support.push_back(a);
        weights.push_back(m[a]);
    }
    return {{"kind", "colour"}, {"support", support}, {"weights", weights}, {"total_mass", m.total_mass()}};
}

json to_json(const PairMeasure& m) {
    json support = json::array(), weights = json::array();
    for (std::size_t a = 0; a < m.size(); ++a)
        for (std::size_t b = 0; b < m.size(); ++b) {
            support.push_back({a, b});
            weights.push_back(m(a, b));
        }
    return {{"kind", "pair"}, {"k", m.size()}, {"support", support}, {"weights", weights}, {"total_mass", m.total_mass()}};
}

json to_json(const NeighbourhoodMeasure& m) {
    json support = json::array(), weights = json::array();
    for (const auto& e : m.entries()) {
        support.push_back({{"colour", e.key.colour}, {"profile", e.key.profile.tokens()}});
        weights.push_back(e.weight);
    }
    return {{"kind", "neighbourhood"}, {"k", m.colours()},           {"support", support},
            {"weights", weights},      {"total_mass", m.total_mass()}, {"truncated_mass", m.truncated_mass()}};
}

json to_json(const DegreeDistribution& m) {
    json support = json::array(), weights = json::array();
    for (std::size_t d = 0; d < m.size(); ++d) {
        support.push_back(d);
        weights.push_back(m[d]);
    }
    return {{"kind", "degree"}, {"support", support}, {"weights", weights}, {"total_mass", m.total_mass()},
            {"mean", m.mean()}};
}

json to_json(const EmpiricalMeasures& m) {
    return {{"n", m.counts.n},
            {"edges", m.counts.edge_count},
            {"L1", to_json(m.colour)},
            {"L2", to_json(m.pair)},
            {"M", to_json(m.neighbourhood)},
            {"D", to_json(m.degree)}};
}

ColourMeasure colour_measure_from_json(const json& j) {
    if (j.is_array()) return ColourMeasure(double_array(j, "colour measure"));
    return ColourMeasure(double_array(field(j, "weights", "colour measure"), "colour measure"));
}

PairMeasure pair_measure_from_json(const json& j) {
    if (j.is_array()) return PairMeasure(matrix_from_rows(j, "pair measure"));
    const auto k = get_as<std::size_t>(j, "k", "pair measure");
    const json& support = field(j, "support", "pair measure");
    const auto weights = double_array(field(j, "weights", "pair measure"), "pair measure");
    if (!support.is_array() || support.size() != weights.size())
        throw IoError("pair measure: support and weights differ in length");
    SquareMatrix m(k);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const auto a = support[i].at(0).get<std::size_t>(), b = support[i].at(1).get<std::size_t>();
        if (a >= k || b >= k) throw IoError("pair measure: colour index outside alphabet");
        m(a, b) += weights[i];
    }
    return PairMeasure(std::move(m));
}

NeighbourhoodMeasure neighbourhood_measure_from_json(const json& j) {
    const auto k = get_as<std::size_t>(j, "k", "neighbourhood measure");
    const json& support = field(j, "support", "neighbourhood measure");
    const auto weights = double_array(field(j, "weights", "neighbourhood measure"), "neighbourhood measure");
    if (!support.is_array() || support.size() != weights.size())
        throw IoError("neighbourhood measure: support and weights differ in length");
    std::vector<NeighbourhoodMeasure::Entry> entries;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        NeighbourhoodKey key;
        key.colour = get_as<std::uint32_t>(support[i], "colour", "neighbourhood measure");
        const auto tokens = get_as<std::vector<std::string>>(support[i], "profile", "neighbourhood measure");
        try {
            key.profile = Profile::from_tokens(tokens);
        } catch (const std::invalid_argument& e) {
            throw IoError(std::string("neighbourhood measure: ") + e.what());
        }
        entries.push_back({std::move(key), weights[i]});
    }
    const double truncated = j.contains("truncated_mass") ? parse_extended_real(j.at("truncated_mass")) : 0.0;
    return NeighbourhoodMeasure(k, std::move(entries), truncated);
}

DegreeDistribution degree_distribution_from_json(const json& j) {
    if (j.is_array()) return DegreeDistribution(double_array(j, "degree distribution"));
    const auto weights = double_array(field(j, "weights", "degree distribution"), "degree distribution");
    if (!j.contains("support")) return DegreeDistribution(weights);
    const auto support = j.at("support").get<std::vector<std::size_t>>();
    if (support.size() != weights.size()) throw IoError("degree distribution: support and weights differ in length");
    std::size_t top = 0;
    for (auto s : support) top = std::max(top, s);
    std::vector<double> w(weights.empty() ? 0 : top + 1, 0.0);
    for (std::size_t i = 0; i < support.size(); ++i) w[support[i]] += weights[i];
    return DegreeDistribution(std::move(w));
}

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

json to_json(const GraphSample& s) {
    json points = json::array();
    if (!s.points.empty())
        for (std::size_t i = 0; i < s.n; ++i) {
            const auto p = s.point(i);
            points.push_back(std::vector<double>(p.begin(), p.end()));
        }
    json edges = json::array();
    for (const auto& [u, v] : s.edges) edges.push_back({u, v});
    return {{"schema_version", kSchemaVersion},
            {"n", s.n},
            {"d", s.d},
            {"k", s.k},
            {"geometry", to_string(s.geometry)},
            {"edge_model", to_string(s.edge_model)},
            {"seed", s.seed},
            {"radii", matrix_rows(s.radii)},
            {"colours", s.colours},
            {"points", points},
            {"edges", edges}};
}

GraphSample sample_from_json(const json& j) {
    constexpr const char* what = "sample";
    GraphSample s;
    try {
        if (j.is_object() && j.contains("schema_version") && j.at("schema_version") != kSchemaVersion)
            throw IoError("sample: unsupported schema_version " + j.at("schema_version").dump());
        s.n = get_as<std::size_t>(j, "n", what);
        s.d = get_as<int>(j, "d", what);
        s.k = get_as<std::size_t>(j, "k", what);
        s.geometry = parse_geometry(get_as<std::string>(j, "geometry", what));
        s.edge_model = j.contains("edge_model") ? parse_edge_model(j.at("edge_model").get<std::string>())
                                                : EdgeModel::geometric;
        s.seed = get_as<std::uint64_t>(j, "seed", what);
        s.radii = matrix_from_rows(field(j, "radii", what), "sample radii");
        s.colours = get_as<std::vector<std::uint32_t>>(j, "colours", what);
        for (const auto& p : field(j, "points", what)) {
            const auto row = double_array(p, "sample points");
            if (row.size() != static_cast<std::size_t>(s.d)) throw IoError("sample: point of wrong dimension");
            s.points.insert(s.points.end(), row.begin(), row.end());
        }
        for (const auto& e : field(j, "edges", what)) {
            if (!e.is_array() || e.size() != 2) throw IoError("sample: edges must be [i, j] pairs");
            s.edges.emplace_back(e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>());
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("sample: malformed document (") + e.what() + ")");
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("sample: ") + e.what());
    }
    if (s.radii.size() != s.k) throw IoError("sample: radii must be k x k");
    return s;
}

void write_edge_list(std::ostream& out, const GraphSample& s) {
    for (const auto& [u, v] : s.edges) out << u << ' ' << v << '\n';
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

json to_json(const RateResult& r) {
    const auto& d = r.diagnostics;
    json diag = {{"method", d.method},
                 {"iterations", d.iterations},
                 {"residual", extended_real(d.residual)},
                 {"converged", d.converged},
                 {"truncation_residual", d.truncation_residual}};
    if (d.root) diag["root"] = extended_real(*d.root);
    if (!d.witness.empty()) diag["witness"] = d.witness;
    if (!d.reason.empty()) diag["reason"] = d.reason;
    return {{"value", extended_real(r.value)}, {"finite", r.finite()}, {"diagnostics", diag}};
}

json to_json(const TypicalSummary& s) {
    json rows = json::array();
    for (const auto& r : s.rows) {
        json obs = json::array();
        for (const auto& o : r.observable) obs.push_back({{"mean", o.mean}, {"std_err", o.std_err}});
        rows.push_back({{"n", r.n},
                        {"replicas", r.replicas},
                        {"isolated_fraction", {{"mean", r.isolated_fraction.mean}, {"std_err", r.isolated_fraction.std_err}}},
                        {"edges_per_vertex", {{"mean", r.edges_per_vertex.mean}, {"std_err", r.edges_per_vertex.std_err}}},
                        {"observable", obs},
                        {"pooled_degree_tv", r.pooled_degree_tv},
                        {"pooled_neighbourhood_tv", r.pooled_neighbourhood_tv}});
    }
    return {{"rows", rows}};
}

json to_json(const TailEstimate& e) {
    json rows = json::array();
    for (const auto& r : e.rows) {
        json row = {{"n", r.n},
                    {"replicas", r.replicas},
                    {"hits", r.hits},
                    {"p_hat", r.p_hat},
                    {"log_p_hat", extended_real(r.log_p_hat)},
                    {"std_err", r.std_err},
                    {"neg_log_rate", r.neg_log_rate ? json(*r.neg_log_rate) : json(nullptr)},
                    {"neg_log_rate_se", r.neg_log_rate_se},
                    {"effective_sample_size", r.effective_sample_size},
                    {"mean_weight", r.mean_weight},
                    {"mean_weight_se", r.mean_weight_se},
                    {"zero_hits", r.hits == 0}};
        if (r.rule_of_three) row["rule_of_three_upper"] = *r.rule_of_three;
        if (r.planted) row["planted"] = r.planted;
        rows.push_back(row);
    }
    return {{"rows", rows}};
}

json to_json(const std::vector<EulerRow>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"n", r.n},
                       {"a", r.a},
                       {"b", r.b},
                       {"value", r.value},
                       {"limit", r.limit},
                       {"abs_error", r.abs_error},
                       {"rel_error", r.rel_error}});
    return out;
}

json to_json(const TailBoundReport& r) {
    return {{"n", r.n},
            {"l", r.l},
            {"replicas", r.replicas},
            {"hits", r.hits},
            {"p_hat", r.p_hat},
            {"bound_term", r.bound_term},
            {"safety", r.safety},
            {"rule_of_three_upper", r.rule_of_three},
            {"empirical_within_bound", r.empirical_within_bound},
            {"rule_of_three_below_bound", r.rule_of_three_below_bound}};
}

void write_replica_csv(std::ostream& out, const TailEstimate& e) {
    out << "n,replica,seed,value,log_weight,hit\n";
    out.precision(17);
    for (const auto& r : e.replicas)
        out << r.n << ',' << r.replica << ',' << r.seed << ',' << r.value << ',' << r.log_weight << ','
            << (r.hit ? 1 : 0) << '\n';
}

void write_tail_summary_csv(std::ostream& out, const TailEstimate& e) {
    out << "n,replicas,hits,p_hat,log_p_hat,std_err,neg_log_rate,neg_log_rate_se,ess,mean_weight,mean_weight_se\n";
    out.precision(17);
    for (const auto& r : e.rows) {
        out << r.n << ',' << r.replicas << ',' << r.hits << ',' << r.p_hat << ',' << r.log_p_hat << ',' << r.std_err
            << ',';
        if (r.neg_log_rate) out << *r.neg_log_rate;
        out << ',' << r.neg_log_rate_se << ',' << r.effective_sample_size << ',' << r.mean_weight << ','
            << r.mean_weight_se << '\n';
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

json default_run_config() {
    return {{"schema_version", kSchemaVersion},
            {"model",
             {{"d", 2},
              {"nu", {1.0}},
              {"C", {{1.0}}},
              {"geometry", "torus"},
              {"edge_model", "geometric"}}},
            {"sample", {{"n", 1000}, {"seed", 1}}},
            {"experiment",
             {{"n_grid", {4000}},
              {"replicas", 100},
              {"master_seed", 1},
              {"observable", "isolated_fraction"},
              {"event", nullptr},
              {"scheme", "plain"},
              {"tilt", nullptr},
              {"planted_fraction", nullptr}}},
            {"verify",
             {{"typical", {{"se_band", 3.0}, {"degree_tv", 0.05}, {"neighbourhood_tv", 0.1}}},
              {"contraction",
               {{"y", {0.1, 0.3, 0.5, 0.7}}, {"support", 60}, {"value_tol", 1e-3}, {"minimiser_tol", 1e-4}}},
              {"euler", {{"alpha", {-1.0, 1.0}}, {"n_grid", {1000, 10000, 100000}}, {"rel_tol", 0.02}}},
              {"tail_bound", {{"l", 6.0}, {"n", 200}, {"replicas", 10000}, {"safety", 10.0}}},
              {"ldp_slope",
               {{"y", 0.3}, {"n_grid", {100, 200, 400, 600}}, {"replicas", 10000}, {"rel_tol", 0.3}}}}},
            {"threads", 1}};
}

namespace {

const json& event_template() {
    static const json t = {{"observable", "isolated_fraction"}, {"comparison", ">="}, {"threshold", 0.0}};
    return t;
}

std::string type_name(const json& j) {
    if (j.is_number()) return "number";
    return j.type_name();
}

/// Overlay `user` onto `base` in place, rejecting unknown keys and type changes.
void overlay(json& base, const json& user, const std::string& path) {
    if (!user.is_object()) throw ConfigError("config: '" + path + "' must be an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("config: unknown key '" + key + "'");
        json& slot = base[it.key()];
        const json& v = it.value();
        if (key == "experiment.event") {
            if (v.is_null()) {
                slot = nullptr;
            } else {
                json merged = slot.is_null() ? event_template() : slot;
                overlay(merged, v, key);
                slot = merged;
            }
        } else if (key == "experiment.tilt") {
            if (v.is_null()) {
                slot = nullptr;
            } else {
                if (!v.is_object() || !v.contains("f") || !v.contains("g"))
                    throw ConfigError("config: 'experiment.tilt' needs both 'f' and 'g'");
                json merged = {{"f", json::array()}, {"g", json::array()}};
                overlay(merged, v, key);
                slot = merged;
            }
        } else if (key == "experiment.planted_fraction") {
            if (!v.is_null() && !v.is_number()) throw ConfigError("config: '" + key + "' must be a number or null");
            slot = v;
        } else if (slot.is_object()) {
            overlay(slot, v, key);
        } else {
            if (type_name(slot) != type_name(v))
                throw ConfigError("config: '" + key + "' must be a " + type_name(slot) + ", got " + type_name(v));
            slot = v;
        }
    }
}

template <class T>
T config_value(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: '") + key + "' has an invalid value");
    }
}

}  // namespace

json merge_run_config(const json& user) {
    json base = default_run_config();
    if (user.is_null()) return base;
    if (user.contains("schema_version") && user.at("schema_version") != kSchemaVersion)
        throw ConfigError("config: unsupported schema_version " + user.at("schema_version").dump() + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
    overlay(base, user, "");
    return base;
}

void apply_override(json& config, std::string_view dotted_key, std::string_view value) {
    if (dotted_key.empty()) throw ConfigError("--set: empty key");
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::parse_error&) {
        parsed = std::string(value);
    }
    // build a nested document holding only this key and overlay it
    json patch = parsed;
    std::string_view rest = dotted_key;
    std::vector<std::string> parts;
    while (true) {
        const auto dot = rest.find('.');
        parts.emplace_back(rest.substr(0, dot));
        if (parts.back().empty()) throw ConfigError("--set: malformed key '" + std::string(dotted_key) + "'");
        if (dot == std::string_view::npos) break;
        rest.remove_prefix(dot + 1);
    }
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
    overlay(config, patch, "");
}

ModelParameters model_from_config(const json& config) {
    const json& m = config.at("model");
    try {
        const auto d = config_value<int>(m, "d");
        const auto nu = config_value<std::vector<double>>(m, "nu");
        const auto rows = config_value<std::vector<std::vector<double>>>(m, "C");
        std::vector<double> flat;
        for (const auto& r : rows) {
            if (r.size() != rows.size()) throw ConfigError("config: 'model.C' must be square");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return ModelParameters(d, nu, SquareMatrix(rows.size(), std::move(flat)),
                               parse_geometry(config_value<std::string>(m, "geometry")),
                               parse_edge_model(config_value<std::string>(m, "edge_model")));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: model: ") + e.what());
    }
}

ExperimentConfig experiment_from_config(const json& config) {
    ExperimentConfig ec(model_from_config(config));
    const json& e = config.at("experiment");
    try {
        ec.n_grid = config_value<std::vector<std::size_t>>(e, "n_grid");
        ec.replicas = config_value<std::size_t>(e, "replicas");
        ec.master_seed = config_value<std::uint64_t>(e, "master_seed");
        ec.observable = parse_observable(config_value<std::string>(e, "observable"));
        ec.scheme = parse_scheme(config_value<std::string>(e, "scheme"));
        if (!e.at("event").is_null()) {
            const json& ev = e.at("event");
            ec.event = EventSpec{parse_observable(config_value<std::string>(ev, "observable")),
                                 parse_comparison(config_value<std::string>(ev, "comparison")),
                                 config_value<double>(ev, "threshold")};
        }
        if (!e.at("tilt").is_null()) {
            const json& t = e.at("tilt");
            const auto f = config_value<std::vector<double>>(t, "f");
            const auto rows = config_value<std::vector<std::vector<double>>>(t, "g");
            std::vector<double> flat;
            for (const auto& r : rows) {
                if (r.size() != rows.size()) throw ConfigError("config: 'experiment.tilt.g' must be square");
                flat.insert(flat.end(), r.begin(), r.end());
            }
            ec.tilt = TiltingPotentials(f, SquareMatrix(rows.size(), std::move(flat)), ec.params);
        }
        if (!e.at("planted_fraction").is_null()) ec.planted_fraction = config_value<double>(e, "planted_fraction");
        ec.threads = config_value<unsigned>(config, "threads");
        ec.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("config: experiment: ") + err.what());
    }
    return ec;
}

}  // namespace cgrg
