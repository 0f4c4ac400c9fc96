// cgrg: sample coloured random geometric graphs, measure them, evaluate
// rate functions and run the verification suites.
//
// Exit codes: 0 ok, 2 usage/config, 3 failed assertion or check, 4 I/O.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cgrg/graphgen.hpp"
#include "cgrg/io.hpp"
#include "cgrg/measures.hpp"
#include "cgrg/rates.hpp"
#include "cgrg/verify.hpp"

namespace {

using namespace cgrg;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitAssertion = 3;
constexpr int kExitIo = 4;

/// A violated invariant on user data (e.g. a tampered sample).
class AssertionFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigOptions {
    std::string path;
    std::vector<std::string> sets;
    std::optional<unsigned> threads;
};

void add_config_options(CLI::App* cmd, ConfigOptions& opts) {
    cmd->add_option("--config", opts.path, "JSON run configuration");
    cmd->add_option("--set", opts.sets, "Override a config key, e.g. --set model.d=3 (repeatable; wins over --config)");
    cmd->add_option("--threads", opts.threads, "Worker threads (default: config, then $CGRG_THREADS, then 1)");
}

/// defaults < $CGRG_THREADS < --config file < --set < --threads
json effective_config(const ConfigOptions& opts) {
    json user = opts.path.empty() ? json(nullptr) : read_json_file(opts.path);
    json cfg = merge_run_config(user);
    const bool file_sets_threads = user.is_object() && user.contains("threads");
    if (const char* env = std::getenv("CGRG_THREADS"); env && !file_sets_threads) {
        try {
            const long v = std::stol(env);
            if (v < 1) throw std::invalid_argument("");
            cfg["threads"] = v;
        } catch (const std::exception&) {
            throw ConfigError(std::string("CGRG_THREADS must be a positive integer, got '") + env + "'");
        }
    }
    for (const auto& s : opts.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        apply_override(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (opts.threads) {
        if (*opts.threads == 0) throw ConfigError("--threads must be >= 1");
        cfg["threads"] = *opts.threads;
    }
    return cfg;
}

json metadata() { return {{"tool", "cgrg"}, {"schema_version", kSchemaVersion}}; }

void emit(const json& doc, const std::string& out_path) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_text_file(out_path, text);
}

/// Inline JSON, or @path to read it from a file.
json json_argument(const std::string& arg) {
    if (!arg.empty() && arg[0] == '@') return read_json_file(arg.substr(1));
    try {
        return json::parse(arg);
    } catch (const json::parse_error& e) {
        throw ConfigError("argument is neither inline JSON nor @file: " + arg);
    }
}

// ---------------------------------------------------------------------------

int cmd_generate(const ConfigOptions& copts, const std::string& out, const std::string& edge_list) {
    const json cfg = effective_config(copts);
    const ModelParameters params = model_from_config(cfg);
    const auto n = cfg.at("sample").at("n").get<std::size_t>();
    const auto seed = cfg.at("sample").at("seed").get<std::uint64_t>();
    if (n == 0) throw ConfigError("config: 'sample.n' must be >= 1");
    GraphSample s;
    try {
        s = sample_cgrg(n, params, seed);
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
    json doc = to_json(s);
    doc["config"] = cfg;
    doc["metadata"] = metadata();
    write_text_file(out, doc.dump() + "\n");
    if (!edge_list.empty()) {
        std::ofstream el(edge_list);
        if (!el) throw IoError("cannot write '" + edge_list + "'");
        write_edge_list(el, s);
    }
    const double mean_degree = 2.0 * static_cast<double>(s.edges.size()) / static_cast<double>(n);
    std::cout << "n=" << n << " edges=" << s.edges.size() << " 2|E|/n=" << mean_degree << "\n";
    return kExitOk;
}

int cmd_measure(const std::string& sample_path, const std::string& out) {
    const GraphSample s = sample_from_json(read_json_file(sample_path));
    validate_structure(s);
    validate_geometry(s);
    const EmpiricalMeasures m = empirical_measures(s);
    std::uint64_t pair_total = 0;
    for (auto c : m.counts.pair_counts) pair_total += c;
    if (pair_total != 2 * m.counts.edge_count)
        throw AssertionFailure("||L2|| != 2|E|/n: pair counts sum to " + std::to_string(pair_total));
    if (m.counts.profile_pair_counts() != m.counts.pair_counts)
        throw AssertionFailure("H2(M) != L2 on this sample");
    json doc = to_json(m);
    doc["metadata"] = metadata();
    emit(doc, out);
    return kExitOk;
}

struct RateArgs {
    std::string kind;
    std::string varpi, mu, omega, delta;
    std::optional<double> x, y, c;
    std::optional<int> d;
    std::uint64_t seed = 1;
};

template <class T>
T need(const std::optional<T>& v, const char* flag, const std::string& kind) {
    if (!v) throw ConfigError("rate " + kind + " needs " + flag);
    return *v;
}

std::string need(const std::string& v, const char* flag, const std::string& kind) {
    if (v.empty()) throw ConfigError("rate " + kind + " needs " + flag);
    return v;
}

int cmd_rate(const ConfigOptions& copts, const RateArgs& a, const std::string& out) {
    RateResult r;
    json query = {{"kind", a.kind}};
    try {
        if (a.kind == "xi1") {
            const double y = need(a.y, "--y", a.kind), c = need(a.c, "--c", a.kind);
            const int d = need(a.d, "--d", a.kind);
            r = rate_xi1(y, c, d);
            query.update({{"y", y}, {"c", c}, {"d", d}});
        } else if (a.kind == "eta1") {
            const double c = need(a.c, "--c", a.kind);
            const int d = need(a.d, "--d", a.kind);
            r = rate_eta1(degree_distribution_from_json(json_argument(need(a.delta, "--delta", a.kind))), c, d);
            query.update({{"c", c}, {"d", d}});
        } else {
            const json cfg = effective_config(copts);
            const ModelParameters params = model_from_config(cfg);
            query["model"] = cfg.at("model");
            if (a.kind == "zeta") {
                const double x = need(a.x, "--x", a.kind);
                r = rate_zeta(x, params, a.seed);
                query["x"] = x;
            } else if (a.kind == "I") {
                r = rate_I(colour_measure_from_json(json_argument(need(a.omega, "--omega", a.kind))),
                           pair_measure_from_json(json_argument(need(a.varpi, "--varpi", a.kind))), params);
            } else {
                r = rate_J(pair_measure_from_json(json_argument(need(a.varpi, "--varpi", a.kind))),
                           neighbourhood_measure_from_json(json_argument(need(a.mu, "--mu", a.kind))), params);
            }
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    json doc = {{"query", query}, {"result", to_json(r)}, {"metadata", metadata()}};
    emit(doc, out);
    return kExitOk;
}

/// Flattens a suite's tables into one CSV: nested "rows" arrays are expanded
/// with their parent's scalar fields prepended; non-scalar fields are dropped.
std::string summary_csv(const json& data) {
    std::vector<json> rows;
    const auto scalars = [](const json& obj) {
        json out = json::object();
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!it.value().is_structured()) out[it.key()] = it.value();
        return out;
    };
    const auto collect = [&](const json& item) {
        if (item.is_object() && item.contains("rows") && item.at("rows").is_array()) {
            const json parent = scalars(item);
            for (const auto& r : item.at("rows")) {
                json row = parent;
                row.update(scalars(r));
                rows.push_back(row);
            }
        } else if (item.is_object()) {
            rows.push_back(scalars(item));
        }
    };
    if (data.is_array())
        for (const auto& item : data) collect(item);
    else
        collect(data);

    std::vector<std::string> header;
    for (const auto& r : rows)
        for (auto it = r.begin(); it != r.end(); ++it)
            if (std::find(header.begin(), header.end(), it.key()) == header.end()) header.push_back(it.key());
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out << ',';
            if (!r.contains(header[i])) continue;
            const json& v = r.at(header[i]);
            out << (v.is_string() ? v.get<std::string>() : v.dump());
        }
        out << '\n';
    }
    return out.str();
}

int cmd_verify(const ConfigOptions& copts, const std::string& suite, const std::string& out,
               const std::string& csv_prefix) {
    const auto& names = verify_suites();
    if (std::find(names.begin(), names.end(), suite) == names.end())
        throw ConfigError("unknown verify suite '" + suite + "'");
    const json cfg = effective_config(copts);
    VerifyReport rep;
    try {
        rep = run_verify(suite, cfg);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
    json doc = to_json(rep);
    doc["config"] = cfg;
    doc["metadata"] = metadata();
    emit(doc, out);
    if (!csv_prefix.empty()) write_text_file(csv_prefix + "_summary.csv", summary_csv(rep.data));
    for (const auto& c : rep.checks) std::cerr << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << '\n';
    return rep.passed() ? kExitOk : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coloured random geometric graphs: sampling, empirical measures, rate functions, Monte Carlo checks"};
    app.require_subcommand(1);

    ConfigOptions gen_cfg, rate_cfg, verify_cfg;
    std::string gen_out, gen_edges;
    auto* gen = app.add_subcommand("generate", "Sample a graph and write it as JSON");
    add_config_options(gen, gen_cfg);
    gen->add_option("--out", gen_out, "Output sample JSON")->required();
    gen->add_option("--edge-list", gen_edges, "Also write an 'i j' edge list");

    std::string sample_path, measure_out;
    auto* measure = app.add_subcommand("measure", "Empirical measures L1, L2, M, D of a sample");
    measure->add_option("sample", sample_path, "Sample JSON written by generate")->required();
    measure->add_option("--out", measure_out, "Output file (default stdout)");

    RateArgs rargs;
    std::string rate_out;
    auto* rate = app.add_subcommand("rate", "Evaluate a rate function");
    rate->add_option("kind", rargs.kind, "J, I, eta1, xi1 or zeta")
        ->required()
        ->check(CLI::IsMember({"J", "I", "eta1", "xi1", "zeta"}));
    add_config_options(rate, rate_cfg);
    rate->add_option("--varpi", rargs.varpi, "Pair measure (inline JSON or @file)");
    rate->add_option("--mu", rargs.mu, "Neighbourhood measure (inline JSON or @file)");
    rate->add_option("--omega", rargs.omega, "Colour measure (inline JSON or @file)");
    rate->add_option("--delta", rargs.delta, "Degree distribution (inline JSON or @file)");
    rate->add_option("--x", rargs.x, "Edges per vertex (zeta)");
    rate->add_option("--y", rargs.y, "Isolated fraction (xi1)");
    rate->add_option("--c", rargs.c, "Uncoloured kernel constant (eta1, xi1)");
    rate->add_option("--d", rargs.d, "Dimension (eta1, xi1)");
    rate->add_option("--seed", rargs.seed, "Restart seed for the variational solvers");
    rate->add_option("--out", rate_out, "Output file (default stdout)");

    std::string suite, verify_out, csv_prefix;
    auto* verify = app.add_subcommand("verify", "Run a verification suite; exit 3 if any check fails");
    verify->add_option("suite", suite, "typical, contraction, euler, tail-bound or ldp-slope")->required();
    add_config_options(verify, verify_cfg);
    verify->add_option("--out", verify_out, "Report JSON (default stdout)");
    verify->add_option("--csv", csv_prefix, "Also write <prefix>_summary.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) return cmd_generate(gen_cfg, gen_out, gen_edges);
        if (*measure) return cmd_measure(sample_path, measure_out);
        if (*rate) return cmd_rate(rate_cfg, rargs, rate_out);
        if (*verify) return cmd_verify(verify_cfg, suite, verify_out, csv_prefix);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SampleError& e) {
        std::cerr << "assertion failed: " << e.what() << '\n';
        return kExitAssertion;
    } catch (const AssertionFailure& e) {
        std::cerr << "assertion failed: " << e.what() << '\n';
        return kExitAssertion;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const json::exception& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
