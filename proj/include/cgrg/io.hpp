#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cgrg/graph_sample.hpp"
#include "cgrg/mc.hpp"
#include "cgrg/measures.hpp"
#include "cgrg/model.hpp"
#include "cgrg/rates.hpp"

namespace cgrg {

using json = nlohmann::ordered_json;

/// Invalid configuration or command-line values.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable files and documents that do not parse into the expected shape.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

/// Finite doubles as numbers; +inf, -inf and NaN as the strings "+inf", "-inf", "nan".
json extended_real(double x);
double parse_extended_real(const json& j);

json to_json(const ColourMeasure& m);
json to_json(const PairMeasure& m);
json to_json(const NeighbourhoodMeasure& m);
json to_json(const DegreeDistribution& m);
json to_json(const EmpiricalMeasures& m);

/// Accept either the object produced by to_json or a bare weight array
/// (nested rows for pair measures).
ColourMeasure colour_measure_from_json(const json& j);
PairMeasure pair_measure_from_json(const json& j);
NeighbourhoodMeasure neighbourhood_measure_from_json(const json& j);
DegreeDistribution degree_distribution_from_json(const json& j);

json to_json(const GraphSample& s);
/// Shape and type checks only; call validate_structure/validate_geometry for
/// the graph invariants.
GraphSample sample_from_json(const json& j);
/// One "i j" line per edge.
void write_edge_list(std::ostream& out, const GraphSample& s);

json to_json(const RateResult& r);
json to_json(const TypicalSummary& s);
json to_json(const TailEstimate& e);
json to_json(const std::vector<EulerRow>& rows);
json to_json(const TailBoundReport& r);

/// Replica table: n,replica,seed,value,log_weight,hit.
void write_replica_csv(std::ostream& out, const TailEstimate& e);
/// Summary table: one row per n.
void write_tail_summary_csv(std::ostream& out, const TailEstimate& e);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// The effective configuration with every default spelled out.
json default_run_config();

/// Overlays `user` on the defaults. Unknown keys at any level, a wrong
/// schema_version, or values of the wrong JSON type raise ConfigError.
json merge_run_config(const json& user);

/// Sets the dotted key (e.g. "model.d", "experiment.event.threshold") to
/// `value`, parsed as JSON when possible and as a string otherwise.
void apply_override(json& config, std::string_view dotted_key, std::string_view value);

ModelParameters model_from_config(const json& config);
ExperimentConfig experiment_from_config(const json& config);

}  // namespace cgrg
