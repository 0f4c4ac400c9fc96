#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cgrg/io.hpp"

namespace cgrg {

struct VerifyCheck {
    std::string name;
    bool passed = false;
    json detail;
};

struct VerifyReport {
    std::string suite;
    std::vector<VerifyCheck> checks;
    json data;  // the underlying tables

    bool passed() const;
};

/// Names accepted by run_verify: typical, contraction, euler, tail-bound, ldp-slope.
const std::vector<std::string>& verify_suites();

/// Runs a named suite against an effective run configuration (see
/// default_run_config). Unknown suite names raise ConfigError.
///
/// ldp-slope always runs on the independent-edge version of the model,
/// because its planted-set importance weights are exact only there.
VerifyReport run_verify(std::string_view suite, const json& config);

json to_json(const VerifyReport& report);

}  // namespace cgrg
