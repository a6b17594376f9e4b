// The gkslcp command-line surface
//
// Exit codes: 0 success, 1 violation found (a scientific result), 2 configuration or input error,
// 3 solver failure. Errors are written to `err` as a single JSON object.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gkslcp/operator_core.hpp"

namespace gkslcp {

enum ExitCode : int { kExitOk = 0, kExitViolation = 1, kExitConfig = 2, kExitSolver = 3 };

/// Resolved run configuration. Values come from defaults, then --config, then explicit flags.
struct RunConfig {
    std::optional<std::string> kernel;
    std::optional<std::string> trajectory;
    std::optional<std::string> w;         // operator-function document for counterexample
    std::optional<std::string> redfield;  // Redfield model document for gscan
    double horizon{2.0};
    int steps{400};
    std::string family{"local-full"};
    std::string pattern{"local"};
    int order{8};
    double eps_cp{1e-8};
    std::uint64_t seed{12345};
    int samples{1000};
    std::string out{"."};
    std::vector<double> g_list;
};

/// Everything except the output directory, which does not influence results.
json resolved_config_json(const std::string& command, const RunConfig& c);

/// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

/// Parses "0.05,0.1,0.2". Throws InputError("g_list") on malformed or empty input.
std::vector<double> parse_g_list(const std::string& csv);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gkslcp
