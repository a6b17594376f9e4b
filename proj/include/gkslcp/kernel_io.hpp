// JSON kernel documents
//
// {
//   "dim": 2,
//   "coupling_g": 1.0,
//   "hermitian": [ {"profile": {...}, "operator": {"dim": 2, "data": [[re, im], ...]}}, ... ],
//   "lindblad":  [ [ term, ... ], ... ]          one inner list per Lindblad operator
// }
//
// "dim" is required; the other keys default to 1.0 / [] / []. Unknown keys are rejected.

#pragma once

#include <string>

#include "gkslcp/kernel_model.hpp"

namespace gkslcp {

GKSLKernel kernel_from_json(const json& doc);
json kernel_to_json(const GKSLKernel& k);

/// Parses and validates a kernel document. Parse errors are reported with their line number.
GKSLKernel load_kernel_spec(const std::string& text);
std::string save_kernel_spec(const GKSLKernel& k);

GKSLKernel load_kernel_file(const std::string& path);

/// Stand-alone operator function document: {"dim": d, "terms": [term, ...]}.
TwoTimeOperatorFunction operator_function_from_json(const json& doc);
json operator_function_to_json(const TwoTimeOperatorFunction& f);

/// Parses JSON text, reporting syntax errors as InputError("line N", ...).
json parse_json_text(const std::string& text);
/// Reads a whole file; InputError(field) when it cannot be opened.
std::string read_text_file(const std::string& path, const std::string& field);

/// Tolerance on max|H' - H'^dagger| when validating the declared-Hermitian part.
inline constexpr double kHermitianTolerance = 1e-10;

}  // namespace gkslcp
