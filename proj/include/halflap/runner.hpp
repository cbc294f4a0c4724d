#pragma once

#include <string>
#include <vector>

namespace halflap {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitPropertyFailure = 4;

/// Batch front door. args = argv without the program name:
///   <subcommand> [--config PATH] [--out DIR] [--seed N] [--threads N]
/// Subcommands: layer, minimize, saddle, energy-scan, hhalf, symmetry,
/// extend, selftest. Writes CSVs/reports/field dumps under --out. Returns
/// 0 on success, 2 on validation errors, 3 on solver non-convergence, 4 on
/// property-check failure; one machine-parsable reason line on stderr.
int run_cli(const std::vector<std::string>& args);

} // namespace halflap
