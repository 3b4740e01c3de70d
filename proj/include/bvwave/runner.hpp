#pragma once

#include "bvwave/config.hpp"
#include "bvwave/ssn.hpp"

namespace bvwave {

struct RunArtifacts {
    PathResult path;
    DiagnosticsReport diag;
    std::string out_dir;
};

/// Build the configured problem, run the path-following solver, and write the
/// CSV artifacts (control, derivative, adjoint, newton_history, value_function,
/// diagnostics) plus run_summary.txt into the output directory.
/// Returns the process exit status: 0 on success, 3 on solver failure
/// (partial artifacts are still written and flagged in the summary).
int run(const RunConfig& config, RunArtifacts* out = nullptr);

}  // namespace bvwave
