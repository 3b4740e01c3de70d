#pragma once

#include <map>
#include <string>
#include <vector>

#include "bvwave/problem.hpp"

namespace bvwave {

enum class ProblemKind { dirac, cantor, custom };

/// One control component of a custom problem read from configuration.
struct CustomComponent {
    std::array<scalar_t, 3> g_lo{-0.5, -0.5, -0.5};
    std::array<scalar_t, 3> g_hi{0.5, 0.5, 0.5};
    scalar_t g_value = 1.0;
    std::vector<std::pair<scalar_t, scalar_t>> atoms;  ///< (location, weight)
    scalar_t offset = 0.0;
};

/// Validated run configuration. Grid bounds and horizon are fixed by the
/// problem for dirac and cantor; custom problems specify them explicitly.
struct RunConfig {
    ProblemKind problem = ProblemKind::dirac;

    int dim = 2;
    std::array<scalar_t, 3> lo{-1.0, -1.0, -1.0};
    std::array<scalar_t, 3> hi{1.0, 1.0, 1.0};
    std::array<int, 3> nx{0, 0, 0};
    int nt = 0;
    scalar_t T = 2.0;

    int l = 3;             ///< dirac jump count
    scalar_t alpha = 1.0;  ///< dirac weight

    std::vector<CustomComponent> components;  ///< custom problem
    vector_t custom_alpha;

    RegularizationParams path;

    std::string out_dir = "out";
    unsigned long seed = 0;  ///< for randomized property checks only

    Grid make_grid_checked() const;
};

/// Parse a flat key=value file ('#' comments, dotted sections) plus override
/// assignments, validate, and apply per-problem defaults. Unknown keys are
/// rejected; errors name the offending key.
RunConfig parse_config(ProblemKind kind, const std::string& config_path,
                       const std::vector<std::string>& overrides, const std::string& out_dir_flag);

/// Same, from an already-loaded key/value map.
RunConfig parse_config_map(ProblemKind kind, std::map<std::string, std::string> kv);

}  // namespace bvwave
