#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bvwave/control_ops.hpp"
#include "bvwave/exact_control.hpp"

namespace bvwave {

/// Active sets of the Newton derivative: indicator(i, n) = 1 where
/// |psi_i(t_n)| > alpha_i (strict), 0 elsewhere.
struct ActiveSets {
    matrix_t indicator;  ///< (m x nt), entries exactly 0 or 1

    static ActiveSets from_adjoint(const AdjointFunctional& adj, const vector_t& alpha);
    index_t count() const { return static_cast<index_t>(indicator.sum()); }
};

/// Generalized derivative application, matrix-free:
/// first block  h + X . (1/gamma)(B* L* L B)_1(h, k)
/// second block (kappa/gamma) k + (1/gamma)(B* L* L B)_2(h, k)
/// with two wave solves per application.
Residual apply_DF(const ProblemData& data, const FemOperators& ops,
                  const RegularizationParams& params, scalar_t gamma, const ActiveSets& active,
                  const DerivativeControl& hk);

struct KrylovResult {
    vector_t x;
    int iterations = 0;
    bool converged = false;
    scalar_t rel_residual = 0.0;
};

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations.
/// Returns the best iterate even on non-convergence.
KrylovResult gmres(const std::function<vector_t(const vector_t&)>& op, const vector_t& rhs,
                   scalar_t tol, int restart, int max_iters);

/// Flattening between (m x nt, m) control shapes and Krylov vectors.
vector_t flatten(const matrix_t& v, const vector_t& c);
DerivativeControl unflatten(const vector_t& x, int m, int nt);

/// Per-gamma solve record.
struct SolveReport {
    scalar_t gamma = 0.0;
    int newton_iters = 0;
    std::vector<scalar_t> residual_norms;  ///< residual before each step, then final
    std::vector<int> krylov_iters;
    bool converged = false;
    scalar_t value = 0.0;  ///< J^1_gamma at the returned iterate
    CostBreakdown cost;
    scalar_t tv_of_v = 0.0;  ///< trapezoidal L1 mass of v (unweighted by alpha)
    scalar_t wall_seconds = 0.0;
    std::string message;
};

/// Semi-smooth Newton iteration on F_gamma = 0 with full steps. Each step
/// recomputes the active sets from the current iterate and solves
/// DF delta = -F by GMRES; on inner stagnation one retry with a 10x looser
/// Krylov tolerance is attempted before flagging the report.
std::pair<DerivativeControl, SolveReport> semismooth_newton(const ProblemData& data,
                                                            const FemOperators& ops,
                                                            const RegularizationParams& params,
                                                            scalar_t gamma,
                                                            const DerivativeControl& start);

struct PathResult {
    DerivativeControl control;
    std::vector<SolveReport> stages;
    bool completed = false;
};

/// BV path following: solve at gamma_0, gamma_1 = nu gamma_0, ... while
/// gamma_k >= tol_gamma (up to a relative fuzz of 1e-10 so that schedules
/// like 1, 0.1, ..., 1e-8 include their final stage), warm-starting each
/// Newton solve from the previous solution. Aborts on inner failure and
/// returns the partial stage reports.
PathResult path_following(const ProblemData& data, const FemOperators& ops,
                          const RegularizationParams& params, const DerivativeControl& start);

/// Optional ground truth for diagnostics of manufactured problems.
struct ExactReference {
    const ExactControl* control = nullptr;
    const matrix_t* adjoint = nullptr;  ///< (m x nt) samples of p_1
    std::optional<scalar_t> cost;       ///< discrete J at the exact control
};

/// Contiguous run of time nodes where |v| exceeds a relative threshold.
struct JumpCluster {
    int first_node = 0;
    int last_node = 0;
    scalar_t mass = 0.0;      ///< trapezoidal integral of v over the cluster
    scalar_t centroid = 0.0;  ///< |v|-weighted mean time
};

std::vector<JumpCluster> find_jump_clusters(const Grid& grid,
                                            const Eigen::Ref<const vector_t>& v_row,
                                            scalar_t rel_threshold = 0.05, int max_gap = 2);

struct DiagnosticsReport {
    std::vector<scalar_t> gammas;          ///< ascending
    std::vector<scalar_t> values;          ///< value function samples, same order
    bool value_monotone = false;           ///< nondecreasing in gamma
    scalar_t max_concavity_violation = 0.0;
    std::vector<scalar_t> closed_form_value_slope;  ///< 1/2 sum ||v||^2 (+ kappa' term)

    std::vector<scalar_t> cost_gaps;  ///< J^1_gamma - J(exact), when the exact cost is known
    scalar_t fitted_gap_slope = 0.0;  ///< C with gap <= C gamma, fitted on the smallest gammas
    bool gap_bounded = false;

    vector_t sparsity_mass;     ///< trapezoidal mass of |v_i| on {|psi_i| < alpha_i - delta}
    vector_t sup_psi_gap;       ///< ||psi_i||_inf - alpha_i
    vector_t sign_separation;   ///< distance between positive and negative supports of v_i
    scalar_t l1_error_vs_exact = std::numeric_limits<scalar_t>::quiet_NaN();
    scalar_t tv_gap_vs_exact = std::numeric_limits<scalar_t>::quiet_NaN();
};

/// Report-only evaluation of the converged path run.
DiagnosticsReport diagnostics(const ProblemData& data, const FemOperators& ops,
                              const RegularizationParams& params,
                              const std::vector<SolveReport>& reports,
                              const DerivativeControl& dc,
                              const ExactReference& exact = {});

}  // namespace bvwave
