#pragma once

#include "bvwave/fem.hpp"
#include "bvwave/problem.hpp"

namespace bvwave {

struct ExactControl;

/// Reconstruct u from (v, c): u_j(t_0) = c_j and cumulative trapezoidal
/// accumulation u_j(t_n) = u_j(t_{n-1}) + tau/2 (v_j(t_{n-1}) + v_j(t_n)).
matrix_t cumulative_control(const Grid& grid, const DerivativeControl& dc);

/// B: (v, c) -> forcing field sum_j u_j(t) g_j(x).
SpaceTimeField apply_B(const ProblemData& data, const DerivativeControl& dc);

/// Adjoint functional samples. psi holds the first block of B* applied to the
/// adjoint state (per component, per time node); psi0 holds the second block,
/// the full space-time integral. psi is the exact discrete adjoint of the
/// cumulative rule in apply_B: at interior time nodes it equals the reverse
/// cumulative trapezoidal tail integral; the two endpoint samples carry the
/// trapezoidal endpoint weights (psi(T) = tau/2 q(T) and
/// psi(0) = psi0 - tau/2 q(0), both vanishing under refinement).
struct AdjointFunctional {
    matrix_t psi;   ///< (m x nt)
    vector_t psi0;  ///< length m
};

/// B*: state-like field -> (per-component time array, per-component real).
/// Exact adjoint of apply_B in the trapezoidal pairing: for all (v,c), phi,
/// <B(v,c), phi>_h = sum_j <v_j, psi_j>_{L2,h} + c . psi0 to machine precision.
AdjointFunctional apply_Bstar(const ProblemData& data, const FemOperators& ops,
                              const SpaceTimeField& phi);

/// S: (v, c) -> L(B(v,c)) + Q(y0, y1).
SpaceTimeField apply_S(const ProblemData& data, const FemOperators& ops,
                       const DerivativeControl& dc);

/// psi = B*(L*(S(v,c) - y_d)).
AdjointFunctional compute_adjoint_functional(const ProblemData& data, const FemOperators& ops,
                                             const DerivativeControl& dc);

/// Same, starting from a precomputed misfit field S(v,c) - y_d.
AdjointFunctional adjoint_from_misfit(const ProblemData& data, const FemOperators& ops,
                                      const SpaceTimeField& misfit);

/// Soft threshold with dead zone: max(0, p - thr) + min(0, p + thr).
inline scalar_t soft_threshold(scalar_t p, scalar_t thr) {
    return std::max(0.0, p - thr) + std::min(0.0, p + thr);
}

/// Componentwise prox of the weighted L1 norm at argument pfrak (m x nt):
/// row i is soft-thresholded with dead zone alpha_i / gamma.
/// Throws std::invalid_argument for gamma <= 0 or nonpositive alpha.
matrix_t prox_l1(const matrix_t& pfrak, const vector_t& alpha, scalar_t gamma);

/// Prox applied to the scaled adjoint: pfrak = -psi / gamma.
matrix_t prox_of_adjoint(const AdjointFunctional& adj, const vector_t& alpha, scalar_t gamma);

/// Residual of the first-order system.
struct Residual {
    matrix_t first;   ///< (m x nt): v - prox(-psi/gamma)
    vector_t second;  ///< length m: kappa/gamma c + psi0/gamma
};

Residual residual_from_adjoint(const AdjointFunctional& adj, const DerivativeControl& dc,
                               const vector_t& alpha, scalar_t kappa_val, scalar_t gamma);

/// F_gamma(v, c); recomputes the adjoint functional from scratch.
Residual residual_F(const ProblemData& data, const FemOperators& ops,
                    const RegularizationParams& params, scalar_t gamma,
                    const DerivativeControl& dc);

/// L2(I)^m x R^m norm with trapezoidal time quadrature.
scalar_t residual_norm(const Grid& grid, const Residual& r);

/// Gram matrix G_ij = <L g_i, L g_j> in the discrete space-time inner product,
/// with g_j extended constantly in time. Symmetric positive definite.
matrix_t gram_matrix(const ProblemData& data, const FemOperators& ops);

/// Cost pieces. tracking = 1/2 ||S - y_d||^2, tv_l1 = sum_j alpha_j ||v_j||_{L1},
/// h1_term = gamma/2 sum_j ||v_j||^2, offset_term = kappa/2 ||c||^2.
struct CostBreakdown {
    scalar_t tracking = 0.0;
    scalar_t tv_l1 = 0.0;
    scalar_t h1_term = 0.0;
    scalar_t offset_term = 0.0;

    scalar_t j_part() const { return tracking + tv_l1; }
    scalar_t total() const { return tracking + tv_l1 + h1_term + offset_term; }
};

CostBreakdown cost_from_misfit(const ProblemData& data, const FemOperators& ops,
                               const SpaceTimeField& misfit, const DerivativeControl& dc,
                               scalar_t gamma, scalar_t kappa_val);

/// J(v, c): tracking plus the alpha-weighted L1 norm of v (TV surrogate).
CostBreakdown cost_J(const ProblemData& data, const FemOperators& ops,
                     const DerivativeControl& dc);

/// J at a symbolic control: tracking at the sampled control plus
/// alpha-weighted exact total variation.
CostBreakdown cost_J(const ProblemData& data, const FemOperators& ops, const ExactControl& ec);

/// J^1_gamma(v, c) including the H1 and offset terms.
CostBreakdown cost_Jgamma(const ProblemData& data, const FemOperators& ops,
                          const RegularizationParams& params, scalar_t gamma,
                          const DerivativeControl& dc);

/// Forcing response L(B(v,c)) without the initial-data part.
SpaceTimeField forced_response(const ProblemData& data, const FemOperators& ops,
                               const DerivativeControl& dc);

}  // namespace bvwave
