#pragma once

#include <functional>
#include <map>
#include <string>

#include "bvwave/control_ops.hpp"
#include "bvwave/exact_control.hpp"

namespace bvwave {

/// exp(-1/(1-u^2)) on (-1,1), zero outside, with first and second derivatives.
scalar_t bump(scalar_t u);
scalar_t bump_d1(scalar_t u);
scalar_t bump_d2(scalar_t u);

/// Load-consistent nodal weight of the interval indicator 1_{[a,b]} at a node
/// centered at `center` with mesh width h: the mass fraction of the node's hat
/// function covered by [a, b]. Equals 1 strictly inside, 1/2 when an endpoint
/// sits exactly on the node, 0 outside. Sampling box indicators this way keeps
/// the discrete pairing with states second-order accurate.
scalar_t box_node_weight(scalar_t center, scalar_t h, scalar_t a, scalar_t b);

/// Adaptive Simpson quadrature of f over [a, b].
scalar_t integrate(const std::function<scalar_t(scalar_t)>& f, scalar_t a, scalar_t b,
                   scalar_t tol = 1e-12);

/// Normalized bump mollifier of width eps with closed-form derivatives and a
/// numerically integrated antiderivative (adaptive quadrature, not FFT).
class Mollifier {
  public:
    explicit Mollifier(scalar_t eps);

    scalar_t eps() const { return eps_; }
    scalar_t value(scalar_t x) const;
    scalar_t d1(scalar_t x) const;
    scalar_t d2(scalar_t x) const;
    /// int_{-eps}^{x} of the mollifier; 0 below the support, 1 above.
    scalar_t cdf(scalar_t x) const;

  private:
    scalar_t eps_;
    scalar_t norm_;  // 1 / int bump
};

struct SignedInterval {
    scalar_t a = 0.0;
    scalar_t b = 0.0;
    int sign = 1;
};

/// Convolution of the mollifier with a sum of signed indicators, evaluated at
/// t. Equals sign_i exactly on the eps-shrunk interior of interval i. Throws
/// when the intervals are not eps-separated from each other and from {0, T}.
scalar_t mollified_plateau(scalar_t t, scalar_t eps, const std::vector<SignedInterval>& intervals,
                           scalar_t T);

/// Analytically solvable test problem.
struct ManufacturedProblem {
    ProblemData data;
    ExactControl exact_control;
    matrix_t exact_adjoint;  ///< (m x nt) samples of p_1 on the time grid
    std::optional<scalar_t> exact_cost;           ///< closed-form J at the optimum
    std::optional<scalar_t> exact_cost_discrete;  ///< discrete J at the sampled optimum
    std::map<std::string, scalar_t> metadata;
};

/// Generic recipe: adjoint p_1,i(t) = tail_i(t) * z_i with z_i = int f g_i dx,
/// state phi(t, x) = h(t) f(x), wave residual f h'' - h (Laplacian f), desired
/// state y_d = S(u_exact) - residual. The caller supplies nodal samples of f
/// and Laplacian f, time callables h and h'', the tail integral of h, and an
/// exact control supported where |tail * z| = alpha.
ManufacturedProblem build_from_recipe(
    const Grid& grid, matrix_t g, vector_t alpha, const vector_t& f_nodes,
    const vector_t& lap_f_nodes, const std::function<scalar_t(scalar_t)>& h,
    const std::function<scalar_t(scalar_t)>& h_dd, const std::function<scalar_t(scalar_t)>& h_tail,
    ExactControl exact);

/// Finitely-many-jumps example on Omega = (-1,1)^d, T = 2: g the indicator of
/// [-1/2, 1/2]^d, l jumps at (1+2n)/l with alternating unit weights, adjoint
/// p_1(t) = (4 beta / (3 pi l)) (-sin^3(l pi t / 2)) (2 sqrt 2 / pi)^d with
/// beta chosen so that ||p_1||_inf = alpha. Carries the closed-form cost.
ManufacturedProblem build_dirac_example(int dim, int l, scalar_t alpha, const Grid& grid);

/// Devil's-staircase example on a square containing [-1,1]^2 with T = 5:
/// g = 10 indicator of [-1/2,1/2]^2, plateau profile from the mollified signed
/// indicators of [1/2, 2] and [3, 4.5] with eps = 0.28, control rising
/// 0 -> 5 over [0.8, 2.14] and falling back over [2.85, 4.2] along Cantor
/// functions, alpha = |int f g dx|.
ManufacturedProblem build_cantor_example(const Grid& grid);

struct VerifyLevel {
    int nx = 0;
    int nt = 0;
    scalar_t max_adjoint_error = 0.0;      ///< max_n |psi(t_n) - p_1(t_n)| over components
    scalar_t sup_psi_minus_alpha = 0.0;    ///< max_i (||psi_i||_inf - alpha_i)
    scalar_t deadzone_residual = 0.0;      ///< ||F_gamma first block||_inf off the jump set, gamma = 1e-3
    scalar_t second_block_residual = 0.0;  ///< |kappa/gamma c + psi0/gamma|_inf, gamma = 1e-3
};

struct VerifyReport {
    std::vector<VerifyLevel> levels;
    std::vector<scalar_t> adjoint_rates;  ///< log2(e_j / e_{j+1})
};

/// Rebuild the problem on dyadically refined grids and check that the
/// discrete adjoint functional at the exact control approaches the
/// closed-form adjoint at second order.
VerifyReport verify_manufactured(const std::function<ManufacturedProblem(const Grid&)>& builder,
                                 const Grid& base, int levels);

}  // namespace bvwave
