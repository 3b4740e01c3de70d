#include "bvwave/control_ops.hpp"

#include <stdexcept>

#include "bvwave/exact_control.hpp"

namespace bvwave {

matrix_t cumulative_control(const Grid& grid, const DerivativeControl& dc) {
    const int m = dc.num_components();
    if (dc.time_nodes() != grid.nt)
        throw std::invalid_argument("cumulative_control: time node mismatch");
    matrix_t u(m, grid.nt);
    u.col(0) = dc.c;
    for (int n = 1; n < grid.nt; ++n)
        u.col(n) = u.col(n - 1) + 0.5 * grid.tau * (dc.v.col(n - 1) + dc.v.col(n));
    return u;
}

SpaceTimeField apply_B(const ProblemData& data, const DerivativeControl& dc) {
    if (dc.num_components() != data.m) throw std::invalid_argument("apply_B: component mismatch");
    const matrix_t u = cumulative_control(data.grid, dc);
    return SpaceTimeField(data.g * u);
}

AdjointFunctional apply_Bstar(const ProblemData& data, const FemOperators& ops,
                              const SpaceTimeField& phi) {
    check_shape(phi, data.grid);
    const int nt = data.grid.nt;
    const scalar_t tau = data.grid.tau;

    // q_j(n) = g_j^T M phi^n
    const matrix_t q = data.g.transpose() * (ops.mass_full * phi.values);

    AdjointFunctional adj;
    adj.psi.resize(data.m, nt);
    adj.psi0.resize(data.m);
    for (int j = 0; j < data.m; ++j) {
        // Trapezoidal tail integrals T_k = int_{t_k}^{T} q.
        vector_t tail(nt);
        tail(nt - 1) = 0.0;
        for (int k = nt - 2; k >= 0; --k)
            tail(k) = tail(k + 1) + 0.5 * tau * (q(j, k) + q(j, k + 1));
        adj.psi0(j) = tail(0);
        adj.psi.row(j).segment(1, nt - 2) = tail.segment(1, nt - 2).transpose();
        // Endpoint samples carry the trapezoidal endpoint weights; this makes
        // apply_Bstar the exact transpose of apply_B in the discrete pairing.
        adj.psi(j, 0) = tail(0) - 0.5 * tau * q(j, 0);
        adj.psi(j, nt - 1) = 0.5 * tau * q(j, nt - 1);
    }
    return adj;
}

SpaceTimeField apply_S(const ProblemData& data, const FemOperators& ops,
                       const DerivativeControl& dc) {
    SpaceTimeField y = apply_L(ops, apply_B(data, dc));
    y.values += apply_Q(ops, data.y0, data.y1).values;
    return y;
}

SpaceTimeField forced_response(const ProblemData& data, const FemOperators& ops,
                               const DerivativeControl& dc) {
    return apply_L(ops, apply_B(data, dc));
}

AdjointFunctional adjoint_from_misfit(const ProblemData& data, const FemOperators& ops,
                                      const SpaceTimeField& misfit) {
    return apply_Bstar(data, ops, apply_Lstar(ops, misfit));
}

AdjointFunctional compute_adjoint_functional(const ProblemData& data, const FemOperators& ops,
                                             const DerivativeControl& dc) {
    SpaceTimeField misfit = apply_S(data, ops, dc);
    misfit.values -= data.y_d.values;
    return adjoint_from_misfit(data, ops, misfit);
}

matrix_t prox_l1(const matrix_t& pfrak, const vector_t& alpha, scalar_t gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("prox: gamma must be positive");
    if (alpha.size() != pfrak.rows()) throw std::invalid_argument("prox: alpha length mismatch");
    if ((alpha.array() <= 0.0).any()) throw std::invalid_argument("prox: alpha must be positive");
    matrix_t out(pfrak.rows(), pfrak.cols());
    for (index_t j = 0; j < pfrak.rows(); ++j) {
        const scalar_t thr = alpha(j) / gamma;
        for (index_t n = 0; n < pfrak.cols(); ++n) out(j, n) = soft_threshold(pfrak(j, n), thr);
    }
    return out;
}

matrix_t prox_of_adjoint(const AdjointFunctional& adj, const vector_t& alpha, scalar_t gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("prox: gamma must be positive");
    return prox_l1((-1.0 / gamma) * adj.psi, alpha, gamma);
}

Residual residual_from_adjoint(const AdjointFunctional& adj, const DerivativeControl& dc,
                               const vector_t& alpha, scalar_t kappa_val, scalar_t gamma) {
    Residual r;
    r.first = dc.v - prox_of_adjoint(adj, alpha, gamma);
    r.second = (kappa_val / gamma) * dc.c + adj.psi0 / gamma;
    return r;
}

Residual residual_F(const ProblemData& data, const FemOperators& ops,
                    const RegularizationParams& params, scalar_t gamma,
                    const DerivativeControl& dc) {
    if (!(gamma > 0.0)) throw std::invalid_argument("residual_F: gamma must be positive");
    const AdjointFunctional adj = compute_adjoint_functional(data, ops, dc);
    return residual_from_adjoint(adj, dc, data.alpha, kappa(params, gamma), gamma);
}

scalar_t residual_norm(const Grid& grid, const Residual& r) {
    const vector_t wq = time_quad_weights(grid);
    scalar_t s = r.second.squaredNorm();
    for (index_t j = 0; j < r.first.rows(); ++j)
        s += (r.first.row(j).transpose().array().square() * wq.array()).sum();
    return std::sqrt(s);
}

matrix_t gram_matrix(const ProblemData& data, const FemOperators& ops) {
    const int nt = data.grid.nt;
    std::vector<SpaceTimeField> lg;
    lg.reserve(data.m);
    for (int j = 0; j < data.m; ++j) {
        SpaceTimeField f(data.grid);
        f.values = data.g.col(j).replicate(1, nt);
        lg.push_back(apply_L(ops, f));
    }
    matrix_t G(data.m, data.m);
    for (int i = 0; i < data.m; ++i)
        for (int j = i; j < data.m; ++j) {
            G(i, j) = spacetime_inner(ops, lg[i], lg[j]);
            G(j, i) = G(i, j);
        }
    return G;
}

CostBreakdown cost_from_misfit(const ProblemData& data, const FemOperators& ops,
                               const SpaceTimeField& misfit, const DerivativeControl& dc,
                               scalar_t gamma, scalar_t kappa_val) {
    const vector_t wq = time_quad_weights(data.grid);
    CostBreakdown cost;
    cost.tracking = 0.5 * spacetime_inner(ops, misfit, misfit);
    for (int j = 0; j < data.m; ++j) {
        const auto vj = dc.v.row(j).transpose().array();
        cost.tv_l1 += data.alpha(j) * (vj.abs() * wq.array()).sum();
        cost.h1_term += 0.5 * gamma * (vj.square() * wq.array()).sum();
    }
    cost.offset_term = 0.5 * kappa_val * dc.c.squaredNorm();
    return cost;
}

CostBreakdown cost_J(const ProblemData& data, const FemOperators& ops,
                     const DerivativeControl& dc) {
    SpaceTimeField misfit = apply_S(data, ops, dc);
    misfit.values -= data.y_d.values;
    return cost_from_misfit(data, ops, misfit, dc, 0.0, 0.0);
}

CostBreakdown cost_J(const ProblemData& data, const FemOperators& ops, const ExactControl& ec) {
    const matrix_t u = evaluate_exact_control(ec, data.grid);
    SpaceTimeField forcing(data.g * u);
    SpaceTimeField misfit = solve_wave(ops, forcing, data.y0, data.y1);
    misfit.values -= data.y_d.values;
    CostBreakdown cost;
    cost.tracking = 0.5 * spacetime_inner(ops, misfit, misfit);
    cost.tv_l1 = data.alpha.dot(total_variation(ec));
    return cost;
}

CostBreakdown cost_Jgamma(const ProblemData& data, const FemOperators& ops,
                          const RegularizationParams& params, scalar_t gamma,
                          const DerivativeControl& dc) {
    SpaceTimeField misfit = apply_S(data, ops, dc);
    misfit.values -= data.y_d.values;
    return cost_from_misfit(data, ops, misfit, dc, gamma, kappa(params, gamma));
}

}  // namespace bvwave
