#include "bvwave/ssn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace bvwave {

ActiveSets ActiveSets::from_adjoint(const AdjointFunctional& adj, const vector_t& alpha) {
    ActiveSets sets;
    sets.indicator.resize(adj.psi.rows(), adj.psi.cols());
    for (index_t j = 0; j < adj.psi.rows(); ++j)
        for (index_t n = 0; n < adj.psi.cols(); ++n)
            sets.indicator(j, n) = (std::abs(adj.psi(j, n)) > alpha(j)) ? 1.0 : 0.0;
    return sets;
}

Residual apply_DF(const ProblemData& data, const FemOperators& ops,
                  const RegularizationParams& params, scalar_t gamma, const ActiveSets& active,
                  const DerivativeControl& hk) {
    if (!(gamma > 0.0)) throw std::invalid_argument("apply_DF: gamma must be positive");
    const SpaceTimeField lb = apply_L(ops, apply_B(data, hk));
    const AdjointFunctional adj = apply_Bstar(data, ops, apply_Lstar(ops, lb));
    Residual out;
    out.first = hk.v + active.indicator.cwiseProduct(adj.psi) / gamma;
    out.second = (kappa(params, gamma) / gamma) * hk.c + adj.psi0 / gamma;
    return out;
}

vector_t flatten(const matrix_t& v, const vector_t& c) {
    const index_t m = v.rows(), nt = v.cols();
    vector_t x(m * nt + m);
    for (index_t j = 0; j < m; ++j) x.segment(j * nt, nt) = v.row(j).transpose();
    x.tail(m) = c;
    return x;
}

DerivativeControl unflatten(const vector_t& x, int m, int nt) {
    DerivativeControl dc(m, nt);
    for (int j = 0; j < m; ++j) dc.v.row(j) = x.segment(j * nt, nt).transpose();
    dc.c = x.tail(m);
    return dc;
}

KrylovResult gmres(const std::function<vector_t(const vector_t&)>& op, const vector_t& rhs,
                   scalar_t tol, int restart, int max_iters) {
    KrylovResult result;
    const index_t n = rhs.size();
    result.x = vector_t::Zero(n);
    const scalar_t bnorm = rhs.norm();
    if (bnorm == 0.0) {
        result.converged = true;
        return result;
    }

    vector_t r = rhs;
    while (result.iterations < max_iters) {
        scalar_t beta = r.norm();
        if (beta / bnorm <= tol) {
            result.converged = true;
            result.rel_residual = beta / bnorm;
            return result;
        }

        const int k_max = std::min(restart, max_iters - result.iterations);
        matrix_t V(n, k_max + 1);
        matrix_t H = matrix_t::Zero(k_max + 1, k_max);
        vector_t cs = vector_t::Zero(k_max), sn = vector_t::Zero(k_max);
        vector_t g = vector_t::Zero(k_max + 1);
        g(0) = beta;
        V.col(0) = r / beta;

        int k = 0;
        for (; k < k_max; ++k) {
            vector_t w = op(V.col(k));
            ++result.iterations;
            for (int i = 0; i <= k; ++i) {
                H(i, k) = V.col(i).dot(w);
                w -= H(i, k) * V.col(i);
            }
            H(k + 1, k) = w.norm();
            const bool breakdown = H(k + 1, k) <= 1e-300;
            if (!breakdown) V.col(k + 1) = w / H(k + 1, k);

            for (int i = 0; i < k; ++i) {
                const scalar_t tmp = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
                H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
                H(i, k) = tmp;
            }
            const scalar_t denom = std::hypot(H(k, k), H(k + 1, k));
            cs(k) = H(k, k) / denom;
            sn(k) = H(k + 1, k) / denom;
            H(k, k) = denom;
            H(k + 1, k) = 0.0;
            g(k + 1) = -sn(k) * g(k);
            g(k) = cs(k) * g(k);

            if (std::abs(g(k + 1)) / bnorm <= tol || breakdown) {
                ++k;
                break;
            }
        }

        // Solve the small triangular system and update.
        vector_t y(k);
        for (int i = k - 1; i >= 0; --i) {
            scalar_t s = g(i);
            for (int j = i + 1; j < k; ++j) s -= H(i, j) * y(j);
            y(i) = s / H(i, i);
        }
        for (int i = 0; i < k; ++i) result.x += y(i) * V.col(i);

        r = rhs - op(result.x);
        result.rel_residual = r.norm() / bnorm;
        if (result.rel_residual <= tol) {
            result.converged = true;
            return result;
        }
    }
    result.rel_residual = r.norm() / bnorm;
    result.converged = result.rel_residual <= tol;
    return result;
}

namespace {

std::pair<DerivativeControl, SolveReport> newton_impl(const ProblemData& data,
                                                      const FemOperators& ops,
                                                      const RegularizationParams& params,
                                                      scalar_t gamma,
                                                      const DerivativeControl& start,
                                                      const SpaceTimeField& d0) {
    const auto t_begin = std::chrono::steady_clock::now();
    const int m = data.m;
    const int nt = data.grid.nt;
    const scalar_t kap = kappa(params, gamma);

    DerivativeControl dc = start;
    SolveReport report;
    report.gamma = gamma;

    auto evaluate = [&](const DerivativeControl& x) {
        SpaceTimeField misfit = apply_L(ops, apply_B(data, x));
        misfit.values -= d0.values;
        AdjointFunctional adj = adjoint_from_misfit(data, ops, misfit);
        Residual res = residual_from_adjoint(adj, x, data.alpha, kap, gamma);
        return std::make_tuple(std::move(misfit), std::move(adj), std::move(res));
    };

    auto [misfit, adj, res] = evaluate(dc);
    scalar_t fnorm = residual_norm(data.grid, res);
    report.residual_norms.push_back(fnorm);

    while (fnorm > params.tol_newton && report.newton_iters < params.max_newton_iters) {
        const ActiveSets active = ActiveSets::from_adjoint(adj, data.alpha);
        auto df_op = [&](const vector_t& x) {
            const Residual dr = apply_DF(data, ops, params, gamma, active, unflatten(x, m, nt));
            return flatten(dr.first, dr.second);
        };
        const vector_t rhs = -flatten(res.first, res.second);

        KrylovResult kr = gmres(df_op, rhs, params.krylov_tol, params.krylov_restart,
                                params.krylov_max_iters);
        if (!kr.converged) {
            // One retry with a looser inner tolerance before giving up.
            kr = gmres(df_op, rhs, 10.0 * params.krylov_tol, params.krylov_restart,
                       params.krylov_max_iters);
        }
        report.krylov_iters.push_back(kr.iterations);
        if (!kr.converged) {
            report.message = "krylov stagnation at gamma=" + std::to_string(gamma);
            break;
        }

        const DerivativeControl delta = unflatten(kr.x, m, nt);
        dc.v += delta.v;
        dc.c += delta.c;
        ++report.newton_iters;

        std::tie(misfit, adj, res) = evaluate(dc);
        fnorm = residual_norm(data.grid, res);
        report.residual_norms.push_back(fnorm);
    }

    report.converged = fnorm <= params.tol_newton;
    if (!report.converged && report.message.empty())
        report.message = "newton iteration limit reached at gamma=" + std::to_string(gamma);

    report.cost = cost_from_misfit(data, ops, misfit, dc, gamma, kap);
    report.value = report.cost.total();
    const vector_t wq = time_quad_weights(data.grid);
    for (int j = 0; j < m; ++j)
        report.tv_of_v += (dc.v.row(j).transpose().array().abs() * wq.array()).sum();
    report.wall_seconds =
        std::chrono::duration<scalar_t>(std::chrono::steady_clock::now() - t_begin).count();
    return {std::move(dc), std::move(report)};
}

}  // namespace

std::pair<DerivativeControl, SolveReport> semismooth_newton(const ProblemData& data,
                                                            const FemOperators& ops,
                                                            const RegularizationParams& params,
                                                            scalar_t gamma,
                                                            const DerivativeControl& start) {
    if (!(gamma > 0.0)) throw std::invalid_argument("semismooth_newton: gamma must be positive");
    SpaceTimeField d0 = apply_Q(ops, data.y0, data.y1);
    d0.values = data.y_d.values - d0.values;
    return newton_impl(data, ops, params, gamma, start, d0);
}

PathResult path_following(const ProblemData& data, const FemOperators& ops,
                          const RegularizationParams& params, const DerivativeControl& start) {
    validate(params);
    SpaceTimeField d0 = apply_Q(ops, data.y0, data.y1);
    d0.values = data.y_d.values - d0.values;

    PathResult result;
    result.control = start;
    scalar_t gamma = params.gamma0;
    const scalar_t stop = params.tol_gamma * (1.0 - 1e-10);
    while (gamma >= stop) {
        auto [dc, report] = newton_impl(data, ops, params, gamma, result.control, d0);
        const bool ok = report.converged;
        result.control = std::move(dc);
        result.stages.push_back(std::move(report));
        if (!ok) return result;
        gamma *= params.nu;
    }
    result.completed = true;
    return result;
}

std::vector<JumpCluster> find_jump_clusters(const Grid& grid,
                                            const Eigen::Ref<const vector_t>& v_row,
                                            scalar_t rel_threshold, int max_gap) {
    const scalar_t vmax = v_row.cwiseAbs().maxCoeff();
    std::vector<JumpCluster> clusters;
    if (vmax == 0.0) return clusters;
    const scalar_t thr = rel_threshold * vmax;
    const vector_t wq = time_quad_weights(grid);

    int start = -1, last_above = -1;
    auto close_cluster = [&](int end) {
        JumpCluster cl;
        cl.first_node = start;
        cl.last_node = end;
        scalar_t absmass = 0.0;
        for (int n = start; n <= end; ++n) {
            cl.mass += wq(n) * v_row(n);
            absmass += wq(n) * std::abs(v_row(n));
            cl.centroid += wq(n) * std::abs(v_row(n)) * grid.time(n);
        }
        cl.centroid /= (absmass > 0.0 ? absmass : 1.0);
        clusters.push_back(cl);
    };

    for (int n = 0; n < grid.nt; ++n) {
        if (std::abs(v_row(n)) > thr) {
            if (start < 0)
                start = n;
            else if (n - last_above > max_gap + 1) {
                close_cluster(last_above);
                start = n;
            }
            last_above = n;
        }
    }
    if (start >= 0) close_cluster(last_above);
    return clusters;
}

DiagnosticsReport diagnostics(const ProblemData& data, const FemOperators& ops,
                              const RegularizationParams& params,
                              const std::vector<SolveReport>& reports,
                              const DerivativeControl& dc, const ExactReference& exact) {
    DiagnosticsReport diag;
    const vector_t wq = time_quad_weights(data.grid);

    // (i) value function samples in ascending gamma order with shape flags.
    std::vector<const SolveReport*> sorted;
    for (const auto& r : reports) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const SolveReport* a, const SolveReport* b) { return a->gamma < b->gamma; });
    for (const auto* r : sorted) {
        diag.gammas.push_back(r->gamma);
        diag.values.push_back(r->value);
    }
    diag.value_monotone = true;
    for (std::size_t i = 0; i + 1 < diag.values.size(); ++i)
        if (diag.values[i + 1] < diag.values[i] - 1e-9 * (1.0 + std::abs(diag.values[i])))
            diag.value_monotone = false;
    for (std::size_t i = 0; i + 2 < diag.values.size(); ++i) {
        const scalar_t s0 = (diag.values[i + 1] - diag.values[i]) / (diag.gammas[i + 1] - diag.gammas[i]);
        const scalar_t s1 =
            (diag.values[i + 2] - diag.values[i + 1]) / (diag.gammas[i + 2] - diag.gammas[i + 1]);
        diag.max_concavity_violation = std::max(diag.max_concavity_violation, s1 - s0);
    }

    // Closed-form derivative of the value function at each stage.
    // h1_term = gamma/2 sum ||v||^2 and offset_term = kappa/2 ||c||^2, so for
    // the power schedule kappa'(gamma) = kappa_exp * kappa / gamma.
    for (const auto* r : sorted)
        diag.closed_form_value_slope.push_back(
            r->cost.h1_term / r->gamma + params.kappa_exp * r->cost.offset_term / r->gamma);

    // (ii) cost gaps against the exact cost when available.
    if (exact.cost) {
        for (const auto* r : sorted) diag.cost_gaps.push_back(r->value - *exact.cost);
        const std::size_t n = diag.cost_gaps.size();
        scalar_t fitted = 0.0;
        for (std::size_t i = 0; i < std::min<std::size_t>(3, n); ++i)
            fitted = std::max(fitted, diag.cost_gaps[i] / diag.gammas[i]);
        diag.fitted_gap_slope = fitted;
        diag.gap_bounded = true;
        for (std::size_t i = 0; i < n; ++i) {
            const scalar_t slack = 1e-8 * (1.0 + std::abs(*exact.cost));
            if (diag.cost_gaps[i] < -slack || diag.cost_gaps[i] > fitted * diag.gammas[i] + slack)
                diag.gap_bounded = false;
        }
    }

    // (iii)-(v) pointwise structure of the final iterate.
    const AdjointFunctional adj = compute_adjoint_functional(data, ops, dc);
    diag.sparsity_mass = vector_t::Zero(data.m);
    diag.sup_psi_gap = vector_t::Zero(data.m);
    diag.sign_separation = vector_t::Zero(data.m);
    for (int j = 0; j < data.m; ++j) {
        const scalar_t delta = 0.05 * data.alpha(j);
        for (int n = 0; n < data.grid.nt; ++n)
            if (std::abs(adj.psi(j, n)) < data.alpha(j) - delta)
                diag.sparsity_mass(j) += wq(n) * std::abs(dc.v(j, n));
        diag.sup_psi_gap(j) = adj.psi.row(j).cwiseAbs().maxCoeff() - data.alpha(j);

        const scalar_t vmax = dc.v.row(j).cwiseAbs().maxCoeff();
        if (vmax > 0.0) {
            const scalar_t thr = 0.01 * vmax;
            scalar_t sep = std::numeric_limits<scalar_t>::infinity();
            for (int a = 0; a < data.grid.nt; ++a) {
                if (dc.v(j, a) <= thr) continue;
                for (int b = 0; b < data.grid.nt; ++b)
                    if (dc.v(j, b) < -thr)
                        sep = std::min(sep, std::abs(data.grid.time(a) - data.grid.time(b)));
            }
            diag.sign_separation(j) = std::isfinite(sep) ? sep : data.grid.T;
        } else {
            diag.sign_separation(j) = data.grid.T;
        }
    }

    // (vi) distance to the exact control.
    if (exact.control) {
        const matrix_t u_exact = evaluate_exact_control(*exact.control, data.grid);
        const matrix_t u = cumulative_control(data.grid, dc);
        scalar_t l1 = 0.0;
        for (int j = 0; j < data.m; ++j)
            l1 += ((u.row(j) - u_exact.row(j)).transpose().array().abs() * wq.array()).sum();
        diag.l1_error_vs_exact = l1;

        const vector_t tv_exact = total_variation(*exact.control);
        scalar_t tv_v = 0.0;
        for (int j = 0; j < data.m; ++j)
            tv_v += (dc.v.row(j).transpose().array().abs() * wq.array()).sum();
        diag.tv_gap_vs_exact = tv_v - tv_exact.sum();
    }
    return diag;
}

}  // namespace bvwave
