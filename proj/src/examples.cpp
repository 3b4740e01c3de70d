#include "bvwave/examples.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bvwave {

namespace {

constexpr scalar_t pi = std::numbers::pi_v<scalar_t>;

scalar_t simpson_rec(const std::function<scalar_t(scalar_t)>& f, scalar_t a, scalar_t b,
                     scalar_t fa, scalar_t fm, scalar_t fb, scalar_t whole, scalar_t tol,
                     int depth) {
    const scalar_t m = 0.5 * (a + b);
    const scalar_t lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const scalar_t flm = f(lm), frm = f(rm);
    const scalar_t left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const scalar_t right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

scalar_t integrate(const std::function<scalar_t(scalar_t)>& f, scalar_t a, scalar_t b,
                   scalar_t tol) {
    if (!(b > a)) return 0.0;
    const scalar_t fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const scalar_t whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 52);
}

scalar_t bump(scalar_t u) {
    const scalar_t s = 1.0 - u * u;
    if (s <= 1e-12) return 0.0;
    return std::exp(-1.0 / s);
}

scalar_t bump_d1(scalar_t u) {
    const scalar_t s = 1.0 - u * u;
    if (s <= 1e-12) return 0.0;
    return -2.0 * u / (s * s) * std::exp(-1.0 / s);
}

scalar_t bump_d2(scalar_t u) {
    const scalar_t s = 1.0 - u * u;
    if (s <= 1e-12) return 0.0;
    const scalar_t u2 = u * u;
    const scalar_t s2 = s * s;
    return (4.0 * u2 / (s2 * s2) - 2.0 / s2 - 8.0 * u2 / (s2 * s)) * std::exp(-1.0 / s);
}

scalar_t box_node_weight(scalar_t center, scalar_t h, scalar_t a, scalar_t b) {
    // Antiderivative of the unit hat 1 - |u| from 0, valid on [-1, 1].
    const auto hat_int = [](scalar_t u) { return u - 0.5 * u * std::abs(u); };
    const scalar_t ua = std::clamp((a - center) / h, -1.0, 1.0);
    const scalar_t ub = std::clamp((b - center) / h, -1.0, 1.0);
    return std::max(0.0, hat_int(ub) - hat_int(ua));
}

Mollifier::Mollifier(scalar_t eps) : eps_(eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("mollifier: eps must be positive");
    norm_ = 1.0 / integrate([](scalar_t u) { return bump(u); }, -1.0, 1.0, 1e-14);
}

scalar_t Mollifier::value(scalar_t x) const { return norm_ / eps_ * bump(x / eps_); }
scalar_t Mollifier::d1(scalar_t x) const { return norm_ / (eps_ * eps_) * bump_d1(x / eps_); }
scalar_t Mollifier::d2(scalar_t x) const {
    return norm_ / (eps_ * eps_ * eps_) * bump_d2(x / eps_);
}

scalar_t Mollifier::cdf(scalar_t x) const {
    if (x <= -eps_) return 0.0;
    if (x >= eps_) return 1.0;
    return norm_ * integrate([](scalar_t u) { return bump(u); }, -1.0, x / eps_, 1e-12);
}

scalar_t mollified_plateau(scalar_t t, scalar_t eps, const std::vector<SignedInterval>& intervals,
                           scalar_t T) {
    if (!(eps > 0.0)) throw std::invalid_argument("mollified_plateau: eps must be positive");
    scalar_t prev_end = 0.0;
    for (const auto& iv : intervals) {
        if (!(iv.a - eps > prev_end))
            throw std::invalid_argument("mollified_plateau: eps-separation violated");
        if (!(iv.b > iv.a)) throw std::invalid_argument("mollified_plateau: empty interval");
        prev_end = iv.b + eps;
    }
    if (!(prev_end < T)) throw std::invalid_argument("mollified_plateau: eps-separation violated");

    const Mollifier phi(eps);
    scalar_t val = 0.0;
    for (const auto& iv : intervals) val += iv.sign * (phi.cdf(t - iv.a) - phi.cdf(t - iv.b));
    return val;
}

ManufacturedProblem build_from_recipe(const Grid& grid, matrix_t g, vector_t alpha,
                                      const vector_t& f_nodes, const vector_t& lap_f_nodes,
                                      const std::function<scalar_t(scalar_t)>& h,
                                      const std::function<scalar_t(scalar_t)>& h_dd,
                                      const std::function<scalar_t(scalar_t)>& h_tail,
                                      ExactControl exact) {
    const int N = grid.num_space_nodes();
    const int m = static_cast<int>(g.cols());
    FemOperators ops = assemble(grid);

    // Forcing from the exact control, solved to get the reachable part of y_d.
    const matrix_t u = evaluate_exact_control(exact, grid);
    const SpaceTimeField forcing(g * u);
    const SpaceTimeField y_state = apply_L(ops, forcing);

    // Wave residual of phi(t,x) = h(t) f(x): f h'' - h (Laplacian f).
    SpaceTimeField residual(grid);
    for (int n = 0; n < grid.nt; ++n) {
        const scalar_t t = grid.time(n);
        residual.values.col(n) = h_dd(t) * f_nodes - h(t) * lap_f_nodes;
    }

    SpaceTimeField y_d(grid);
    y_d.values = y_state.values - residual.values;

    ManufacturedProblem prob;
    prob.data = make_problem_data(grid, std::move(g), std::move(alpha), vector_t::Zero(N),
                                  vector_t::Zero(N), std::move(y_d));
    prob.exact_control = std::move(exact);

    // Exact adjoint p_1,i(t) = tail(t) * z_i with z_i = int f g_i dx (mass quadrature).
    const vector_t z = prob.data.g.transpose() * (ops.mass_full * f_nodes);
    prob.exact_adjoint.resize(m, grid.nt);
    for (int n = 0; n < grid.nt; ++n) prob.exact_adjoint.col(n) = h_tail(grid.time(n)) * z;

    // Discrete cost at the sampled exact control: the misfit there is the
    // sampled residual by construction.
    CostBreakdown cb;
    cb.tracking = 0.5 * spacetime_inner(ops, residual, residual);
    cb.tv_l1 = prob.data.alpha.dot(total_variation(prob.exact_control));
    prob.exact_cost_discrete = cb.total();
    return prob;
}

ManufacturedProblem build_dirac_example(int dim, int l, scalar_t alpha, const Grid& grid) {
    if (dim < 1 || dim > 3 || grid.dim != dim)
        throw std::invalid_argument("dirac example: dimension mismatch");
    if (l < 1) throw std::invalid_argument("dirac example: l must be at least 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("dirac example: alpha must be positive");
    if (std::abs(grid.T - 2.0) > 1e-12)
        throw std::invalid_argument("dirac example: requires T = 2");
    for (int k = 0; k < dim; ++k)
        if (std::abs(grid.lo[k] + 1.0) > 1e-12 || std::abs(grid.hi[k] - 1.0) > 1e-12)
            throw std::invalid_argument("dirac example: requires Omega = (-1,1)^d");

    const int N = grid.num_space_nodes();
    const scalar_t beta = alpha * (3.0 * pi * l / 4.0) * std::pow(2.0 * std::sqrt(2.0) / pi, -dim);
    const scalar_t k1 = dim * pi * pi / 4.0 - 5.0 * l * l * pi * pi / 4.0;
    const scalar_t k2 = static_cast<scalar_t>(l) * l * pi * pi;

    matrix_t g(N, 1);
    vector_t f_nodes(N), lap_f_nodes(N);
    for (int node = 0; node < N; ++node) {
        const auto x = grid.node_coords(node);
        scalar_t weight = 1.0;
        scalar_t prod = 1.0;
        for (int k = 0; k < dim; ++k) {
            weight *= box_node_weight(x[k], grid.hx[k], -0.5, 0.5);
            prod *= std::cos(0.5 * pi * x[k]);
        }
        g(node, 0) = weight;
        f_nodes(node) = prod;
        lap_f_nodes(node) = -dim * (pi * pi / 4.0) * prod;
    }

    ExactControl exact;
    exact.components.resize(1);
    for (int n = 0; n < l; ++n) {
        const scalar_t cn = (n % 2 == 0) ? 1.0 : -1.0;  // sign(sin(pi (2n+1)/2))
        exact.components[0].atoms.push_back({(1.0 + 2.0 * n) / l, cn});
    }

    const auto h = [beta, l](scalar_t t) {
        return beta * std::sin(l * pi * t) * std::sin(0.5 * l * pi * t);
    };
    const auto h_dd = [beta, l, k2](scalar_t t) {
        const scalar_t s = std::sin(l * pi * t) * std::sin(0.5 * l * pi * t);
        const scalar_t c = std::cos(l * pi * t) * std::cos(0.5 * l * pi * t);
        return beta * (-(5.0 * l * l * pi * pi / 4.0) * s + k2 * c);
    };
    // int_t^2 h = (4 beta / (3 pi l)) (-sin^3(l pi t / 2)); the spatial factor
    // (2 sqrt2 / pi)^d enters p_1 through z.
    const auto h_tail = [beta, l](scalar_t t) {
        const scalar_t s = std::sin(0.5 * l * pi * t);
        return 4.0 * beta / (3.0 * pi * l) * (-s * s * s);
    };

    ManufacturedProblem prob =
        build_from_recipe(grid, std::move(g), vector_t::Constant(1, alpha), f_nodes, lap_f_nodes,
                          h, h_dd, h_tail, std::move(exact));

    // Replace the quadrature-based adjoint scaling by the closed form, which
    // uses the exact spatial integral (2 sqrt2 / pi)^d instead of its
    // mass-quadrature approximation.
    const scalar_t spatial = std::pow(2.0 * std::sqrt(2.0) / pi, dim);
    for (int n = 0; n < grid.nt; ++n)
        prob.exact_adjoint(0, n) = h_tail(grid.time(n)) * spatial;

    prob.exact_cost = beta * beta / 4.0 * k1 * k1 +
                      beta * beta * std::pow(static_cast<scalar_t>(l), 4) * std::pow(pi, 4) / 4.0 +
                      alpha * l;
    prob.metadata["dim"] = dim;
    prob.metadata["l"] = l;
    prob.metadata["alpha"] = alpha;
    prob.metadata["beta"] = beta;
    return prob;
}

ManufacturedProblem build_cantor_example(const Grid& grid) {
    if (grid.dim != 2) throw std::invalid_argument("cantor example: requires a 2d grid");
    if (std::abs(grid.T - 5.0) > 1e-12)
        throw std::invalid_argument("cantor example: requires T = 5");
    for (int k = 0; k < 2; ++k)
        if (!(grid.lo[k] < -1.0) || !(grid.hi[k] > 1.0))
            throw std::invalid_argument("cantor example: domain must contain [-1,1]^2");

    const scalar_t eps = 0.28;
    const Mollifier phi(eps);
    const std::vector<SignedInterval> plateaus{{0.5, 2.0, +1}, {3.0, 4.5, -1}};

    // p~(t) and its derivatives; the convolution derivative moves onto the
    // mollifier, so h = p~' is a sum of shifted mollifier evaluations.
    const auto p_tilde = [&](scalar_t t) { return mollified_plateau(t, eps, plateaus, grid.T); };
    const auto h = [&](scalar_t t) {
        scalar_t v = 0.0;
        for (const auto& iv : plateaus) v += iv.sign * (phi.value(t - iv.a) - phi.value(t - iv.b));
        return v;
    };
    const auto h_dd = [&](scalar_t t) {
        scalar_t v = 0.0;
        for (const auto& iv : plateaus) v += iv.sign * (phi.d2(t - iv.a) - phi.d2(t - iv.b));
        return v;
    };
    // int_t^T h = p~(T) - p~(t) = -p~(t).
    const auto h_tail = [&](scalar_t t) { return -p_tilde(t); };

    const int N = grid.num_space_nodes();
    matrix_t g(N, 1);
    vector_t f_nodes(N), lap_f_nodes(N);
    for (int node = 0; node < N; ++node) {
        const auto x = grid.node_coords(node);
        g(node, 0) = 10.0 * box_node_weight(x[0], grid.hx[0], -0.5, 0.5) *
                     box_node_weight(x[1], grid.hx[1], -0.5, 0.5);
        f_nodes(node) = bump(x[0]) * bump(x[1]);
        lap_f_nodes(node) = bump_d2(x[0]) * bump(x[1]) + bump(x[0]) * bump_d2(x[1]);
    }

    // alpha = |z| with z = int f g dx, computed by accurate quadrature.
    const scalar_t line = integrate([](scalar_t s) { return bump(s); }, -0.5, 0.5, 1e-12);
    const scalar_t z = 10.0 * line * line;
    const scalar_t alpha = std::abs(z);

    ExactControl exact;
    exact.components.resize(1);
    exact.components[0].cantor_pieces.push_back(
        {0.8, 2.14, 10.0, CantorPiece::Orientation::rising});
    exact.components[0].cantor_pieces.push_back(
        {2.85, 4.2, 10.0, CantorPiece::Orientation::falling});

    ManufacturedProblem prob =
        build_from_recipe(grid, std::move(g), vector_t::Constant(1, alpha), f_nodes, lap_f_nodes,
                          h, h_dd, h_tail, std::move(exact));

    // Closed-form adjoint -p~(t) z with the quadrature z rather than the
    // discrete mass approximation.
    for (int n = 0; n < grid.nt; ++n) prob.exact_adjoint(0, n) = -p_tilde(grid.time(n)) * z;
    prob.exact_cost.reset();  // no closed-form cost for this example
    prob.metadata["alpha"] = alpha;
    prob.metadata["eps"] = eps;
    return prob;
}

VerifyReport verify_manufactured(const std::function<ManufacturedProblem(const Grid&)>& builder,
                                 const Grid& base, int levels) {
    VerifyReport report;
    const scalar_t gamma_check = 1e-3;
    for (int lev = 0; lev < levels; ++lev) {
        const int factor = 1 << lev;
        std::array<int, 3> nx = base.nx;
        for (int k = 0; k < base.dim; ++k) nx[k] = (base.nx[k] - 1) * factor + 1;
        const int nt = (base.nt - 1) * factor + 1;
        const Grid grid = make_grid(base.dim, base.lo, base.hi, nx, base.T, nt);

        const ManufacturedProblem prob = builder(grid);
        const FemOperators ops = assemble(grid);

        // Adjoint functional at the exact control. The misfit there is the
        // sampled wave residual: S(u) - y_d with y_d = S(u) - residual.
        const matrix_t u = evaluate_exact_control(prob.exact_control, grid);
        SpaceTimeField misfit = solve_wave(ops, SpaceTimeField(prob.data.g * u), prob.data.y0,
                                           prob.data.y1);
        misfit.values -= prob.data.y_d.values;
        const AdjointFunctional adj = adjoint_from_misfit(prob.data, ops, misfit);

        VerifyLevel level;
        level.nx = nx[0];
        level.nt = nt;
        level.max_adjoint_error = (adj.psi - prob.exact_adjoint).cwiseAbs().maxCoeff();
        level.sup_psi_minus_alpha =
            (adj.psi.cwiseAbs().rowwise().maxCoeff() - prob.data.alpha).maxCoeff();

        // Dead-zone residual of F at fixed small gamma: off the jump set the
        // first block is -prox(-psi/gamma), which measures the sup-norm excess.
        const matrix_t pr = prox_l1((-1.0 / gamma_check) * adj.psi, prob.data.alpha, gamma_check);
        scalar_t dead = 0.0;
        for (int j = 0; j < prob.data.m; ++j) {
            for (int n = 0; n < grid.nt; ++n) {
                bool near_jump = false;
                const scalar_t t = grid.time(n);
                const auto& comp = prob.exact_control.components[j];
                for (const auto& atom : comp.atoms)
                    near_jump = near_jump || std::abs(t - atom.t) <= 2.0 * grid.tau;
                for (const auto& piece : comp.cantor_pieces)
                    near_jump = near_jump || (t >= piece.a - 2.0 * grid.tau &&
                                              t <= piece.b + 2.0 * grid.tau);
                if (!near_jump) dead = std::max(dead, std::abs(pr(j, n)));
            }
        }
        level.deadzone_residual = dead;
        level.second_block_residual = (adj.psi0 / gamma_check).cwiseAbs().maxCoeff();
        report.levels.push_back(level);
    }
    for (std::size_t i = 0; i + 1 < report.levels.size(); ++i)
        report.adjoint_rates.push_back(std::log2(report.levels[i].max_adjoint_error /
                                                 report.levels[i + 1].max_adjoint_error));
    return report;
}

}  // namespace bvwave
