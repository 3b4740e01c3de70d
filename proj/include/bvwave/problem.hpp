#pragma once

#include <stdexcept>

#include "bvwave/grid.hpp"
#include "bvwave/types.hpp"

namespace bvwave {

/// Nodal state values over (space node x time node). Column n holds the
/// spatial vector at time node n.
struct SpaceTimeField {
    matrix_t values;

    SpaceTimeField() = default;
    explicit SpaceTimeField(const Grid& grid)
        : values(matrix_t::Zero(grid.num_space_nodes(), grid.nt)) {}
    explicit SpaceTimeField(matrix_t v) : values(std::move(v)) {}

    index_t space_nodes() const { return values.rows(); }
    index_t time_nodes() const { return values.cols(); }

    scalar_t value(index_t time_level, index_t node) const { return values(node, time_level); }
};

void check_shape(const SpaceTimeField& field, const Grid& grid);

/// The pair (v, c): per-component time-node samples of the derivative v and
/// the real offsets c. v is (m x nt), c has length m.
struct DerivativeControl {
    matrix_t v;
    vector_t c;

    DerivativeControl() = default;
    DerivativeControl(int m, int nt) : v(matrix_t::Zero(m, nt)), c(vector_t::Zero(m)) {}
    DerivativeControl(matrix_t v_, vector_t c_) : v(std::move(v_)), c(std::move(c_)) {
        if (v.rows() != c.size()) throw std::invalid_argument("DerivativeControl: shape mismatch");
    }

    int num_components() const { return static_cast<int>(v.rows()); }
    int time_nodes() const { return static_cast<int>(v.cols()); }
};

/// Problem data for the tracking problem: geometry, control shapes g_j with
/// pairwise disjoint supports, weights alpha_j > 0, initial data and the
/// desired state.
struct ProblemData {
    Grid grid;
    int m = 1;
    matrix_t g;        ///< (space nodes x m) nodal samples of g_j
    vector_t alpha;    ///< positive weights, length m
    vector_t y0, y1;   ///< initial displacement / velocity at space nodes
    SpaceTimeField y_d;
};

/// Validating factory; throws std::invalid_argument when alpha is not
/// positive, some g_j vanishes identically, or supports overlap.
ProblemData make_problem_data(Grid grid, matrix_t g, vector_t alpha, vector_t y0, vector_t y1,
                              SpaceTimeField y_d);

/// Parameters of the regularization path: kappa(gamma) = c_kappa * gamma^kappa_exp.
struct RegularizationParams {
    scalar_t gamma0 = 1.0;
    scalar_t nu = 0.1;
    scalar_t tol_gamma = 1e-8;
    scalar_t tol_newton = 1e-6;
    scalar_t c_kappa = 1.0;
    scalar_t kappa_exp = 4.0;
    int max_newton_iters = 50;
    scalar_t krylov_tol = 1e-10;
    int krylov_max_iters = 2000;
    int krylov_restart = 50;
};

void validate(const RegularizationParams& params);

inline scalar_t kappa(const RegularizationParams& params, scalar_t gamma) {
    return params.c_kappa == 0.0 ? 0.0 : params.c_kappa * std::pow(gamma, params.kappa_exp);
}

}  // namespace bvwave
