#include "bvwave/problem.hpp"

namespace bvwave {

void check_shape(const SpaceTimeField& field, const Grid& grid) {
    if (field.space_nodes() != grid.num_space_nodes() || field.time_nodes() != grid.nt)
        throw std::invalid_argument("space-time field: shape mismatch with grid");
    if (!field.values.allFinite())
        throw std::invalid_argument("space-time field: non-finite entries");
}

ProblemData make_problem_data(Grid grid, matrix_t g, vector_t alpha, vector_t y0, vector_t y1,
                              SpaceTimeField y_d) {
    const int N = grid.num_space_nodes();
    const int m = static_cast<int>(g.cols());
    if (g.rows() != N) throw std::invalid_argument("problem data: g has wrong node count");
    if (alpha.size() != m) throw std::invalid_argument("problem data: alpha length mismatch");
    if ((alpha.array() <= 0.0).any())
        throw std::invalid_argument("problem data: alpha must be positive");
    if (y0.size() != N || y1.size() != N)
        throw std::invalid_argument("problem data: initial data size mismatch");
    check_shape(y_d, grid);

    for (int j = 0; j < m; ++j) {
        if (g.col(j).cwiseAbs().maxCoeff() == 0.0)
            throw std::invalid_argument("problem data: g_" + std::to_string(j) +
                                        " vanishes identically");
        for (int i = j + 1; i < m; ++i)
            if ((g.col(j).cwiseAbs().array() > 0.0 && g.col(i).cwiseAbs().array() > 0.0).any())
                throw std::invalid_argument("problem data: supports of g_" + std::to_string(j) +
                                            " and g_" + std::to_string(i) + " overlap");
    }

    ProblemData data;
    data.grid = grid;
    data.m = m;
    data.g = std::move(g);
    data.alpha = std::move(alpha);
    data.y0 = std::move(y0);
    data.y1 = std::move(y1);
    data.y_d = std::move(y_d);
    return data;
}

void validate(const RegularizationParams& p) {
    if (!(p.gamma0 > 0.0)) throw std::invalid_argument("params: gamma0 must be positive");
    if (!(p.nu > 0.0 && p.nu < 1.0)) throw std::invalid_argument("params: nu must be in (0,1)");
    if (!(p.tol_gamma > 0.0)) throw std::invalid_argument("params: tol_gamma must be positive");
    if (!(p.tol_newton > 0.0)) throw std::invalid_argument("params: tol_newton must be positive");
    if (!(p.c_kappa >= 0.0)) throw std::invalid_argument("params: c_kappa must be nonnegative");
    if (!(p.kappa_exp > 0.0)) throw std::invalid_argument("params: kappa_exp must be positive");
    if (p.max_newton_iters < 1) throw std::invalid_argument("params: max_newton_iters must be >= 1");
    if (!(p.krylov_tol > 0.0)) throw std::invalid_argument("params: krylov_tol must be positive");
    if (p.krylov_max_iters < 1 || p.krylov_restart < 1)
        throw std::invalid_argument("params: krylov iteration limits must be >= 1");
}

}  // namespace bvwave
