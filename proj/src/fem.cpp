#include "bvwave/fem.hpp"

#include <stdexcept>
#include <vector>

namespace bvwave {

namespace {

sparse_t mass_1d(int n, scalar_t h) {
    std::vector<Eigen::Triplet<scalar_t>> trip;
    trip.reserve(3 * n);
    for (int i = 0; i < n; ++i) {
        const bool end = (i == 0 || i == n - 1);
        trip.emplace_back(i, i, end ? h / 3.0 : 2.0 * h / 3.0);
        if (i + 1 < n) {
            trip.emplace_back(i, i + 1, h / 6.0);
            trip.emplace_back(i + 1, i, h / 6.0);
        }
    }
    sparse_t M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

sparse_t stiffness_1d(int n, scalar_t h) {
    std::vector<Eigen::Triplet<scalar_t>> trip;
    trip.reserve(3 * n);
    for (int i = 0; i < n; ++i) {
        const bool end = (i == 0 || i == n - 1);
        trip.emplace_back(i, i, end ? 1.0 / h : 2.0 / h);
        if (i + 1 < n) {
            trip.emplace_back(i, i + 1, -1.0 / h);
            trip.emplace_back(i + 1, i, -1.0 / h);
        }
    }
    sparse_t A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

/// kron(A, B) with B's index running fastest.
sparse_t kron(const sparse_t& A, const sparse_t& B) {
    std::vector<Eigen::Triplet<scalar_t>> trip;
    trip.reserve(static_cast<std::size_t>(A.nonZeros()) * B.nonZeros());
    for (int ka = 0; ka < A.outerSize(); ++ka)
        for (sparse_t::InnerIterator ia(A, ka); ia; ++ia)
            for (int kb = 0; kb < B.outerSize(); ++kb)
                for (sparse_t::InnerIterator ib(B, kb); ib; ++ib)
                    trip.emplace_back(ia.row() * B.rows() + ib.row(),
                                      ia.col() * B.cols() + ib.col(), ia.value() * ib.value());
    sparse_t K(A.rows() * B.rows(), A.cols() * B.cols());
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

}  // namespace

vector_t FemOperators::restrict_interior(const Eigen::Ref<const vector_t>& full) const {
    vector_t out(num_interior());
    for (index_t i = 0; i < num_interior(); ++i) out(i) = full(interior[i]);
    return out;
}

vector_t FemOperators::extend_interior(const Eigen::Ref<const vector_t>& inner) const {
    vector_t out = vector_t::Zero(mass_full.rows());
    for (index_t i = 0; i < num_interior(); ++i) out(interior[i]) = inner(i);
    return out;
}

FemOperators assemble(const Grid& grid) {
    if (grid.num_space_nodes() < 3 || grid.nt < 3)
        throw std::invalid_argument("assemble: degenerate grid");

    FemOperators ops;
    ops.grid = grid;

    std::vector<sparse_t> M1(grid.dim), A1(grid.dim);
    for (int k = 0; k < grid.dim; ++k) {
        M1[k] = mass_1d(grid.nx[k], grid.hx[k]);
        A1[k] = stiffness_1d(grid.nx[k], grid.hx[k]);
    }

    // Tensor products with axis 0 fastest: fold from the highest axis down.
    auto chain = [&](int special_axis) {
        sparse_t acc = (special_axis == 0) ? A1[0] : M1[0];
        for (int k = 1; k < grid.dim; ++k) acc = kron((special_axis == k) ? A1[k] : M1[k], acc);
        return acc;
    };

    ops.mass_full = chain(-1);
    ops.stiffness_full = chain(0);
    for (int k = 1; k < grid.dim; ++k) ops.stiffness_full += chain(k);

    const int N = grid.num_space_nodes();
    for (int node = 0; node < N; ++node)
        if (!grid.is_boundary_node(node)) ops.interior.push_back(node);
    if (ops.interior.empty()) throw std::invalid_argument("assemble: no interior nodes");

    std::vector<Eigen::Triplet<scalar_t>> trip;
    trip.reserve(ops.interior.size());
    for (std::size_t i = 0; i < ops.interior.size(); ++i)
        trip.emplace_back(static_cast<int>(i), ops.interior[i], 1.0);
    ops.selector.resize(static_cast<index_t>(ops.interior.size()), N);
    ops.selector.setFromTriplets(trip.begin(), trip.end());

    ops.mass_int = ops.selector * ops.mass_full * ops.selector.transpose();
    ops.stiff_int = ops.selector * ops.stiffness_full * ops.selector.transpose();
    ops.cn_int = ops.mass_int + (grid.tau * grid.tau / 4.0) * ops.stiff_int;

    ops.cn_solver = std::make_unique<Eigen::SimplicialLDLT<sparse_t>>();
    ops.cn_solver->compute(ops.cn_int);
    ops.mass_solver = std::make_unique<Eigen::SimplicialLDLT<sparse_t>>();
    ops.mass_solver->compute(ops.mass_int);
    if (ops.cn_solver->info() != Eigen::Success || ops.mass_solver->info() != Eigen::Success)
        throw std::runtime_error("assemble: factorization failed");

    return ops;
}

SpaceTimeField solve_wave(const FemOperators& ops, const SpaceTimeField& f,
                          const Eigen::Ref<const vector_t>& y0,
                          const Eigen::Ref<const vector_t>& y1) {
    const Grid& grid = ops.grid;
    check_shape(f, grid);
    if (y0.size() != grid.num_space_nodes() || y1.size() != grid.num_space_nodes())
        throw std::invalid_argument("solve_wave: initial data size mismatch");

    const scalar_t tau = grid.tau;
    const scalar_t tau2 = tau * tau;
    SpaceTimeField y(grid);

    // Level 0: nodal interpolant with boundary values forced to zero.
    vector_t y_prev = ops.restrict_interior(y0);
    y.values.col(0) = ops.extend_interior(y_prev);

    // Taylor startup. (M f^0)_I keeps coupling to boundary values of f.
    vector_t rhs0 = ops.selector * (ops.mass_full * f.values.col(0)) - ops.stiff_int * y_prev;
    vector_t y_cur = y_prev + tau * ops.restrict_interior(y1) +
                     0.5 * tau2 * ops.mass_solver->solve(rhs0);
    y.values.col(1) = ops.extend_interior(y_cur);

    for (int n = 1; n + 1 < grid.nt; ++n) {
        vector_t fc = ops.selector *
                      (ops.mass_full * (f.values.col(n + 1) + 2.0 * f.values.col(n) +
                                        f.values.col(n - 1)));
        vector_t rhs = ops.mass_int * (2.0 * y_cur - y_prev) -
                       0.25 * tau2 * (ops.stiff_int * (2.0 * y_cur + y_prev)) + 0.25 * tau2 * fc;
        vector_t y_next = ops.cn_solver->solve(rhs);
        if (ops.cn_solver->info() != Eigen::Success)
            throw std::runtime_error("solve_wave: inner linear solve failed at step " +
                                     std::to_string(n));
        y.values.col(n + 1) = ops.extend_interior(y_next);
        y_prev.swap(y_cur);
        y_cur.swap(y_next);
    }
    return y;
}

SpaceTimeField apply_L(const FemOperators& ops, const SpaceTimeField& f) {
    const vector_t zero = vector_t::Zero(ops.grid.num_space_nodes());
    return solve_wave(ops, f, zero, zero);
}

SpaceTimeField apply_Q(const FemOperators& ops, const Eigen::Ref<const vector_t>& y0,
                       const Eigen::Ref<const vector_t>& y1) {
    return solve_wave(ops, SpaceTimeField(ops.grid), y0, y1);
}

// The forward map is y = T^{-1} R f with T block lower triangular:
//   row 0:      M y^0 = 0
//   row 1:      M y^1 = (tau^2/2) (M f^0)      (zero initial data)
//   row n+1:    C y^{n+1} + (tau^2/2 A - 2M) y^n + C y^{n-1} = (tau^2/4) M (f^{n+1}+2f^n+f^{n-1})
// with C = M + tau^2/4 A. The adjoint with respect to the weighted inner
// product W = diag(w_n tau M) is L* = W^{-1} R^T T^{-T} W. The mass factors
// in R^T and W^{-1} cancel, so the sweep below needs only C- and M-solves.
SpaceTimeField apply_Lstar(const FemOperators& ops, const SpaceTimeField& w) {
    const Grid& grid = ops.grid;
    check_shape(w, grid);

    const int nt = grid.nt;
    const scalar_t tau = grid.tau;
    const scalar_t tau2 = tau * tau;
    const index_t ni = ops.num_interior();
    const vector_t wq = time_quad_weights(grid);

    // b^n = w_n tau (M w^n) restricted to the interior; b^0 is never used.
    matrix_t b(ni, nt);
    for (int n = 1; n < nt; ++n)
        b.col(n) = wq(n) * (ops.selector * (ops.mass_full * w.values.col(n)));

    matrix_t z = matrix_t::Zero(ni, nt);
    z.col(nt - 1) = ops.cn_solver->solve(b.col(nt - 1));
    for (int n = nt - 2; n >= 1; --n) {
        vector_t rhs = b.col(n);
        rhs -= 0.5 * tau2 * (ops.stiff_int * z.col(n + 1)) - 2.0 * (ops.mass_int * z.col(n + 1));
        if (n + 2 <= nt - 1) rhs -= ops.cn_int * z.col(n + 2);
        z.col(n) = (n == 1) ? ops.mass_solver->solve(rhs) : ops.cn_solver->solve(rhs);
    }

    SpaceTimeField p(grid);
    for (int k = 0; k < nt; ++k) {
        vector_t acc = vector_t::Zero(ni);
        if (k >= 2) acc += z.col(k);
        if (k + 1 <= nt - 1) acc += 2.0 * z.col(k + 1);
        if (k + 2 <= nt - 1) acc += z.col(k + 2);
        p.values.col(k) = ops.extend_interior((0.25 * tau2 / wq(k)) * acc);
    }
    return p;
}

scalar_t spacetime_inner(const FemOperators& ops, const SpaceTimeField& a,
                         const SpaceTimeField& b) {
    const vector_t wq = time_quad_weights(ops.grid);
    scalar_t s = 0.0;
    for (int n = 0; n < ops.grid.nt; ++n)
        s += wq(n) * a.values.col(n).dot(ops.mass_full * b.values.col(n));
    return s;
}

scalar_t spacetime_norm(const FemOperators& ops, const SpaceTimeField& a) {
    return std::sqrt(std::max(0.0, spacetime_inner(ops, a, a)));
}

vector_t discrete_energy(const FemOperators& ops, const SpaceTimeField& y) {
    const Grid& grid = ops.grid;
    check_shape(y, grid);
    vector_t e(grid.nt - 1);
    for (int n = 0; n + 1 < grid.nt; ++n) {
        vector_t d = ops.selector * (y.values.col(n + 1) - y.values.col(n)) / grid.tau;
        vector_t s = 0.5 * (ops.selector * (y.values.col(n + 1) + y.values.col(n)));
        e(n) = 0.5 * d.dot(ops.mass_int * d) + 0.5 * s.dot(ops.stiff_int * s);
    }
    return e;
}

}  // namespace bvwave
