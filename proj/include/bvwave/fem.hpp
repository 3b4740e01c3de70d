#pragma once

#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "bvwave/problem.hpp"

namespace bvwave {

/// Discrete wave operators on a tensor-product grid: P1 mass and stiffness
/// matrices, homogeneous Dirichlet boundary handled by row/column elimination
/// onto the interior nodes, and a factorization of the Crank-Nicolson system
/// matrix M + tau^2/4 A reused for every time step.
///
/// Immutable after assembly; the factorizations are safe for concurrent solves.
struct FemOperators {
    Grid grid;

    sparse_t mass_full;       ///< pre-BC mass matrix over all nodes
    sparse_t stiffness_full;  ///< pre-BC stiffness matrix over all nodes

    sparse_t selector;    ///< (interior x all) 0/1 selection matrix
    sparse_t mass_int;    ///< interior block of the mass matrix
    sparse_t stiff_int;   ///< interior block of the stiffness matrix
    sparse_t cn_int;      ///< M + tau^2/4 A on interior nodes

    std::vector<int> interior;  ///< interior node ids

    std::unique_ptr<Eigen::SimplicialLDLT<sparse_t>> cn_solver;
    std::unique_ptr<Eigen::SimplicialLDLT<sparse_t>> mass_solver;

    FemOperators() = default;
    FemOperators(FemOperators&&) = default;
    FemOperators& operator=(FemOperators&&) = default;
    FemOperators(const FemOperators&) = delete;
    FemOperators& operator=(const FemOperators&) = delete;

    index_t num_interior() const { return static_cast<index_t>(interior.size()); }

    /// Gather interior entries of a full-length vector.
    vector_t restrict_interior(const Eigen::Ref<const vector_t>& full) const;
    /// Scatter an interior vector into a zero full-length vector.
    vector_t extend_interior(const Eigen::Ref<const vector_t>& inner) const;
};

/// Assemble mass/stiffness and the Crank-Nicolson factorization for the grid.
FemOperators assemble(const Grid& grid);

/// Crank-Nicolson three-level solve of the wave equation with forcing f and
/// initial data (y0, y1). Averaging weights (1/4, 1/2, 1/4) act on both the
/// stiffness term and the forcing; the startup step is the second-order
/// Taylor expansion y^1 = y^0 + tau y1 + tau^2/2 M^{-1}(M f^0 - A y^0).
/// Boundary values of the returned state are zero at all levels.
SpaceTimeField solve_wave(const FemOperators& ops, const SpaceTimeField& f,
                          const Eigen::Ref<const vector_t>& y0,
                          const Eigen::Ref<const vector_t>& y1);

/// L: forcing -> state (zero initial data).
SpaceTimeField apply_L(const FemOperators& ops, const SpaceTimeField& f);

/// Q: initial data -> state (zero forcing).
SpaceTimeField apply_Q(const FemOperators& ops, const Eigen::Ref<const vector_t>& y0,
                       const Eigen::Ref<const vector_t>& y1);

/// Exact discrete adjoint of L with respect to the trapezoidal-in-time,
/// mass-weighted-in-space inner product: <L f, w>_h = <f, L* w>_h holds to
/// machine precision, realized by a reverse-time sweep with the transposed
/// recurrence. The output is a state-like field (zero at the boundary).
SpaceTimeField apply_Lstar(const FemOperators& ops, const SpaceTimeField& w);

/// Space-time inner product: sum_n w_n tau * a_n^T M b_n over time nodes.
scalar_t spacetime_inner(const FemOperators& ops, const SpaceTimeField& a,
                         const SpaceTimeField& b);

scalar_t spacetime_norm(const FemOperators& ops, const SpaceTimeField& a);

/// Discrete energy per time interval,
/// E^n = 1/2 ||(y^{n+1}-y^n)/tau||_M^2 + 1/2 ||(y^{n+1}+y^n)/2||_A^2,
/// conserved exactly by the scheme when f = 0.
vector_t discrete_energy(const FemOperators& ops, const SpaceTimeField& y);

}  // namespace bvwave
