#pragma once

#include <array>
#include <cmath>

#include "bvwave/types.hpp"

namespace bvwave {

/// Tensor-product space grid plus uniform time grid.
///
/// Space nodes are ordered with axis 0 fastest, i.e. the node with
/// multi-index (i0, i1, i2) has flat index i0 + nx[0]*(i1 + nx[1]*i2).
/// Time node i sits at t_i = i * tau with tau = T / (nt - 1).
struct Grid {
    int dim = 1;
    std::array<scalar_t, 3> lo{-1.0, -1.0, -1.0};
    std::array<scalar_t, 3> hi{1.0, 1.0, 1.0};
    std::array<int, 3> nx{2, 1, 1};
    scalar_t T = 1.0;
    int nt = 3;
    scalar_t tau = 0.5;
    std::array<scalar_t, 3> hx{2.0, 0.0, 0.0};

    int num_space_nodes() const {
        int n = 1;
        for (int k = 0; k < dim; ++k) n *= nx[k];
        return n;
    }

    scalar_t time(int i) const { return i * tau; }

    std::array<int, 3> node_multi_index(int node) const {
        std::array<int, 3> idx{0, 0, 0};
        for (int k = 0; k < dim; ++k) {
            idx[k] = node % nx[k];
            node /= nx[k];
        }
        return idx;
    }

    std::array<scalar_t, 3> node_coords(int node) const {
        const auto idx = node_multi_index(node);
        std::array<scalar_t, 3> x{0.0, 0.0, 0.0};
        for (int k = 0; k < dim; ++k) x[k] = lo[k] + idx[k] * hx[k];
        return x;
    }

    bool is_boundary_node(int node) const {
        const auto idx = node_multi_index(node);
        for (int k = 0; k < dim; ++k)
            if (idx[k] == 0 || idx[k] == nx[k] - 1) return true;
        return false;
    }
};

/// Validating factory. Throws std::invalid_argument on a degenerate grid.
Grid make_grid(int dim, std::array<scalar_t, 3> lo, std::array<scalar_t, 3> hi,
               std::array<int, 3> nx, scalar_t T, int nt);

/// Convenience for 1d grids.
Grid make_grid_1d(scalar_t lo, scalar_t hi, int nx, scalar_t T, int nt);

/// Trapezoidal quadrature weights on the time grid: tau * (1/2, 1, ..., 1, 1/2).
vector_t time_quad_weights(const Grid& grid);

/// Trapezoidal integral of nodal samples over [0, T].
scalar_t trapz(const Grid& grid, const Eigen::Ref<const vector_t>& samples);

}  // namespace bvwave
