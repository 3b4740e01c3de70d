#include "bvwave/grid.hpp"

#include <stdexcept>

namespace bvwave {

Grid make_grid(int dim, std::array<scalar_t, 3> lo, std::array<scalar_t, 3> hi,
               std::array<int, 3> nx, scalar_t T, int nt) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid: dim must be 1, 2 or 3");
    if (nt < 3) throw std::invalid_argument("grid: nt must be at least 3");
    if (!(T > 0.0)) throw std::invalid_argument("grid: T must be positive");

    Grid g;
    g.dim = dim;
    g.lo = lo;
    g.hi = hi;
    g.nx = nx;
    g.T = T;
    g.nt = nt;
    g.tau = T / (nt - 1);
    for (int k = dim; k < 3; ++k) {
        g.nx[k] = 1;
        g.hx[k] = 0.0;
    }
    for (int k = 0; k < dim; ++k) {
        if (nx[k] < 2) throw std::invalid_argument("grid: nx must be at least 2 per axis");
        if (!(hi[k] > lo[k])) throw std::invalid_argument("grid: empty axis extent");
        g.hx[k] = (hi[k] - lo[k]) / (nx[k] - 1);
    }
    return g;
}

Grid make_grid_1d(scalar_t lo, scalar_t hi, int nx, scalar_t T, int nt) {
    return make_grid(1, {lo, 0.0, 0.0}, {hi, 0.0, 0.0}, {nx, 1, 1}, T, nt);
}

vector_t time_quad_weights(const Grid& grid) {
    vector_t w = vector_t::Constant(grid.nt, grid.tau);
    w(0) = 0.5 * grid.tau;
    w(grid.nt - 1) = 0.5 * grid.tau;
    return w;
}

scalar_t trapz(const Grid& grid, const Eigen::Ref<const vector_t>& samples) {
    if (samples.size() != grid.nt) throw std::invalid_argument("trapz: size mismatch");
    scalar_t s = 0.5 * (samples(0) + samples(grid.nt - 1));
    s += samples.segment(1, grid.nt - 2).sum();
    return s * grid.tau;
}

}  // namespace bvwave
