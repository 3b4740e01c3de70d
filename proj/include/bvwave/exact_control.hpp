#pragma once

#include <optional>
#include <vector>

#include "bvwave/grid.hpp"
#include "bvwave/types.hpp"

namespace bvwave {

/// Cantor function C(t) on [0,1], evaluated by scanning base-3 digits until
/// the first digit 1 (depth capped at 64 digits). Nondecreasing, C(0)=0, C(1)=1.
scalar_t cantor_function(scalar_t t);

/// One jump of the control: u gains `weight` at time `t` (closed-left, the
/// jump value is attained at t itself).
struct Atom {
    scalar_t t = 0.0;
    scalar_t weight = 0.0;
};

/// Cantor-graded monotone piece on [a,b]. A rising piece contributes
/// scale * C((t-a) / (2(b-a))), clamped at its final value scale/2 for t > b;
/// a falling piece mirrors this, decreasing by scale/2 over [a,b]. The
/// contribution is cumulative: it persists after the piece ends.
struct CantorPiece {
    enum class Orientation { rising, falling };
    scalar_t a = 0.0;
    scalar_t b = 1.0;
    scalar_t scale = 1.0;
    Orientation orientation = Orientation::rising;
};

/// Piecewise polynomial density of an absolutely continuous derivative part.
/// Piece i covers [breaks[i], breaks[i+1]) with coefficients in increasing
/// powers of (t - breaks[i]).
struct PiecewisePoly {
    std::vector<scalar_t> breaks;
    std::vector<vector_t> coeffs;

    scalar_t value(scalar_t t) const;
    /// Integral of the density over [0, t].
    scalar_t integral(scalar_t t) const;
    /// Integral of |density| over the whole support (adaptive Simpson).
    scalar_t abs_integral() const;
};

/// Symbolic BV control for one component.
struct ComponentControl {
    std::vector<Atom> atoms;
    std::vector<CantorPiece> cantor_pieces;
    scalar_t offset = 0.0;
    std::optional<PiecewisePoly> density;
};

/// Symbolic BV control: atoms + Cantor pieces + a.c. density + constant,
/// evaluable on any grid. Ground truth for the manufactured examples.
struct ExactControl {
    std::vector<ComponentControl> components;

    int num_components() const { return static_cast<int>(components.size()); }
};

/// Evaluate one component at time t.
scalar_t evaluate_component(const ComponentControl& comp, scalar_t t);

/// Sample all components at the grid's time nodes; returns (m x nt).
/// Throws std::invalid_argument if an atom lies outside (0, T) or a piece
/// is degenerate or outside (0, T).
matrix_t evaluate_exact_control(const ExactControl& ec, const Grid& grid);

/// Total variation of each component: sum of |atom weights|, the total
/// rise/fall of each Cantor piece, and the L1 mass of the density.
vector_t total_variation(const ExactControl& ec);

/// Validation used by evaluate_exact_control; throws on violation.
void validate(const ExactControl& ec, scalar_t T);

}  // namespace bvwave
