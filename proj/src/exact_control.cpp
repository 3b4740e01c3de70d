#include "bvwave/exact_control.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace bvwave {

scalar_t cantor_function(scalar_t t) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("cantor_function: argument outside [0,1]");
    if (t >= 1.0) return 1.0;
    scalar_t acc = 0.0;
    scalar_t factor = 0.5;
    for (int k = 0; k < 64; ++k) {
        t *= 3.0;
        const int digit = static_cast<int>(t);
        t -= digit;
        if (digit == 1) return acc + factor;
        if (digit >= 2) acc += factor;
        factor *= 0.5;
        if (t <= 0.0) break;
    }
    return acc;
}

namespace {

scalar_t poly_eval(const vector_t& coeffs, scalar_t s) {
    scalar_t r = 0.0;
    for (index_t j = coeffs.size() - 1; j >= 0; --j) r = r * s + coeffs(j);
    return r;
}

scalar_t poly_antideriv(const vector_t& coeffs, scalar_t s) {
    scalar_t r = 0.0;
    for (index_t j = coeffs.size() - 1; j >= 0; --j) r = r * s + coeffs(j) / (j + 1);
    return r * s;
}

scalar_t adaptive_simpson(const std::function<scalar_t(scalar_t)>& f, scalar_t a, scalar_t b,
                          scalar_t fa, scalar_t fm, scalar_t fb, scalar_t whole, scalar_t tol,
                          int depth) {
    const scalar_t m = 0.5 * (a + b);
    const scalar_t lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const scalar_t flm = f(lm), frm = f(rm);
    const scalar_t left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const scalar_t right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

scalar_t integrate_abs(const std::function<scalar_t(scalar_t)>& f, scalar_t a, scalar_t b,
                       scalar_t tol) {
    const scalar_t fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const scalar_t whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// Cumulative contribution of a Cantor piece at time t (see header).
scalar_t piece_value(const CantorPiece& p, scalar_t t) {
    const scalar_t half = 0.5 * p.scale;
    if (p.orientation == CantorPiece::Orientation::rising) {
        if (t < p.a) return 0.0;
        if (t >= p.b) return half;
        return p.scale * cantor_function((t - p.a) / (2.0 * (p.b - p.a)));
    }
    if (t < p.a) return 0.0;
    if (t >= p.b) return -half;
    return p.scale * (cantor_function((p.b - t) / (2.0 * (p.b - p.a))) - 0.5);
}

}  // namespace

scalar_t PiecewisePoly::value(scalar_t t) const {
    if (breaks.size() < 2 || coeffs.size() + 1 != breaks.size()) return 0.0;
    if (t < breaks.front() || t >= breaks.back()) return 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        if (t < breaks[i + 1]) return poly_eval(coeffs[i], t - breaks[i]);
    return 0.0;
}

scalar_t PiecewisePoly::integral(scalar_t t) const {
    scalar_t acc = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const scalar_t a = breaks[i], b = breaks[i + 1];
        if (t <= a) break;
        const scalar_t upto = std::min(t, b);
        acc += poly_antideriv(coeffs[i], upto - a);
    }
    return acc;
}

scalar_t PiecewisePoly::abs_integral() const {
    scalar_t acc = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const auto& c = coeffs[i];
        const scalar_t a = breaks[i];
        acc += integrate_abs([&](scalar_t s) { return std::abs(poly_eval(c, s - a)); }, a,
                             breaks[i + 1], 1e-10);
    }
    return acc;
}

void validate(const ExactControl& ec, scalar_t T) {
    for (const auto& comp : ec.components) {
        for (const auto& atom : comp.atoms)
            if (!(atom.t > 0.0 && atom.t < T))
                throw std::invalid_argument("exact control: atom outside (0, T)");
        for (std::size_t i = 0; i < comp.cantor_pieces.size(); ++i) {
            const auto& p = comp.cantor_pieces[i];
            if (!(p.b > p.a)) throw std::invalid_argument("exact control: degenerate Cantor piece");
            if (!(p.a > 0.0 && p.b < T))
                throw std::invalid_argument("exact control: Cantor piece outside (0, T)");
            for (std::size_t j = i + 1; j < comp.cantor_pieces.size(); ++j) {
                const auto& q = comp.cantor_pieces[j];
                if (std::max(p.a, q.a) < std::min(p.b, q.b))
                    throw std::invalid_argument("exact control: overlapping Cantor pieces");
            }
        }
    }
}

scalar_t evaluate_component(const ComponentControl& comp, scalar_t t) {
    scalar_t u = comp.offset;
    for (const auto& atom : comp.atoms)
        if (atom.t <= t) u += atom.weight;
    for (const auto& piece : comp.cantor_pieces) u += piece_value(piece, t);
    if (comp.density) u += comp.density->integral(t);
    return u;
}

matrix_t evaluate_exact_control(const ExactControl& ec, const Grid& grid) {
    validate(ec, grid.T);
    const int m = ec.num_components();
    matrix_t u(m, grid.nt);
    for (int j = 0; j < m; ++j)
        for (int n = 0; n < grid.nt; ++n) u(j, n) = evaluate_component(ec.components[j], grid.time(n));
    return u;
}

vector_t total_variation(const ExactControl& ec) {
    const int m = ec.num_components();
    vector_t tv = vector_t::Zero(m);
    for (int j = 0; j < m; ++j) {
        const auto& comp = ec.components[j];
        for (const auto& atom : comp.atoms) tv(j) += std::abs(atom.weight);
        for (const auto& piece : comp.cantor_pieces)
            tv(j) += std::abs(piece.scale) * (cantor_function(0.5) - cantor_function(0.0));
        if (comp.density) tv(j) += comp.density->abs_integral();
    }
    return tv;
}

}  // namespace bvwave
