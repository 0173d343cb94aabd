#pragma once

#include <cstddef>
#include <numbers>

#include "pv5/system.hpp"
#include "pv5/transform.hpp"

namespace pv5 {

/// (1/2 pi i) * integral of f over the circle |z - center| = radius,
/// trapezoidal rule on n equispaced nodes. For integrands analytic in an
/// annulus around the circle the rule converges geometrically, so moderate
/// n already reaches rounding level. This is the quadrature route against
/// which the closed-form residues are checked; it only touches f itself.
template <class F>
Cpx contour_residue(F&& f, Cpx center, double radius, std::size_t n = 256) {
    Cpx acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double phi = 2.0 * std::numbers::pi * double(k) / double(n);
        const Cpx w = radius * Cpx(std::cos(phi), std::sin(phi));
        acc += f(center + w) * w;
    }
    return acc / double(n);
}

/// Residue of 1/2 tr B(z,t)^2 at z = t by direct contour quadrature.
/// Radius defaults to half the distance to the only other finite pole z=0.
inline Cpx contour_half_tr_B2_residue(const SystemStateC& st, double radius = 0.0,
                                      std::size_t n = 256) {
    if (radius <= 0.0) radius = 0.5 * std::min(std::abs(st.t), 1.0);
    return contour_residue([&](Cpx z) { return half_tr_B_squared(st, z); }, st.t, radius, n);
}

/// Residue of 1/2 tr Btilde(xi,s)^2 at xi = s by contour quadrature.
inline Cpx contour_half_tr_Btilde2_residue(const TransformedState<Cpx>& ts, double radius = 0.0,
                                           std::size_t n = 256) {
    const double to_zero = std::abs(ts.s);
    const double to_one = std::abs(ts.s - 1.0);
    if (radius <= 0.0) radius = 0.45 * std::min(to_zero, to_one);
    return contour_residue([&](Cpx xi) { return half_tr_B_tilde_squared(ts, xi); }, ts.s, radius, n);
}

} // namespace pv5
