#pragma once

#include <utility>

#include "pv5/system.hpp"

namespace pv5 {

/// The family after the coordinate change xi = 1/(z+1), s = 1/(t+1):
///   dy/dxi = ( B0/(xi-1) + B1/(xi-s) - diag(1,0)/xi^2 - (B0+B1)/xi ) y.
/// Fuchsian points xi = 1 and xi = s, double pole at xi = 0; infinity is a
/// regular point because the first-order coefficients cancel there.
template <class T>
struct TransformedState {
    T s{};
    Mat2<T> residue_at_one;   // B0
    Mat2<T> residue_at_s;     // B1
    Mat2<T> double_pole;      // -diag(1,0), coefficient of xi^{-2}
    Mat2<T> residue_at_zero;  // -(B0+B1)
};

template <class T>
TransformedState<T> transform_xi(const SystemState<T>& st) {
    if (is_zero(st.t + T(1)))
        throw Error(ErrorCode::ChartSingular, "t = -1 needs a different chart");
    TransformedState<T> ts;
    ts.s = T(1) / (st.t + T(1));
    ts.residue_at_one = st.B0;
    ts.residue_at_s = st.B1;
    ts.double_pole = -irregular_leading<T>();
    ts.residue_at_zero = -(st.B0 + st.B1);
    return ts;
}

/// Coefficient matrix of the transformed family, from its four parts.
template <class T>
Mat2<T> eval_B_tilde(const TransformedState<T>& ts, const T& xi) {
    if (is_zero(xi) || is_zero(xi - T(1)) || is_zero(xi - ts.s))
        throw Error(ErrorCode::PoleEvaluation, "xi at a singular point");
    return ts.residue_at_one / (xi - T(1)) + ts.residue_at_s / (xi - ts.s) +
           ts.double_pole / (xi * xi) + ts.residue_at_zero / xi;
}

/// Same matrix computed through the original chart: -B(z(xi), t)/xi^2 with
/// z = 1/xi - 1. Independent route, used to cross-check transform_xi.
template <class T>
Mat2<T> eval_B_tilde_via_z(const SystemState<T>& st, const T& xi) {
    if (is_zero(xi)) throw Error(ErrorCode::PoleEvaluation, "xi = 0");
    const T z = T(1) / xi - T(1);
    return -(eval_B(st, z)) / (xi * xi);
}

/// Both sides of the chart residue identity
///   (-s^2) * 1/2 res_{xi=s} tr Btilde^2  =  tr(B0 B1)/t + (B1)_11 + tr B1^2/(t+1).
/// The left side comes from the Laurent structure of Btilde at xi = s: with
/// Btilde = B1/(xi-s) + R(xi) and R holomorphic there, the residue of the
/// trace of the square is 2 tr(B1 R(s)).
template <class T>
std::pair<T, T> xi_residue_identity(const SystemState<T>& st) {
    if (is_zero(st.t)) throw Error(ErrorCode::ZeroBasePoint, "t is zero");
    const TransformedState<T> ts = transform_xi(st);
    const T s = ts.s;

    const Mat2<T> R_at_s = ts.residue_at_one / (s - T(1)) + ts.double_pole / (s * s) +
                           ts.residue_at_zero / s;
    const T lhs = -(s * s) * trace(ts.residue_at_s * R_at_s);

    const T rhs = trace(st.B0 * st.B1) / st.t + st.B1.a11 + tr_B1_squared(st) / (st.t + T(1));
    return {lhs, rhs};
}

/// 1/2 tr Btilde(xi, s)^2 as a scalar function of xi, for contour oracles.
template <class T>
T half_tr_B_tilde_squared(const TransformedState<T>& ts, const T& xi) {
    const Mat2<T> B = eval_B_tilde(ts, xi);
    return trace(B * B) / T(2);
}

} // namespace pv5
