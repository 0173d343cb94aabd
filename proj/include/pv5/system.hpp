#pragma once

#include <algorithm>
#include <cmath>

#include "pv5/complex2x2.hpp"
#include "pv5/errors.hpp"
#include "pv5/rational.hpp"

namespace pv5 {

/// Formal exponents (theta0, theta1, theta_inf). The local eigenvalues of
/// the residue matrices are +-theta0/2 and +-theta1/2, so theta0 and theta1
/// must not be integers.
template <class T>
struct ThetaTriple {
    T theta0{}, theta1{}, theta_inf{};
};

using ThetaTripleC = ThetaTriple<Cpx>;

template <class T>
void require_valid_theta(const ThetaTriple<T>& th) {
    if (is_integer_value(th.theta0)) throw Error(ErrorCode::InvalidTheta, "theta0 is an integer");
    if (is_integer_value(th.theta1)) throw Error(ErrorCode::InvalidTheta, "theta1 is an integer");
}

/// One point of the linear family
///   dy/dz = ( B0/z + B1/(z - t) + diag(1,0) ) y
/// at deformation parameter t. Constraints carried by construction:
///   tr B0 = tr B1 = 0,
///   det B0 = -theta0^2/4,  det B1 = -theta1^2/4,
///   diag(B0 + B1) = (-theta_inf/2, theta_inf/2).
template <class T>
struct SystemState {
    T t{};
    Mat2<T> B0, B1;
    ThetaTriple<T> theta;
};

using SystemStateC = SystemState<Cpx>;

/// Builds a state from the minimal chart (a0, b, e):
///   B0 = [[a0, b], [c0, -a0]],  c0 = (theta0^2/4 - a0^2)/b,
///   B1 = [[m,  e], [c1,  -m]],  m  = -theta_inf/2 - a0,
///                               c1 = (theta1^2/4 - m^2)/e.
/// The spectral and normalization constraints then hold identically.
template <class T>
SystemState<T> build_state(const ThetaTriple<T>& theta, const T& a0, const T& b, const T& e,
                           const T& t0) {
    require_valid_theta(theta);
    if (is_zero(b)) throw Error(ErrorCode::ZeroGaugeParameter, "builder input b is zero");
    if (is_zero(e)) throw Error(ErrorCode::ZeroGaugeParameter, "builder input e is zero");
    if (is_zero(t0)) throw Error(ErrorCode::ZeroBasePoint, "base point t0 is zero");

    const T quarter = T(1) / T(4);
    const T c0 = (theta.theta0 * theta.theta0 * quarter - a0 * a0) / b;
    const T m = -theta.theta_inf / T(2) - a0;
    const T c1 = (theta.theta1 * theta.theta1 * quarter - m * m) / e;

    SystemState<T> st;
    st.t = t0;
    st.B0 = {a0, b, c0, -a0};
    st.B1 = {m, e, c1, -m};
    st.theta = theta;
    return st;
}

/// B(z,t) = B0/z + B1/(z-t) + diag(1,0).
template <class T>
Mat2<T> eval_B(const SystemState<T>& st, const T& z) {
    if (is_zero(z)) throw Error(ErrorCode::PoleEvaluation, "z = 0 is a singular point");
    if (is_zero(z - st.t)) throw Error(ErrorCode::PoleEvaluation, "z = t is a singular point");
    return st.B0 / z + st.B1 / (z - st.t) + irregular_leading<T>();
}

/// Half the residue of tr B(z,t)^2 at z = t, in closed form:
///   tr(B0 B1)/t + (B1)_11.
template <class T>
T miwa_residue(const SystemState<T>& st) {
    if (is_zero(st.t)) throw Error(ErrorCode::ZeroBasePoint, "t is zero");
    return trace(st.B0 * st.B1) / st.t + st.B1.a11;
}

/// tr B1^2 = (tr B1)^2 - 2 det B1; equals theta1^2/2 for any valid state.
template <class T>
T tr_B1_squared(const SystemState<T>& st) {
    return trace(st.B1 * st.B1);
}

/// Conjugation by diag(d1, d2), the residual symmetry of the normalization
/// at infinity. Diagonal entries are untouched; off-diagonals scale.
template <class T>
SystemState<T> gauge_conjugate(const SystemState<T>& st, const T& d1, const T& d2) {
    if (is_zero(d1) || is_zero(d2)) throw Error(ErrorCode::SingularGauge, "d1*d2 = 0");
    const T r = d1 / d2;
    auto conj = [&](const Mat2<T>& a) { return Mat2<T>{a.a11, a.a12 * r, a.a21 / r, a.a22}; };
    SystemState<T> out = st;
    out.B0 = conj(st.B0);
    out.B1 = conj(st.B1);
    return out;
}

/// 1/2 tr B(z,t)^2, the density whose z = t residue drives d ln tau.
template <class T>
T half_tr_B_squared(const SystemState<T>& st, const T& z) {
    const Mat2<T> B = eval_B(st, z);
    return trace(B * B) / T(2);
}

/// Constraint residuals of a floating-point state, for validation and drift
/// reporting. All quantities are conserved by the deformation flow.
struct ConstraintResiduals {
    double tr_b0 = 0, det_b0 = 0, tr_b1 = 0, det_b1 = 0, diag_sum = 0;

    double max() const {
        return std::max({tr_b0, det_b0, tr_b1, det_b1, diag_sum});
    }
};

inline ConstraintResiduals constraint_residuals(const SystemStateC& st) {
    const Cpx q0 = st.theta.theta0 * st.theta.theta0 * 0.25;
    const Cpx q1 = st.theta.theta1 * st.theta.theta1 * 0.25;
    ConstraintResiduals r;
    r.tr_b0 = std::abs(trace(st.B0));
    r.det_b0 = std::abs(det(st.B0) + q0);
    r.tr_b1 = std::abs(trace(st.B1));
    r.det_b1 = std::abs(det(st.B1) + q1);
    r.diag_sum = std::max(std::abs(st.B0.a11 + st.B1.a11 + st.theta.theta_inf * 0.5),
                          std::abs(st.B0.a22 + st.B1.a22 - st.theta.theta_inf * 0.5));
    return r;
}

/// Relative validation against the default tolerance 1e-10 (configurable).
inline bool state_is_valid(const SystemStateC& st, double rtol = 1e-10) {
    const double scale = std::max({1.0, max_abs_entry(st.B0), max_abs_entry(st.B1)});
    return constraint_residuals(st).max() <= rtol * scale * scale;
}

inline SystemState<Cpx> to_cpx(const SystemState<RatC>& st) {
    SystemState<Cpx> out;
    out.t = st.t.to_cpx();
    out.B0 = {st.B0.a11.to_cpx(), st.B0.a12.to_cpx(), st.B0.a21.to_cpx(), st.B0.a22.to_cpx()};
    out.B1 = {st.B1.a11.to_cpx(), st.B1.a12.to_cpx(), st.B1.a21.to_cpx(), st.B1.a22.to_cpx()};
    out.theta = {st.theta.theta0.to_cpx(), st.theta.theta1.to_cpx(), st.theta.theta_inf.to_cpx()};
    return out;
}

} // namespace pv5
