#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pv5/deformation.hpp"

namespace pv5 {

/// Parameters of the second-order equation satisfied by u(t):
///   alpha = (theta0 - theta1 + theta_inf)^2 / 8,
///   beta  = -(theta0 - theta1 - theta_inf)^2 / 8,
///   gamma = 1 - theta0 - theta1,
///   delta = -1/2.
template <class T>
struct PVParams {
    T alpha{}, beta{}, gamma{}, delta{};
};

template <class T>
PVParams<T> pv_params(const ThetaTriple<T>& th) {
    const T d = th.theta0 - th.theta1;
    PVParams<T> p;
    p.alpha = (d + th.theta_inf) * (d + th.theta_inf) / T(8);
    p.beta = -((d - th.theta_inf) * (d - th.theta_inf)) / T(8);
    p.gamma = T(1) - th.theta0 - th.theta1;
    p.delta = -(T(1) / T(2));
    return p;
}

/// u = b1_12 (b0_11 + theta0/2) / ( b0_12 (b1_11 + theta1/2) ).
/// Invariant under the diagonal gauge action, since both 12-entries pick up
/// the same factor.
template <class T>
T u_of_state(const SystemState<T>& st) {
    if (is_zero(st.B0.a12))
        throw Error(ErrorCode::UndefinedU, "denominator factor b0_12 vanishes");
    const T d2 = st.B1.a11 + st.theta.theta1 / T(2);
    if (is_zero(d2))
        throw Error(ErrorCode::UndefinedU, "denominator factor b1_11 + theta1/2 vanishes");
    return st.B1.a12 * (st.B0.a11 + st.theta.theta0 / T(2)) / (st.B0.a12 * d2);
}

/// Derivative of u along the deformation flow: quotient rule over the
/// u-formula with entry derivatives taken from deformation_rhs.
template <class T>
T du_dt(const SystemState<T>& st) {
    const auto [dB0, dB1] = deformation_rhs(st);
    if (is_zero(st.B0.a12))
        throw Error(ErrorCode::UndefinedU, "denominator factor b0_12 vanishes");
    const T half0 = st.theta.theta0 / T(2), half1 = st.theta.theta1 / T(2);
    const T d2 = st.B1.a11 + half1;
    if (is_zero(d2))
        throw Error(ErrorCode::UndefinedU, "denominator factor b1_11 + theta1/2 vanishes");

    const T num = st.B1.a12 * (st.B0.a11 + half0);
    const T den = st.B0.a12 * d2;
    const T dnum = dB1.a12 * (st.B0.a11 + half0) + st.B1.a12 * dB0.a11;
    const T dden = dB0.a12 * d2 + st.B0.a12 * dB1.a11;
    return (dnum * den - num * dden) / (den * den);
}

/// Right side of the u-equation, with the individual terms returned so a
/// residual can be reported relative to the largest one.
template <class T>
struct PVRhsTerms {
    T quad, damp, rational, linear, pole;

    T sum() const { return quad + damp + rational + linear + pole; }
};

template <class T>
PVRhsTerms<T> pv_rhs_terms(const T& u, const T& up, const T& t, const PVParams<T>& p) {
    PVRhsTerms<T> r;
    r.quad = (T(1) / (T(2) * u) + T(1) / (u - T(1))) * up * up;
    r.damp = -up / t;
    r.rational = ((u - T(1)) * (u - T(1)) / (t * t)) * (p.alpha * u + p.beta / u);
    r.linear = p.gamma * u / t;
    r.pole = p.delta * u * (u + T(1)) / (u - T(1));
    return r;
}

struct PVResidualReport {
    Cpx t;
    Cpx u, du, d2u;
    Cpx residual;
    double absolute = 0.0;
    double relative = 0.0;  // against the largest right-side term
};

namespace detail {

// Centered finite-difference weights on a uniform grid.
inline const double* fd_first(int stencil) {
    static const double w5[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    static const double w7[7] = {-1.0 / 60, 9.0 / 60, -45.0 / 60, 0.0,
                                 45.0 / 60, -9.0 / 60, 1.0 / 60};
    static const double w9[9] = {3.0 / 840,   -32.0 / 840, 168.0 / 840, -672.0 / 840, 0.0,
                                 672.0 / 840, -168.0 / 840, 32.0 / 840, -3.0 / 840};
    switch (stencil) {
        case 5: return w5;
        case 7: return w7;
        default: return w9;
    }
}

inline const double* fd_second(int stencil) {
    static const double w5[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    static const double w7[7] = {2.0 / 180,   -27.0 / 180, 270.0 / 180, -490.0 / 180,
                                 270.0 / 180, -27.0 / 180, 2.0 / 180};
    static const double w9[9] = {-9.0 / 5040,   128.0 / 5040,  -1008.0 / 5040,
                                 8064.0 / 5040, -14350.0 / 5040, 8064.0 / 5040,
                                 -1008.0 / 5040, 128.0 / 5040,  -9.0 / 5040};
    switch (stencil) {
        case 5: return w5;
        case 7: return w7;
        default: return w9;
    }
}

} // namespace detail

/// Residual of the u-equation at a grid sample, with derivatives from
/// centered finite differences on the dense grid (the first derivative can
/// come from the flow instead). The window must sit inside one segment;
/// complex spacing h = grid spacing times the segment direction is exact
/// there because t is affine in arc-length.
inline PVResidualReport pv_residual(const Trajectory& traj, std::size_t index, int stencil = 5,
                                    bool first_derivative_from_flow = false,
                                    double singular_tol = 1e-8) {
    if (stencil != 5 && stencil != 7 && stencil != 9)
        throw Error(ErrorCode::BadConfig, "stencil must be 5, 7 or 9");
    if (index >= traj.samples.size())
        throw Error(ErrorCode::StencilOutOfRange, "sample index out of range");
    if (!traj.samples[index].on_grid)
        throw Error(ErrorCode::StencilOutOfRange, "sample is not on the dense grid");

    const int r = (stencil - 1) / 2;

    // Locate a centered window inside one segment's grid (a junction sample
    // belongs to two segments; either may host the window).
    const DenseSample& center = traj.samples[index];
    int seg = -1;
    std::size_t pos = 0;
    for (int cand : {center.segment, center.segment + 1}) {
        if (cand < 0 || (std::size_t)cand >= traj.segment_grid.size()) continue;
        const auto& grid = traj.segment_grid[cand];
        const auto it = std::lower_bound(grid.begin(), grid.end(), index);
        if (it == grid.end() || *it != index) continue;
        const std::size_t p = (std::size_t)(it - grid.begin());
        if (p >= (std::size_t)r && p + r < grid.size()) {
            seg = cand;
            pos = p;
            break;
        }
    }
    if (seg < 0)
        throw Error(ErrorCode::StencilOutOfRange, "stencil window leaves the segment");

    const auto& grid = traj.segment_grid[seg];
    const Cpx wa = traj.path.waypoints[seg], wb = traj.path.waypoints[seg + 1];
    const Cpx h = traj.grid_spacing[seg] * (wb - wa) / std::abs(wb - wa);

    std::vector<Cpx> us((std::size_t)stencil);
    for (int i = 0; i < stencil; ++i) {
        const Cpx u = u_of_state(traj.state_at(grid[pos - r + i]));
        if (std::abs(u) < singular_tol || std::abs(u - 1.0) < singular_tol)
            throw Error(ErrorCode::EquationSingular, "u too close to 0 or 1 in the window");
        us[(std::size_t)i] = u;
    }

    const double* w1 = detail::fd_first(stencil);
    const double* w2 = detail::fd_second(stencil);
    Cpx d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < stencil; ++i) {
        d1 += w1[i] * us[(std::size_t)i];
        d2 += w2[i] * us[(std::size_t)i];
    }
    d1 /= h;
    d2 /= (h * h);

    PVResidualReport rep;
    rep.t = center.t;
    rep.u = us[(std::size_t)r];
    rep.du = first_derivative_from_flow ? du_dt(traj.state_at(index)) : d1;
    rep.d2u = d2;

    const auto params = pv_params(traj.theta);
    const auto terms = pv_rhs_terms(rep.u, rep.du, rep.t, params);
    rep.residual = rep.d2u - terms.sum();
    rep.absolute = std::abs(rep.residual);
    const double scale = std::max({std::abs(rep.d2u), std::abs(terms.quad), std::abs(terms.damp),
                                   std::abs(terms.rational), std::abs(terms.linear),
                                   std::abs(terms.pole)});
    rep.relative = scale > 0.0 ? rep.absolute / scale : rep.absolute;
    return rep;
}

/// u along a trajectory with every undefined sample classified: near a
/// blow-up the pole of u is the Theta divisor showing through; elsewhere an
/// exact zero of the denominator factors is named.
struct UEvent {
    std::size_t index = 0;
    bool blow_up_related = false;
    std::string factor;  // which denominator factor vanished
};

struct UTrace {
    std::vector<std::optional<Cpx>> values;
    std::vector<UEvent> events;
};

inline UTrace u_trace(const Trajectory& traj) {
    UTrace out;
    out.values.reserve(traj.samples.size());
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        try {
            out.values.emplace_back(u_of_state(traj.state_at(i)));
        } catch (const Error& e) {
            out.values.emplace_back(std::nullopt);
            UEvent ev;
            ev.index = i;
            ev.blow_up_related = traj.status == TerminalStatus::blow_up &&
                                 detail::sample_indicator(traj.samples[i]) >
                                     0.001 * traj.config.blowup_threshold;
            ev.factor = e.what();
            out.events.push_back(std::move(ev));
        }
    }
    return out;
}

} // namespace pv5
