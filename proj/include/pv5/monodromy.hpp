#pragma once

#include <algorithm>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "pv5/deformation.hpp"
#include "pv5/rk45.hpp"
#include "pv5/system.hpp"

namespace pv5 {

struct CircleSpec {
    Cpx center;     // must be one of the Fuchsian points 0 or t
    double radius = 0.0;
};

enum class LoopOrientation { ccw, cw };

/// A based loop: from the base point, out to each circle in order, once
/// around it, and back. cw traverses the reverse of the ccw loop.
struct LoopSpec {
    Cpx base;
    std::vector<CircleSpec> circles;
    LoopOrientation orientation = LoopOrientation::ccw;
};

/// Deterministic default geometry: both circles of radius |t|/4, base point
/// t*(1/2 - i), which sits at distance ~1.118|t| from both centers and well
/// off the segment between them.
inline std::pair<LoopSpec, LoopSpec> default_loops(Cpx t) {
    const double r = std::abs(t) / 4.0;
    const Cpx base = t * Cpx(0.5, -1.0);
    return {LoopSpec{base, {CircleSpec{Cpx(0.0), r}}},
            LoopSpec{base, {CircleSpec{t, r}}}};
}

inline void validate_loop(const LoopSpec& loop, Cpx t) {
    const double scale = std::max(1.0, std::abs(t));
    const Cpx sing[2] = {Cpx(0.0), t};
    if (loop.circles.empty())
        throw Error(ErrorCode::BadConfig, "loop has no circles");
    for (const CircleSpec& c : loop.circles) {
        if (!(c.radius > 0.0)) throw Error(ErrorCode::BadConfig, "circle radius must be positive");
        const bool at0 = std::abs(c.center) <= 1e-9 * scale;
        const bool att = std::abs(c.center - t) <= 1e-9 * scale;
        if (!at0 && !att)
            throw Error(ErrorCode::BadConfig, "circle must be centered at 0 or t");
        const Cpx other = at0 ? t : Cpx(0.0);
        if (c.radius >= std::abs(c.center - other) * (1.0 - 1e-9))
            throw Error(ErrorCode::LoopThroughSingularity,
                        "circle encloses or touches the other singularity");
        if (std::abs(loop.base - c.center) <= c.radius * (1.0 + 1e-9))
            throw Error(ErrorCode::LoopThroughSingularity, "base point inside a circle");
        const Cpx entry = c.center + c.radius * (loop.base - c.center) / std::abs(loop.base - c.center);
        for (const Cpx& s : sing)
            if (point_segment_distance(s, loop.base, entry) <= 1e-9 * scale)
                throw Error(ErrorCode::LoopThroughSingularity,
                            "connecting segment passes through a singularity");
    }
}

namespace detail {

inline Mat2c mat_of(const CVec<4>& y) { return {y[0], y[1], y[2], y[3]}; }
inline CVec<4> vec_of(const Mat2c& m) { return {m.a11, m.a12, m.a21, m.a22}; }

inline bool bounded4(const CVec<4>& y) {
    double m = 0.0;
    for (const Cpx& v : y) m = std::max(m, std::abs(v));
    return std::isfinite(m) && m < 1e12;
}

/// Parallel transport of Y along one analytic piece z(x), x in [0, len],
/// for dY/dz = B(z,t) Y. zfun(x) -> (z, dz/dx).
template <class ZFun>
Mat2c transport_piece(const SystemStateC& st, Mat2c Y, double len, ZFun&& zfun,
                      const StepControl& ctl) {
    auto rhs = [&](double x, const CVec<4>& y, CVec<4>& dy) {
        const auto [z, dz] = zfun(x);
        const Mat2c B = eval_B(st, z);
        const Mat2c M = (B * mat_of(y)) * dz;
        dy = vec_of(M);
    };
    Dopri5<4, decltype(rhs)> solver(rhs, ctl);
    solver.start(0.0, vec_of(Y));
    const auto outcome =
        solver.advance_to(len, [&](double, const CVec<4>& y) { return bounded4(y); });
    if (outcome != AdvanceOutcome::reached)
        throw Error(ErrorCode::StepCollapse, "loop integration failed to converge");
    return mat_of(solver.y());
}

} // namespace detail

/// Monodromy matrix of dY/dz = B(z,t) Y along the loop, in the frame of the
/// fundamental solution normalized to the identity at the base point.
inline Mat2c monodromy_matrix(const SystemStateC& st, const LoopSpec& loop,
                              const IntegratorConfig& cfg) {
    validate_loop(loop, st.t);
    const StepControl ctl = cfg.step_control();
    Mat2c Y = Mat2c::identity();

    const bool cw = loop.orientation == LoopOrientation::cw;
    std::vector<CircleSpec> order = loop.circles;
    if (cw) std::reverse(order.begin(), order.end());

    for (const CircleSpec& c : order) {
        const Cpx out_dir = (loop.base - c.center) / std::abs(loop.base - c.center);
        const Cpx entry = c.center + c.radius * out_dir;
        const double seg_len = std::abs(entry - loop.base);
        const Cpx seg_dir = (entry - loop.base) / seg_len;
        const double phi0 = std::arg(entry - c.center);
        const double sign = cw ? -1.0 : 1.0;

        Y = detail::transport_piece(
            st, Y, seg_len,
            [&](double x) { return std::pair<Cpx, Cpx>(loop.base + x * seg_dir, seg_dir); }, ctl);
        Y = detail::transport_piece(
            st, Y, 2.0 * std::numbers::pi,
            [&](double x) {
                const Cpx w = c.radius * std::exp(Cpx(0.0, phi0 + sign * x));
                return std::pair<Cpx, Cpx>(c.center + w, sign * Cpx(0.0, 1.0) * w);
            },
            ctl);
        Y = detail::transport_piece(
            st, Y, seg_len,
            [&](double x) { return std::pair<Cpx, Cpx>(entry - x * seg_dir, -seg_dir); }, ctl);
    }
    return Y;
}

/// Loop monodromy matrices around 0 and t with their conjugation invariants
/// tr M0, tr Mt, tr(M0 Mt). The reported matrices come from a rtol/4 rerun;
/// the accuracy estimate is the difference between the two runs plus the
/// drift of det M from 1 (exact for traceless residues).
struct MonodromyReport {
    Cpx t;
    Mat2c M0, Mt;
    Cpx tr_M0, tr_Mt, tr_M0Mt;
    double accuracy = 0.0;
};

inline MonodromyReport monodromy_invariants(const SystemStateC& st, const IntegratorConfig& cfg) {
    if (st.t == Cpx(0.0)) throw Error(ErrorCode::ZeroBasePoint, "t is zero");
    const auto [loop0, loopt] = default_loops(st.t);

    IntegratorConfig fine = cfg;
    fine.rtol = cfg.rtol / 4.0;
    fine.atol = cfg.atol / 4.0;

    const Mat2c M0c = monodromy_matrix(st, loop0, cfg);
    const Mat2c Mtc = monodromy_matrix(st, loopt, cfg);
    const Mat2c M0 = monodromy_matrix(st, loop0, fine);
    const Mat2c Mt = monodromy_matrix(st, loopt, fine);

    MonodromyReport rep;
    rep.t = st.t;
    rep.M0 = M0;
    rep.Mt = Mt;
    rep.tr_M0 = trace(M0);
    rep.tr_Mt = trace(Mt);
    rep.tr_M0Mt = trace(M0 * Mt);
    rep.accuracy = std::max({frobenius_norm(M0 - M0c), frobenius_norm(Mt - Mtc),
                             std::abs(det(M0) - 1.0), std::abs(det(Mt) - 1.0)});
    return rep;
}

/// Max deviation of the three invariants across trajectory samples from
/// their values at the first sampled point: the isomonodromy certificate
/// for the Fuchsian part of the monodromy data.
inline double isomonodromy_drift(const Trajectory& traj, const std::vector<std::size_t>& indices,
                                 const IntegratorConfig& cfg) {
    if (indices.empty())
        throw Error(ErrorCode::Precondition, "no sample indices given");
    bool first = true;
    Cpx ref0, reft, ref01;
    double drift = 0.0;
    for (const std::size_t idx : indices) {
        const SystemStateC st = traj.state_at(idx);
        if (detail::sample_indicator(traj.samples.at(idx)) > 1e6)
            throw Error(ErrorCode::Precondition, "sample too close to a blow-up");
        const auto rep = monodromy_invariants(st, cfg);
        if (first) {
            ref0 = rep.tr_M0;
            reft = rep.tr_Mt;
            ref01 = rep.tr_M0Mt;
            first = false;
        } else {
            drift = std::max({drift, std::abs(rep.tr_M0 - ref0), std::abs(rep.tr_Mt - reft),
                              std::abs(rep.tr_M0Mt - ref01)});
        }
    }
    return drift;
}

} // namespace pv5
