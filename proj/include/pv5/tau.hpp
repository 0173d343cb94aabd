#pragma once

#include <cstddef>
#include <vector>

#include "pv5/deformation.hpp"
#include "pv5/transform.hpp"

namespace pv5 {

/// Residual of the chart relation between the two residue densities:
///   (-s^2) * 1/2 res_{xi=s} tr Btilde^2  -  tr B1^2/(t+1)  -  1/2 res_{z=t} tr B^2.
/// Identically zero; the float version returns its magnitude.
template <class T>
T coordinate_relation_residual(const SystemState<T>& st) {
    const auto [lhs, rhs] = xi_residue_identity(st);
    (void)rhs;
    return lhs - tr_B1_squared(st) / (st.t + T(1)) - miwa_residue(st);
}

inline double coordinate_relation_check(const SystemStateC& st) {
    return std::abs(coordinate_relation_residual(st));
}

/// Branch-continuous logarithm along a sample sequence: principal value at
/// the first point, then principal increments. Valid whenever consecutive
/// values do not jump by more than a half turn, which dense output ensures.
inline std::vector<Cpx> continuous_log(const std::vector<Cpx>& values) {
    std::vector<Cpx> out;
    out.reserve(values.size());
    Cpx acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        acc = (i == 0) ? std::log(values[0]) : acc + std::log(values[i] / values[i - 1]);
        out.push_back(acc);
    }
    return out;
}

/// | ln tau_A(t1) - ln tau_B(t1) | for two homotopic paths with common
/// endpoints. Distinct winding around t = 0 means distinct points of the
/// universal cover, so that case is rejected rather than compared.
inline double path_independence_check(const SystemStateC& state0, const PathSpec& pathA,
                                      const PathSpec& pathB, const IntegratorConfig& cfg) {
    validate_path(pathA);
    validate_path(pathB);
    const double scale = std::max(1.0, std::abs(state0.t));
    if (std::abs(pathA.waypoints.front() - pathB.waypoints.front()) > 1e-12 * scale ||
        std::abs(pathA.waypoints.back() - pathB.waypoints.back()) > 1e-12 * scale)
        throw Error(ErrorCode::InvalidPath, "paths must share both endpoints");

    std::vector<Cpx> loop = pathA.waypoints;
    const auto rb = reversed(pathB);
    loop.insert(loop.end(), rb.waypoints.begin(), rb.waypoints.end());
    if (winding_around_origin(loop) != 0)
        throw Error(ErrorCode::WindingMismatch, "paths wind differently around t = 0");

    const Trajectory ta = integrate_path(state0, pathA, cfg);
    if (ta.status != TerminalStatus::completed)
        throw Error(ErrorCode::BlowUpOnPath, "path A hits the Theta divisor");
    const Trajectory tb = integrate_path(state0, pathB, cfg);
    if (tb.status != TerminalStatus::completed)
        throw Error(ErrorCode::BlowUpOnPath, "path B hits the Theta divisor");

    return std::abs(ta.samples.back().lntau - tb.samples.back().lntau);
}

struct ZeroCertificate {
    Cpx t_star;
    Cpx linear_coefficient;  // c in tau ~ c (t - t*)
    Cpx slope;               // fitted d ln tau / d ln(t - t*); 1 certifies simplicity
    double fit_residual = 0.0;
    std::size_t points_used = 0;
};

/// Certifies a simple zero of tau at t* from a blown-up trajectory by the
/// log-slope fit ln tau ~ ln c + p ln(t - t*). The window sits behind the
/// stop point: close enough that the pole dominates, far enough that the
/// uncertainty of t* cannot bend the fit. p away from 1 (non-simple
/// vanishing, or a bad t*) is an error, never a silent certificate.
inline ZeroCertificate simple_zero_fit(const Trajectory& traj, Cpx t_star,
                                       double slope_tol = 0.05) {
    if (traj.status != TerminalStatus::blow_up)
        throw Error(ErrorCode::Precondition, "trajectory did not blow up");
    const std::size_t n = traj.samples.size();
    if (n < 8) throw Error(ErrorCode::FitFailed, "too few samples near the pole");

    const double ind_last = detail::sample_indicator(traj.samples[n - 1]);
    std::size_t lo = n;
    while (lo > 0 && detail::sample_indicator(traj.samples[lo - 1]) >= 1e-4 * ind_last) --lo;
    if (n - lo < 8) lo = (n >= 8) ? n - 8 : 0;

    double r_max = 0.0;
    for (std::size_t j = lo; j < n; ++j)
        r_max = std::max(r_max, std::abs(traj.samples[j].t - t_star));

    std::vector<Cpx> xs, ys;
    std::vector<Cpx> diffs;
    for (std::size_t j = lo; j < n; ++j) {
        const Cpx d = traj.samples[j].t - t_star;
        if (std::abs(d) < r_max / 100.0) continue;  // too close: t* noise dominates
        diffs.push_back(d);
        ys.push_back(traj.samples[j].lntau);
    }
    if (diffs.size() < 5) throw Error(ErrorCode::FitFailed, "fit window collapsed");
    xs = continuous_log(diffs);

    const auto fit = detail::fit_line(xs, ys);

    ZeroCertificate cert;
    cert.t_star = t_star;
    cert.slope = fit.a;
    cert.linear_coefficient = std::exp(fit.b);
    cert.fit_residual = fit.rel_residual;
    cert.points_used = xs.size();
    if (std::abs(fit.a - 1.0) > slope_tol)
        throw Error(ErrorCode::FitFailed, "log-slope differs from 1: zero not simple");
    return cert;
}

/// Max mismatch between the stored d ln tau / dt and a centered finite
/// difference of the accumulated ln tau on each segment's uniform grid.
inline double dlntau_fd_mismatch(const Trajectory& traj) {
    double worst = 0.0;
    for (std::size_t seg = 0; seg < traj.segment_grid.size(); ++seg) {
        const auto& grid = traj.segment_grid[seg];
        if (grid.size() < 3) continue;
        const Cpx wa = traj.path.waypoints[seg], wb = traj.path.waypoints[seg + 1];
        const Cpx h = traj.grid_spacing[seg] * (wb - wa) / std::abs(wb - wa);
        for (std::size_t p = 1; p + 1 < grid.size(); ++p) {
            const Cpx fd =
                (traj.samples[grid[p + 1]].lntau - traj.samples[grid[p - 1]].lntau) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - traj.samples[grid[p]].dlntau));
        }
    }
    return worst;
}

} // namespace pv5
