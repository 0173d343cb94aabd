#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pv5/path.hpp"
#include "pv5/rk45.hpp"
#include "pv5/system.hpp"

namespace pv5 {

/// Right sides of the deformation flow, obtained by matching residues in
/// the flatness condition of the connection form:
///   dB0/dt = [B1, B0]/t,
///   dB1/dt = [E, B1] + [B0, B1]/t,   E = diag(1,0).
/// Both are commutator flows, so the spectra of B0 and B1 and the diagonal
/// of B0+B1 are first integrals. zero_curvature_residual certifies the
/// derivation at runtime; it vanishes identically for these right sides.
template <class T>
std::pair<Mat2<T>, Mat2<T>> deformation_rhs(const SystemState<T>& st) {
    if (is_zero(st.t)) throw Error(ErrorCode::ZeroBasePoint, "t is zero");
    const Mat2<T> c = commutator(st.B0, st.B1);
    const Mat2<T> dB0 = -c / st.t;
    const Mat2<T> dB1 = commutator(irregular_leading<T>(), st.B1) + c / st.t;
    return {dB0, dB1};
}

/// Negative control: the dB0 commutator with its sign flipped. Used by the
/// verification tooling to prove the checks can actually fail.
template <class T>
std::pair<Mat2<T>, Mat2<T>> deformation_rhs_flipped(const SystemState<T>& st) {
    auto [dB0, dB1] = deformation_rhs(st);
    return {-dB0, dB1};
}

/// R(z) = d_z C - d_t A - [A, C] with A = B(z,t), C = -B1/(z-t) and d_t A
/// expanded through the supplied derivatives (dB0, dB1). In closed form:
///   R(z) = -dB0/z - dB1/(z-t) + [B0,B1]/(z(z-t)) + [E,B1]/(z-t).
template <class T>
Mat2<T> zero_curvature_residual(const SystemState<T>& st, const Mat2<T>& dB0,
                                const Mat2<T>& dB1, const T& z) {
    if (is_zero(z) || is_zero(z - st.t))
        throw Error(ErrorCode::PoleEvaluation, "z at a singular point");
    const Mat2<T> com01 = commutator(st.B0, st.B1);
    const Mat2<T> comE1 = commutator(irregular_leading<T>(), st.B1);
    return -(dB0 / z) - dB1 / (z - st.t) + com01 / (z * (z - st.t)) + comE1 / (z - st.t);
}

/// Max Frobenius norm of R over the sample points, with the flow's own
/// right sides. Rounding-level output certifies deformation_rhs.
inline double verify_zero_curvature(const SystemStateC& st, std::span<const Cpx> zsamples) {
    const auto [dB0, dB1] = deformation_rhs(st);
    double worst = 0.0;
    for (const Cpx& z : zsamples)
        worst = std::max(worst, frobenius_norm(zero_curvature_residual(st, dB0, dB1, z)));
    return worst;
}

enum class RhsVariant { standard, flipped_commutator };

struct IntegratorConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 0.1;
    double min_step = 1e-12;
    double dense_spacing = 1e-3;      // arc-length between stored grid samples
    double blowup_threshold = 1e8;    // max |entry| declaring a pole
    RhsVariant rhs_variant = RhsVariant::standard;

    void validate() const {
        if (!(rtol > 0.0) || !(atol > 0.0))
            throw Error(ErrorCode::BadConfig, "tolerances must be positive");
        if (!(min_step > 0.0) || !(min_step < max_step))
            throw Error(ErrorCode::BadConfig, "need 0 < min_step < max_step");
        if (!(dense_spacing >= 1e-12))
            throw Error(ErrorCode::BadConfig, "dense_spacing must be at least 1e-12");
        if (!(blowup_threshold > 1.0))
            throw Error(ErrorCode::BadConfig, "blowup_threshold must exceed 1");
    }

    StepControl step_control() const { return {rtol, atol, max_step, min_step}; }
};

struct DenseSample {
    double arclen = 0.0;   // global arc-length along the path
    Cpx t;
    Mat2c B0, B1;
    Cpx lntau;             // accumulated ln tau, ln tau(t0) = 0
    Cpx dlntau;            // d ln tau / dt = miwa_residue at the sample
    int segment = 0;
    bool on_grid = false;  // lies on the uniform dense grid of its segment
};

struct BlowUpEvent {
    Cpx t_stop;                   // last accepted point
    Cpx t_star_estimate;          // reciprocal-fit estimate (t_stop if unrefined)
    double t_star_error = 0.0;
    double indicator = 0.0;       // max |entry| at stop
    double min_step_achieved = 0.0;
    double last_step = 0.0;
    bool refined = false;
};

enum class TerminalStatus { completed, blow_up };

struct Trajectory {
    PathSpec path;
    ThetaTripleC theta;
    IntegratorConfig config;
    std::vector<DenseSample> samples;
    // Per segment: indices into samples of that segment's uniform grid
    // nodes, endpoints included. A junction sample is listed in both of the
    // segments it bounds.
    std::vector<std::vector<std::size_t>> segment_grid;
    std::vector<double> grid_spacing;  // arc-length between grid nodes, per segment
    TerminalStatus status = TerminalStatus::completed;
    std::optional<BlowUpEvent> blow_up;

    SystemStateC state_at(std::size_t i) const {
        const DenseSample& s = samples.at(i);
        return SystemStateC{s.t, s.B0, s.B1, theta};
    }
};

struct ThetaPointEstimate {
    Cpx t_star;
    double error_estimate = 0.0;  // rough scale, from the fit residual
    Cpx coefficient;              // c in the model quantity ~ c/(t - t*)
    double fit_residual = 0.0;    // relative rms of the reciprocal fit
    // Which growth channel carried the simple-pole fit: the dominant matrix
    // entry, or d ln tau (whose reciprocal vanishes linearly at any simple
    // tau zero even when the entries blow up at second order there).
    enum class Channel { entry, log_residue } channel = Channel::entry;
};

namespace detail {

inline CVec<9> pack(const Mat2c& B0, const Mat2c& B1, Cpx lntau) {
    return {B0.a11, B0.a12, B0.a21, B0.a22, B1.a11, B1.a12, B1.a21, B1.a22, lntau};
}

inline void unpack(const CVec<9>& y, Mat2c& B0, Mat2c& B1, Cpx& lntau) {
    B0 = {y[0], y[1], y[2], y[3]};
    B1 = {y[4], y[5], y[6], y[7]};
    lntau = y[8];
}

inline double indicator_of(const CVec<9>& y) {
    double m = 0.0;
    for (std::size_t i = 0; i < 8; ++i) m = std::max(m, std::abs(y[i]));
    return m;
}

/// Least-squares line w = a*t + b through complex points, returning the
/// pair (a, b) and the relative rms residual of the fit.
struct LineFit {
    Cpx a, b;
    double rel_residual;
};

/// Weighted complex least squares for w = a t + b. Unit weights give the
/// plain fit; weights 1/|w| make the residual relative, which stops the
/// large far-field values from steering the extrapolated root.
inline LineFit fit_line(std::span<const Cpx> ts, std::span<const Cpx> ws,
                        std::span<const double> weights = {}) {
    const std::size_t n = ts.size();
    auto q = [&](std::size_t j) {
        if (weights.empty()) return 1.0;
        return weights[j] * weights[j];
    };

    double sq = 0.0;
    Cpx mean_t = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        sq += q(j);
        mean_t += q(j) * ts[j];
    }
    mean_t /= sq;

    Cpx stw = 0.0, sw = 0.0;
    double stt = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const Cpx tau = ts[j] - mean_t;
        stt += q(j) * std::norm(tau);
        stw += q(j) * std::conj(tau) * ws[j];
        sw += q(j) * ws[j];
    }
    LineFit f;
    f.a = (stt > 0.0) ? stw / stt : Cpx(0.0);
    const Cpx c = sw / sq;
    f.b = c - f.a * mean_t;

    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        num += q(j) * std::norm(ws[j] - (f.a * ts[j] + f.b));
        den += q(j) * std::norm(ws[j]);
    }
    f.rel_residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return f;
}

} // namespace detail

namespace detail {

inline Cpx sample_entry(const DenseSample& s, std::size_t i) {
    const Cpx e[8] = {s.B0.a11, s.B0.a12, s.B0.a21, s.B0.a22,
                      s.B1.a11, s.B1.a12, s.B1.a21, s.B1.a22};
    return e[i];
}

inline double sample_indicator(const DenseSample& s) {
    return std::max(max_abs_entry(s.B0), max_abs_entry(s.B1));
}

} // namespace detail

/// Refines the pole location after a blow-up by least squares on
/// reciprocals: a quantity growing like c/(t - t*) has a reciprocal that
/// vanishes linearly at t*. The fit window is an indicator band behind the
/// stopping point -- close enough that the pole dominates, far enough that
/// extrapolating the root stays well conditioned.
///
/// The dominant matrix entry is fitted first. At actual tau zeros of this
/// family the leading entry blows up at second order (the residue matrices
/// inherit a 1/u^2 from the gauge normalization) while d ln tau keeps an
/// exact first-order pole, so when the entry channel is inconsistent with a
/// simple pole the fit falls back to the stored log-residue samples. Growth
/// that fits neither channel is reported, not absorbed.
inline ThetaPointEstimate locate_theta_point(const Trajectory& traj,
                                             double residual_tol = 0.05) {
    if (traj.status != TerminalStatus::blow_up)
        throw Error(ErrorCode::Precondition, "trajectory did not blow up");
    const std::size_t n = traj.samples.size();
    if (n < 5) throw Error(ErrorCode::FitFailed, "too few samples near the pole");

    const double ind_last = detail::sample_indicator(traj.samples[n - 1]);
    if (!(ind_last > 0.0)) throw Error(ErrorCode::FitFailed, "no growth at the stop point");

    // Contiguous tail with indicator within 1e4x of the stop value, then
    // drop the closest samples (indicator above 1/3 of the stop value).
    std::size_t lo = n;
    while (lo > 0 && detail::sample_indicator(traj.samples[lo - 1]) >= 1e-4 * ind_last) --lo;
    std::vector<std::size_t> window;
    for (std::size_t j = lo; j < n; ++j)
        if (detail::sample_indicator(traj.samples[j]) <= ind_last / 3.0) window.push_back(j);
    if (window.size() < 5) {
        window.clear();
        for (std::size_t j = lo; j < n; ++j) window.push_back(j);
    }
    if (window.size() < 5) throw Error(ErrorCode::FitFailed, "too few samples near the pole");

    // Even subsample, at most 48 points.
    std::vector<std::size_t> picks;
    const std::size_t m = window.size(), cap = 48;
    if (m <= cap) {
        picks = window;
    } else {
        for (std::size_t i = 0; i < cap; ++i) picks.push_back(window[(i * (m - 1)) / (cap - 1)]);
    }

    // Dominant entry at the innermost picked sample.
    const DenseSample& inner = traj.samples[picks.back()];
    std::size_t dom = 0;
    for (std::size_t i = 1; i < 8; ++i)
        if (std::abs(detail::sample_entry(inner, i)) > std::abs(detail::sample_entry(inner, dom)))
            dom = i;

    auto fit_once = [&](auto&& value_of,
                        const std::vector<std::size_t>& idx) -> std::optional<ThetaPointEstimate> {
        std::vector<Cpx> ts, ws;
        std::vector<double> qs;
        for (std::size_t j : idx) {
            const Cpx g = value_of(traj.samples[j]);
            if (g == Cpx(0.0)) continue;
            ts.push_back(traj.samples[j].t);
            ws.push_back(1.0 / g);
            qs.push_back(std::abs(g));  // 1/|w|: relative residuals
        }
        if (ts.size() < 5) return std::nullopt;
        const auto fit = detail::fit_line(ts, ws, qs);
        if (fit.a == Cpx(0.0) || fit.rel_residual > residual_tol) return std::nullopt;
        ThetaPointEstimate est;
        est.t_star = -fit.b / fit.a;
        est.coefficient = 1.0 / fit.a;
        est.fit_residual = fit.rel_residual;
        est.error_estimate = fit.rel_residual * std::abs(ts.front() - est.t_star);
        // A pole explains the growth only if its root sits just beyond the
        // window. Slowly varying data (secular or exponential growth) can
        // fit a line too, but puts the root far outside -- reject it.
        const double span = std::abs(ts.front() - ts.back());
        if (std::abs(est.t_star - ts.back()) > 3.0 * span) return std::nullopt;
        return est;
    };

    // Two passes: a first fit over the indicator band, then a refit on the
    // samples closest to the first root, where the higher-order terms of
    // the pole expansion bias the extrapolation least.
    auto reciprocal_fit = [&](auto&& value_of) -> std::optional<ThetaPointEstimate> {
        auto first = fit_once(value_of, picks);
        if (!first) return std::nullopt;
        double d_min = std::numeric_limits<double>::infinity();
        for (std::size_t j = lo; j < n; ++j)
            d_min = std::min(d_min, std::abs(traj.samples[j].t - first->t_star));
        std::vector<std::size_t> inner_band;
        for (std::size_t j = lo; j < n; ++j) {
            const double d = std::abs(traj.samples[j].t - first->t_star);
            if (d >= 2.0 * d_min && d <= 60.0 * d_min) inner_band.push_back(j);
        }
        if (inner_band.size() >= 8) {
            if (auto second = fit_once(value_of, inner_band)) return second;
        }
        return first;
    };

    if (auto est = reciprocal_fit([&](const DenseSample& s) { return detail::sample_entry(s, dom); })) {
        est->channel = ThetaPointEstimate::Channel::entry;
        return *est;
    }
    if (auto est = reciprocal_fit([](const DenseSample& s) { return s.dlntau; })) {
        est->channel = ThetaPointEstimate::Channel::log_residue;
        return *est;
    }
    throw Error(ErrorCode::FitFailed, "growth not consistent with a simple pole");
}

/// Integrates the deformation flow along `path`, accumulating ln tau as an
/// extra component of the same embedded pair (so the quadrature order always
/// matches the integrator's). A sample is stored after every accepted step;
/// samples on the per-segment uniform grid (spacing <= dense_spacing, step
/// ends pinned there) are flagged on_grid. Stops with BlowUp status when an
/// entry passes blowup_threshold.
inline Trajectory integrate_path(const SystemStateC& state0, const PathSpec& path,
                                 const IntegratorConfig& cfg) {
    cfg.validate();
    validate_path(path);
    if (std::abs(state0.t - path.waypoints.front()) > 1e-9 * std::max(1.0, std::abs(state0.t)))
        throw Error(ErrorCode::InvalidPath, "state0.t must equal the first waypoint");

    Trajectory traj;
    traj.path = path;
    traj.theta = state0.theta;
    traj.config = cfg;
    traj.status = TerminalStatus::completed;

    CVec<9> y = detail::pack(state0.B0, state0.B1, Cpx(0.0));
    const double initial_indicator = std::max(detail::indicator_of(y), 1.0);

    auto push_sample = [&](double global_arclen, Cpx t, const CVec<9>& yy, int seg,
                           bool on_grid) {
        DenseSample s;
        s.arclen = global_arclen;
        s.t = t;
        detail::unpack(yy, s.B0, s.B1, s.lntau);
        s.segment = seg;
        s.on_grid = on_grid;
        SystemStateC st{t, s.B0, s.B1, state0.theta};
        s.dlntau = miwa_residue(st);
        traj.samples.push_back(s);
    };

    push_sample(0.0, state0.t, y, 0, true);

    const std::size_t nseg = path.waypoints.size() - 1;
    double arclen0 = 0.0;
    for (std::size_t seg = 0; seg < nseg; ++seg) {
        const Cpx wa = path.waypoints[seg], wb = path.waypoints[seg + 1];
        const double L = std::abs(wb - wa);
        const Cpx dir = (wb - wa) / L;
        const std::size_t ngrid = std::max<std::size_t>(1, (std::size_t)std::ceil(L / cfg.dense_spacing));
        const double delta = L / double(ngrid);
        traj.grid_spacing.push_back(delta);
        traj.segment_grid.emplace_back();
        traj.segment_grid.back().push_back(traj.samples.size() - 1);

        auto rhs = [&](double sigma, const CVec<9>& yy, CVec<9>& dy) {
            SystemStateC st{wa + dir * sigma, Mat2c{}, Mat2c{}, state0.theta};
            Cpx lntau;
            detail::unpack(yy, st.B0, st.B1, lntau);
            const auto [dB0, dB1] = cfg.rhs_variant == RhsVariant::standard
                                        ? deformation_rhs(st)
                                        : deformation_rhs_flipped(st);
            dy = detail::pack(dB0 * dir, dB1 * dir, miwa_residue(st) * dir);
        };

        Dopri5<9, decltype(rhs)> solver(rhs, cfg.step_control());
        solver.start(0.0, y);

        bool blew_up = false;
        for (std::size_t j = 1; j <= ngrid && !blew_up; ++j) {
            const double target = (j == ngrid) ? L : delta * double(j);
            const auto outcome = solver.advance_to(target, [&](double x, const CVec<9>& yy) {
                if (detail::indicator_of(yy) > cfg.blowup_threshold ||
                    !std::isfinite(detail::indicator_of(yy)))
                    return false;
                push_sample(arclen0 + x, wa + dir * x, yy, (int)seg, false);
                return true;
            });
            switch (outcome) {
                case AdvanceOutcome::reached:
                    traj.samples.back().on_grid = true;
                    traj.samples.back().arclen = arclen0 + target;
                    traj.segment_grid.back().push_back(traj.samples.size() - 1);
                    break;
                case AdvanceOutcome::aborted:
                    blew_up = true;
                    break;
                case AdvanceOutcome::step_collapse: {
                    // Genuine growth reads as a pole; anything else is the
                    // integrator starving and must surface as an error.
                    if (detail::indicator_of(solver.y()) > 100.0 * initial_indicator) {
                        blew_up = true;
                    } else {
                        throw Error(ErrorCode::StepCollapse,
                                    "step size collapsed away from a detected pole");
                    }
                    break;
                }
            }
            y = solver.y();
        }

        if (blew_up) {
            traj.status = TerminalStatus::blow_up;
            BlowUpEvent ev;
            ev.t_stop = wa + dir * solver.x();
            ev.indicator = detail::indicator_of(solver.y());
            ev.min_step_achieved = solver.min_step_seen();
            ev.last_step = solver.last_step();
            ev.t_star_estimate = ev.t_stop;
            traj.blow_up = ev;
            try {
                const auto est = locate_theta_point(traj);
                traj.blow_up->t_star_estimate = est.t_star;
                traj.blow_up->t_star_error = est.error_estimate;
                traj.blow_up->refined = true;
            } catch (const Error&) {
                traj.blow_up->refined = false;
            }
            return traj;
        }

        arclen0 += L;
        y = solver.y();
    }

    return traj;
}

/// Max deviations of the flow's first integrals over a trajectory; these
/// are the conserved quantities of the commutator structure.
struct TrajectoryDrifts {
    double tr_b0 = 0, det_b0 = 0, tr_b1 = 0, det_b1 = 0, diag_sum = 0;

    double max() const { return std::max({tr_b0, det_b0, tr_b1, det_b1, diag_sum}); }
};

inline TrajectoryDrifts trajectory_drifts(const Trajectory& traj) {
    TrajectoryDrifts d;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto r = constraint_residuals(traj.state_at(i));
        d.tr_b0 = std::max(d.tr_b0, r.tr_b0);
        d.det_b0 = std::max(d.det_b0, r.det_b0);
        d.tr_b1 = std::max(d.tr_b1, r.tr_b1);
        d.det_b1 = std::max(d.det_b1, r.det_b1);
        d.diag_sum = std::max(d.diag_sum, r.diag_sum);
    }
    return d;
}

} // namespace pv5
