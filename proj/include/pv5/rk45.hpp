#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

#include "pv5/complex2x2.hpp"
#include "pv5/errors.hpp"

namespace pv5 {

template <std::size_t N>
using CVec = std::array<Cpx, N>;

struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 0.1;
    double min_step = 1e-12;
};

enum class AdvanceOutcome { reached, aborted, step_collapse };

/// Dormand-Prince 5(4) embedded pair with FSAL and the PI step controller
/// of Hairer, Norsett & Wanner (Solving ODEs I, DOPRI5). State vectors are
/// complex, the independent variable is a real curve parameter; integrating
/// a holomorphic system along an analytic curve reduces to this form.
///
/// advance_to never oversteps its target, so callers can pin sample points
/// exactly on a prescribed grid; the controller is free below that cap.
template <std::size_t N, class Rhs>
class Dopri5 {
public:
    Dopri5(Rhs rhs, StepControl ctl) : rhs_(std::move(rhs)), ctl_(ctl) {}

    void start(double x, const CVec<N>& y) {
        x_ = x;
        y_ = y;
        rhs_(x_, y_, k1_);
        facold_ = 1e-4;
        h_next_ = initial_step();
        last_step_ = 0.0;
        min_step_seen_ = std::numeric_limits<double>::infinity();
    }

    /// Integrates forward until x == x_end. cb(x, y) runs after every
    /// accepted step; returning false aborts (state stays at the abort
    /// point). step_collapse means the controller demanded a step below
    /// min_step; the caller decides what that means.
    template <class Callback>
    AdvanceOutcome advance_to(double x_end, Callback&& cb) {
        constexpr double eps = std::numeric_limits<double>::epsilon();
        bool just_rejected = false;
        while (true) {
            const double gap = x_end - x_;
            if (gap <= 4.0 * eps * std::max(1.0, std::abs(x_end))) {
                x_ = x_end;
                return AdvanceOutcome::reached;
            }
            // min_step is a floor on proposed steps; only the clamp to the
            // target may go below it. A rejection at the floor collapses.
            double h = std::min({h_next_, gap, ctl_.max_step});
            if (h < ctl_.min_step) h = std::min(ctl_.min_step, gap);

            CVec<N> y5, err_vec;
            attempt(h, y5, err_vec);
            const double err = error_norm(err_vec, y_, y5);

            if (err <= 1.0) {
                x_ += h;
                y_ = y5;
                k1_ = k7_;  // FSAL
                last_step_ = h;
                min_step_seen_ = std::min(min_step_seen_, h);
                double fac = std::pow(std::max(err, 1e-10), expo1_) / std::pow(facold_, beta_);
                fac = std::max(facc2_, std::min(facc1_, fac / safe_));
                if (just_rejected) fac = std::max(fac, 1.0);
                h_next_ = h / fac;
                facold_ = std::max(err, 1e-4);
                just_rejected = false;
                if (!cb(x_, y_)) return AdvanceOutcome::aborted;
            } else {
                const double fac11 = std::pow(err, expo1_);
                h_next_ = h / std::min(facc1_, fac11 / safe_);
                just_rejected = true;
                if (h_next_ < ctl_.min_step) return AdvanceOutcome::step_collapse;
            }
        }
    }

    double x() const { return x_; }
    const CVec<N>& y() const { return y_; }
    double last_step() const { return last_step_; }
    double min_step_seen() const { return min_step_seen_; }

private:
    void attempt(double h, CVec<N>& y5, CVec<N>& err_vec) {
        CVec<N> tmp;
        auto stage = [&](const auto&... terms) {
            for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (... + terms[i]);
        };

        struct Scaled {
            const CVec<N>& v;
            double c;
            Cpx operator[](std::size_t i) const { return c * v[i]; }
        };
        auto s = [](const CVec<N>& v, double c) { return Scaled{v, c}; };

        CVec<N> k2, k3, k4, k5, k6;
        stage(s(k1_, 1.0 / 5));
        rhs_(x_ + h / 5, tmp, k2);
        stage(s(k1_, 3.0 / 40), s(k2, 9.0 / 40));
        rhs_(x_ + 3 * h / 10, tmp, k3);
        stage(s(k1_, 44.0 / 45), s(k2, -56.0 / 15), s(k3, 32.0 / 9));
        rhs_(x_ + 4 * h / 5, tmp, k4);
        stage(s(k1_, 19372.0 / 6561), s(k2, -25360.0 / 2187), s(k3, 64448.0 / 6561),
              s(k4, -212.0 / 729));
        rhs_(x_ + 8 * h / 9, tmp, k5);
        stage(s(k1_, 9017.0 / 3168), s(k2, -355.0 / 33), s(k3, 46732.0 / 5247),
              s(k4, 49.0 / 176), s(k5, -5103.0 / 18656));
        rhs_(x_ + h, tmp, k6);
        stage(s(k1_, 35.0 / 384), s(k3, 500.0 / 1113), s(k4, 125.0 / 192),
              s(k5, -2187.0 / 6784), s(k6, 11.0 / 84));
        y5 = tmp;
        rhs_(x_ + h, y5, k7_);

        for (std::size_t i = 0; i < N; ++i) {
            err_vec[i] = h * ((71.0 / 57600) * k1_[i] + (-71.0 / 16695) * k3[i] +
                              (71.0 / 1920) * k4[i] + (-17253.0 / 339200) * k5[i] +
                              (22.0 / 525) * k6[i] + (-1.0 / 40) * k7_[i]);
        }
    }

    double error_norm(const CVec<N>& e, const CVec<N>& y0, const CVec<N>& y1) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = ctl_.atol + ctl_.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
            const double q = std::abs(e[i]) / sc;
            acc += q * q;
        }
        const double norm = std::sqrt(acc / double(N));
        // Overflow or NaN in a trial step reads as a hard rejection.
        return std::isfinite(norm) ? norm : 1e10;
    }

    double initial_step() const {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = ctl_.atol + ctl_.rtol * std::abs(y_[i]);
            d0 += std::norm(y_[i] / sc);
            d1 += std::norm(k1_[i] / sc);
        }
        d0 = std::sqrt(d0 / double(N));
        d1 = std::sqrt(d1 / double(N));
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::min(h, ctl_.max_step);
    }

    static constexpr double beta_ = 0.04;
    static constexpr double expo1_ = 0.2 - beta_ * 0.75;
    static constexpr double safe_ = 0.9;
    static constexpr double facc1_ = 5.0;   // max shrink per step
    static constexpr double facc2_ = 0.1;   // max growth per step

    Rhs rhs_;
    StepControl ctl_;
    double x_ = 0.0;
    CVec<N> y_{}, k1_{}, k7_{};
    double h_next_ = 0.0, facold_ = 1e-4;
    double last_step_ = 0.0, min_step_seen_ = 0.0;
};

} // namespace pv5
