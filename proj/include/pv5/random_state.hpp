#pragma once

#include <cstdint>
#include <random>

#include "pv5/system.hpp"

namespace pv5 {

struct RandomStateOptions {
    bool fix_theta = false;
    ThetaTripleC theta{};
    bool fix_t = false;
    Cpx t{};
    double t_abs_min = 0.6;
    double t_abs_max = 2.5;
    double min_dist_origin = 0.3;   // keeps miwa/t terms tame
    double min_dist_minus1 = 0.2;   // keeps the xi chart usable
};

/// Deterministic generator of valid states. Doubles are produced straight
/// from the mt19937_64 stream (not through distribution objects) so a seed
/// yields identical states on every platform.
class RandomStateGen {
public:
    explicit RandomStateGen(std::uint64_t seed) : rng_(seed) {}

    double unit() { return double(rng_() >> 11) * 0x1.0p-53; }
    double range(double a, double b) { return a + (b - a) * unit(); }
    Cpx box(double re_half, double im_half) {
        return {range(-re_half, re_half), range(-im_half, im_half)};
    }
    Cpx ring(double mag_min, double mag_max) {
        const double m = range(mag_min, mag_max);
        const double phi = range(-3.14159265358979323846, 3.14159265358979323846);
        return {m * std::cos(phi), m * std::sin(phi)};
    }

    SystemStateC state(const RandomStateOptions& opt = {}) {
        ThetaTripleC th = opt.theta;
        if (!opt.fix_theta) {
            th.theta0 = {range(0.15, 0.85), range(-0.25, 0.25)};
            th.theta1 = {range(0.15, 0.85), range(-0.25, 0.25)};
            th.theta_inf = box(0.9, 0.4);
        }
        Cpx t = opt.t;
        if (!opt.fix_t) {
            do {
                t = ring(opt.t_abs_min, opt.t_abs_max);
            } while (std::abs(t) < opt.min_dist_origin ||
                     std::abs(t + 1.0) < opt.min_dist_minus1);
        }
        const Cpx a0 = box(0.5, 0.25);
        const Cpx b = ring(0.4, 1.6);
        const Cpx e = ring(0.4, 1.6);
        return build_state(th, a0, b, e, t);
    }

private:
    std::mt19937_64 rng_;
};

} // namespace pv5
