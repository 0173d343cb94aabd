#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pv5/contour.hpp"
#include "pv5/random_state.hpp"
#include "pv5/system.hpp"

using namespace pv5;

namespace {

RatC rc(long long n, long long d = 1) { return RatC(Rat(n, d)); }

SystemState<RatC> rational_reference_state() {
    ThetaTriple<RatC> th{rc(1, 3), rc(1, 5), rc(1, 7)};
    return build_state(th, rc(1, 4), rc(1), rc(2), rc(1));
}

SystemState<RatC> rational_diag_state(long long tn = 2) {
    // theta0 = 1/3, theta1 = 1/5, both residue matrices diagonal.
    SystemState<RatC> st;
    st.t = rc(tn);
    st.B0 = Mat2<RatC>::diag(rc(1, 6), rc(-1, 6));
    st.B1 = Mat2<RatC>::diag(rc(1, 10), rc(-1, 10));
    st.theta = {rc(1, 3), rc(1, 5), rc(0)};
    return st;
}

} // namespace

TEST_CASE("build_state closed forms, exact arithmetic") {
    const auto st = rational_reference_state();
    CHECK(st.B0.a11 == rc(1, 4));
    CHECK(st.B0.a12 == rc(1));
    CHECK(st.B0.a21 == rc(-5, 144));
    CHECK(st.B0.a22 == rc(-1, 4));
    CHECK(st.B1.a11 == rc(-9, 28));
    CHECK(st.B1.a12 == rc(2));
    CHECK(st.B1.a21 == rc(-1829, 39200));
    CHECK(st.B1.a22 == rc(9, 28));

    // Spectral and normalization constraints hold identically.
    CHECK(trace(st.B0) == rc(0));
    CHECK(trace(st.B1) == rc(0));
    CHECK(det(st.B0) == rc(-1, 36) * rc(1, 4) * rc(4));  // -theta0^2/4 = -1/36
    CHECK(det(st.B0) + st.theta.theta0 * st.theta.theta0 / rc(4) == rc(0));
    CHECK(det(st.B1) + st.theta.theta1 * st.theta.theta1 / rc(4) == rc(0));
    CHECK(st.B0.a11 + st.B1.a11 == -st.theta.theta_inf / rc(2));
    CHECK(st.B0.a22 + st.B1.a22 == st.theta.theta_inf / rc(2));
}

TEST_CASE("build_state degenerate chart: a0 = theta0/2 forces c0 = 0") {
    ThetaTriple<RatC> th{rc(1, 3), rc(1, 5), rc(1, 7)};
    const auto st = build_state(th, rc(1, 6), rc(1), rc(1), rc(1));
    CHECK(st.B0.a21 == rc(0));
    CHECK(st.B0.a12 == rc(1));
}

TEST_CASE("build_state rejects bad inputs") {
    const ThetaTripleC th{Cpx(1.0 / 3), Cpx(1.0 / 5), Cpx(1.0 / 7)};
    CHECK_THROWS_WITH_AS(build_state(th, Cpx(0.25), Cpx(0.0), Cpx(1.0), Cpx(1.0)),
                         doctest::Contains("ZERO_GAUGE_PARAMETER"), Error);
    CHECK_THROWS_WITH_AS(build_state(th, Cpx(0.25), Cpx(1.0), Cpx(0.0), Cpx(1.0)),
                         doctest::Contains("ZERO_GAUGE_PARAMETER"), Error);
    CHECK_THROWS_WITH_AS(build_state(th, Cpx(0.25), Cpx(1.0), Cpx(1.0), Cpx(0.0)),
                         doctest::Contains("ZERO_BASE_POINT"), Error);

    const ThetaTripleC bad0{Cpx(1.0), Cpx(1.0 / 5), Cpx(1.0 / 7)};
    CHECK_THROWS_AS(build_state(bad0, Cpx(0.25), Cpx(1.0), Cpx(1.0), Cpx(1.0)), Error);
    const ThetaTripleC bad1{Cpx(1.0 / 3), Cpx(-2.0), Cpx(1.0 / 7)};
    CHECK_THROWS_AS(build_state(bad1, Cpx(0.25), Cpx(1.0), Cpx(1.0), Cpx(1.0)), Error);
}

TEST_CASE("eval_B") {
    const auto st = rational_diag_state();
    const auto B = eval_B(st, rc(1));
    CHECK(B.a11 == rc(16, 15));
    CHECK(B.a22 == rc(-1, 15));
    CHECK(B.a12 == rc(0));
    CHECK(B.a21 == rc(0));

    SystemState<RatC> zero = st;
    zero.B0 = Mat2<RatC>::zero();
    zero.B1 = Mat2<RatC>::zero();
    const auto Bz = eval_B(zero, rc(7, 3));
    CHECK(Bz.a11 == rc(1));
    CHECK(Bz.a22 == rc(0));

    CHECK_THROWS_AS(eval_B(st, st.t), Error);
    CHECK_THROWS_AS(eval_B(st, rc(0)), Error);
}

TEST_CASE("miwa_residue closed form") {
    CHECK(miwa_residue(rational_diag_state(2)) == rc(7, 60));

    auto st = rational_diag_state(2);
    st.B1 = Mat2<RatC>::zero();
    CHECK(miwa_residue(st) == rc(0));

    auto st2 = rational_diag_state(5);
    st2.B0 = Mat2<RatC>::zero();
    CHECK(miwa_residue(st2) == rc(1, 10));

    auto st3 = rational_diag_state();
    st3.t = rc(0);
    CHECK_THROWS_AS(miwa_residue(st3), Error);
}

TEST_CASE("miwa_residue matches contour quadrature") {
    RandomStateGen gen(20240801);
    for (int i = 0; i < 200; ++i) {
        const auto st = gen.state();
        const Cpx closed = miwa_residue(st);
        const Cpx quad = contour_half_tr_B2_residue(st);
        CHECK(std::abs(closed - quad) < 1e-10 * std::max(1.0, std::abs(closed)));
    }
}

TEST_CASE("tr_B1_squared equals theta1^2/2") {
    CHECK(tr_B1_squared(rational_diag_state()) == rc(1, 50));

    ThetaTriple<RatC> th{rc(1, 5), rc(1, 3), rc(1, 7)};
    const auto st = build_state(th, rc(1, 4), rc(1), rc(2), rc(1));
    CHECK(tr_B1_squared(st) == rc(1, 18));

    RandomStateGen gen(7);
    for (int i = 0; i < 200; ++i) {
        const auto s = gen.state();
        const Cpx expect = s.theta.theta1 * s.theta.theta1 * 0.5;
        CHECK(std::abs(tr_B1_squared(s) - expect) < 1e-13 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("tr_B1_squared deviation is twice the det violation") {
    RandomStateGen gen(99);
    auto st = gen.state();
    const Cpx expect = st.theta.theta1 * st.theta.theta1 * 0.5;
    const double eps = 1e-6;
    // Bumping the 21 entry moves det B1 by -a12*delta and leaves the trace.
    const Cpx delta = eps / st.B1.a12;
    st.B1.a21 += delta;
    const Cpx deviation = tr_B1_squared(st) - expect;
    CHECK(std::abs(deviation - 2.0 * eps) < 1e-12);
}

TEST_CASE("gauge_conjugate") {
    RandomStateGen gen(5);
    const auto st = gen.state();

    const auto same = gauge_conjugate(st, Cpx(1.0), Cpx(1.0));
    CHECK(frobenius_norm(same.B0 - st.B0) == 0.0);
    CHECK(frobenius_norm(same.B1 - st.B1) == 0.0);

    const auto g = gauge_conjugate(st, Cpx(2.0), Cpx(3.0));
    CHECK(g.B0.a11 == st.B0.a11);
    CHECK(g.B0.a22 == st.B0.a22);
    CHECK(g.B1.a11 == st.B1.a11);
    CHECK(std::abs(g.B0.a12 - st.B0.a12 * (2.0 / 3.0)) < 1e-15);
    CHECK(std::abs(g.B0.a21 - st.B0.a21 * 1.5) < 1e-15);
    CHECK(g.t == st.t);
    CHECK(state_is_valid(g));

    CHECK_THROWS_AS(gauge_conjugate(st, Cpx(0.0), Cpx(1.0)), Error);
}

TEST_CASE("builder constraints hold to 1e-13 in floating point") {
    RandomStateGen gen(311);
    for (int i = 0; i < 300; ++i) {
        const auto st = gen.state();
        CHECK(constraint_residuals(st).max() < 1e-13);
    }
}

TEST_CASE("state validation and eigenvalues") {
    RandomStateGen gen(11);
    const auto st = gen.state();
    CHECK(state_is_valid(st));

    auto bad = st;
    bad.B0.a11 += 1e-4;
    CHECK_FALSE(state_is_valid(bad));

    const auto [l1, l2] = eigenvalues(st.B0);
    const Cpx half = st.theta.theta0 * 0.5;
    const double err = std::min(std::abs(l1 - half), std::abs(l1 + half));
    CHECK(err < 1e-13);
    CHECK(std::abs(l1 + l2) < 1e-13);
}
