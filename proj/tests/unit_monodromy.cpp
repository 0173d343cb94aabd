#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pv5/monodromy.hpp"
#include "pv5/random_state.hpp"

using namespace pv5;

namespace {

SystemStateC reference_state() {
    const ThetaTripleC th{Cpx(1.0 / 3), Cpx(1.0 / 5), Cpx(1.0 / 7)};
    return build_state(th, Cpx(0.25), Cpx(1.0), Cpx(2.0), Cpx(1.0));
}

Mat2c inverse(const Mat2c& m) {
    const Cpx d = det(m);
    return Mat2c{m.a22 / d, -m.a12 / d, -m.a21 / d, m.a11 / d};
}

} // namespace

TEST_CASE("a loop around a regular point has trivial monodromy") {
    const auto st = reference_state();
    StepControl ctl{1e-11, 1e-13, 0.1, 1e-12};
    // Circle of radius 0.3 around z = 4 + 2i: encloses neither 0 nor t.
    const Cpx c(4.0, 2.0);
    const double r = 0.3;
    Mat2c Y = Mat2c::identity();
    Y = detail::transport_piece(st, Y, 2.0 * std::numbers::pi,
                                [&](double x) {
                                    const Cpx w = r * std::exp(Cpx(0.0, x));
                                    return std::pair<Cpx, Cpx>(c + w, Cpx(0.0, 1.0) * w);
                                },
                                ctl);
    CHECK(frobenius_norm(Y - Mat2c::identity()) < 1e-10);
}

TEST_CASE("monodromy invariants match the local exponents") {
    const auto st = reference_state();
    IntegratorConfig cfg;
    const auto rep = monodromy_invariants(st, cfg);

    CHECK(std::abs(rep.tr_M0 - 2.0 * std::cos(std::numbers::pi / 3.0)) < 1e-6);
    CHECK(std::abs(rep.tr_Mt - 2.0 * std::cos(std::numbers::pi / 5.0)) < 1e-6);
    CHECK(std::abs(det(rep.M0) - 1.0) < 1e-8);
    CHECK(std::abs(det(rep.Mt) - 1.0) < 1e-8);
    CHECK(rep.accuracy < 1e-7);
}

TEST_CASE("B1 = 0 gives trivial monodromy at z = t") {
    auto st = reference_state();
    st.B1 = Mat2c::zero();
    st.theta.theta1 = Cpx(1.0 / 5);  // formal only; no singularity remains at t
    IntegratorConfig cfg;
    const auto [loop0, loopt] = default_loops(st.t);
    const Mat2c Mt = monodromy_matrix(st, loopt, cfg);
    CHECK(frobenius_norm(Mt - Mat2c::identity()) < 1e-8);
    CHECK(std::abs(trace(Mt) - 2.0) < 1e-8);
}

TEST_CASE("frame independence of the invariants") {
    const auto st = reference_state();
    IntegratorConfig cfg;
    cfg.rtol = 1e-12;
    cfg.atol = 1e-14;

    auto [loop0, loopt] = default_loops(st.t);
    const Mat2c M0a = monodromy_matrix(st, loop0, cfg);
    const Mat2c Mta = monodromy_matrix(st, loopt, cfg);

    // Same circles, different base point (same homotopy classes).
    const Cpx base2 = st.t * Cpx(0.5, -1.6) + Cpx(0.2, 0.0);
    loop0.base = base2;
    loopt.base = base2;
    const Mat2c M0b = monodromy_matrix(st, loop0, cfg);
    const Mat2c Mtb = monodromy_matrix(st, loopt, cfg);

    CHECK(std::abs(trace(M0a) - trace(M0b)) < 1e-10);
    CHECK(std::abs(trace(Mta) - trace(Mtb)) < 1e-10);
    CHECK(std::abs(trace(M0a * Mta) - trace(M0b * Mtb)) < 1e-9);
}

TEST_CASE("reversed loop gives the inverse matrix, trace preserved") {
    const auto st = reference_state();
    IntegratorConfig cfg;
    cfg.rtol = 1e-12;
    cfg.atol = 1e-14;
    auto [loop0, loopt] = default_loops(st.t);
    const Mat2c M = monodromy_matrix(st, loop0, cfg);
    loop0.orientation = LoopOrientation::cw;
    const Mat2c Mrev = monodromy_matrix(st, loop0, cfg);
    CHECK(frobenius_norm(Mrev - inverse(M)) < 1e-9);
    CHECK(std::abs(trace(Mrev) - trace(M)) < 1e-9);  // det 1: tr M = tr M^-1
}

TEST_CASE("loop validation") {
    const auto st = reference_state();
    IntegratorConfig cfg;

    LoopSpec bad;
    bad.base = st.t * Cpx(0.5, -1.0);
    bad.circles = {CircleSpec{Cpx(0.0), std::abs(st.t) * 2.0}};  // swallows t
    CHECK_THROWS_WITH_AS(monodromy_matrix(st, bad, cfg),
                         doctest::Contains("LOOP_THROUGH_SINGULARITY"), Error);

    bad.circles = {CircleSpec{Cpx(0.5, 0.5), 0.1}};  // centered at neither
    CHECK_THROWS_WITH_AS(monodromy_matrix(st, bad, cfg), doctest::Contains("BAD_CONFIG"),
                         Error);

    bad.circles = {CircleSpec{Cpx(0.0), 0.25}};
    bad.base = Cpx(0.1, 0.0);  // inside the circle
    CHECK_THROWS_WITH_AS(monodromy_matrix(st, bad, cfg),
                         doctest::Contains("LOOP_THROUGH_SINGULARITY"), Error);

    // Base on the far side so the connecting segment crosses the other
    // singularity: base, 0 and t collinear with t between.
    LoopSpec through;
    through.base = st.t * 2.0;
    through.circles = {CircleSpec{Cpx(0.0), 0.1}};
    CHECK_THROWS_WITH_AS(monodromy_matrix(st, through, cfg),
                         doctest::Contains("LOOP_THROUGH_SINGULARITY"), Error);
}

TEST_CASE("accuracy estimate tracks rtol") {
    const auto st = reference_state();
    IntegratorConfig coarse;
    coarse.rtol = 1e-7;
    coarse.atol = 1e-9;
    IntegratorConfig fine = coarse;
    fine.rtol = 1e-9;
    fine.atol = 1e-11;
    const double acc_coarse = monodromy_invariants(st, coarse).accuracy;
    const double acc_fine = monodromy_invariants(st, fine).accuracy;
    CHECK(acc_fine < acc_coarse);
    const double shrink = acc_coarse / acc_fine;
    CHECK(shrink > 10.0);   // two decades of rtol; PI control is not exact
    CHECK(shrink < 10000.0);
}

TEST_CASE("isomonodromy drift along the reference run") {
    const auto st = reference_state();
    IntegratorConfig cfg;
    cfg.dense_spacing = 1e-2;
    const auto traj = integrate_path(st, PathSpec{{Cpx(1.0), Cpx(2.0)}}, cfg);
    const auto& grid = traj.segment_grid[0];
    std::vector<std::size_t> idx;
    for (int k = 0; k < 5; ++k) idx.push_back(grid[k * (grid.size() - 1) / 4]);

    CHECK(isomonodromy_drift(traj, idx, cfg) < 1e-6);
    CHECK(isomonodromy_drift(traj, {grid[0]}, cfg) == 0.0);
    CHECK_THROWS_WITH_AS(isomonodromy_drift(traj, {}, cfg), doctest::Contains("PRECONDITION"),
                         Error);

    IntegratorConfig bad = cfg;
    bad.rhs_variant = RhsVariant::flipped_commutator;
    const auto wrong = integrate_path(st, PathSpec{{Cpx(1.0), Cpx(2.0)}}, bad);
    CHECK(isomonodromy_drift(wrong, idx, cfg) > 1e-2);
}
