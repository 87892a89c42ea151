#include <catch2/catch_amalgamated.hpp>

#include "rydsim/atom_array.hpp"
#include "rydsim/pulse.hpp"
#include "rydsim/units.hpp"

using namespace rydsim;

TEST_CASE("frequency unit conversions round-trip", "[model]") {
    for (double f : {1e-6, 0.31, 2.0, 24.0, 1536.0, 9.7e4}) {
        REQUIRE(rad_us_to_mhz(mhz_to_rad_us(f)) == Catch::Approx(f).epsilon(1e-12));
        REQUIRE(mhz_to_rad_us(rad_us_to_mhz(f)) == Catch::Approx(f).epsilon(1e-12));
    }
    REQUIRE(mhz_to_rad_us(2.0) == Catch::Approx(4.0 * std::numbers::pi).epsilon(1e-15));
}

TEST_CASE("interaction matrix follows 1/r^6 on a uniform chain", "[model]") {
    const double v_nn = mhz_to_rad_us(24.0);
    const double a = 5.74;
    const double c6 = AtomArray::c6_from_nn(v_nn, a);
    const AtomArray arr = AtomArray::uniform_chain(6, a, c6);

    REQUIRE(arr.v(0, 1) == Catch::Approx(v_nn).epsilon(1e-12));
    REQUIRE(arr.v(2, 3) == Catch::Approx(v_nn).epsilon(1e-12));
    // Next-nearest and next-next-nearest neighbours: 2^-6 and 3^-6.
    REQUIRE(arr.v(0, 2) == Catch::Approx(v_nn / 64.0).epsilon(1e-12));
    REQUIRE(arr.v(0, 3) == Catch::Approx(v_nn / 729.0).epsilon(1e-12));
    REQUIRE(arr.interactions().isApprox(arr.interactions().transpose()));
    REQUIRE(arr.v(3, 3) == 0.0);
}

TEST_CASE("nearest-neighbour coupling at the three lattice spacings", "[model]") {
    // Calibration point: 24 MHz at 5.74 um.  Halving the spacing to 2.87 um
    // multiplies the coupling by 2^6; at 3.57 um it lands between 414 and
    // 415 MHz.
    const double c6 = AtomArray::c6_from_nn(mhz_to_rad_us(24.0), 5.74);
    const AtomArray at287 = AtomArray::uniform_chain(2, 2.87, c6);
    REQUIRE(rad_us_to_mhz(at287.v(0, 1)) == Catch::Approx(1536.0).epsilon(1e-12));
    const AtomArray at357 = AtomArray::uniform_chain(2, 3.57, c6);
    const double v357 = rad_us_to_mhz(at357.v(0, 1));
    REQUIRE(v357 > 414.0);
    REQUIRE(v357 < 415.0);
}

TEST_CASE("blockade radius sits between one and two lattice sites", "[model]") {
    const double c6 = AtomArray::c6_from_nn(mhz_to_rad_us(24.0), 5.74);
    const double rb = blockade_radius(c6, mhz_to_rad_us(2.0));
    REQUIRE(rb > 8.5);
    REQUIRE(rb < 9.0);
    // V(R_b) = Omega by definition.
    REQUIRE(c6 / std::pow(rb, 6) == Catch::Approx(mhz_to_rad_us(2.0)).epsilon(1e-12));
}

TEST_CASE("geometry validation rejects degenerate chains", "[model]") {
    REQUIRE_THROWS_AS(build_interactions({0.0, 1.0, 1.0}, 1.0), ValidationError);
    REQUIRE_THROWS_AS(build_interactions({0.0, 2.0, 1.0}, 1.0), ValidationError);
    REQUIRE_THROWS_AS(build_interactions({0.0, 1.0}, -1.0), ValidationError);
    REQUIRE_THROWS_AS(build_interactions({}, 1.0), ValidationError);
    REQUIRE_THROWS_AS(AtomArray::uniform_chain(0, 1.0, 1.0), ValidationError);
}

TEST_CASE("constant schedule and square drive envelope", "[model]") {
    const auto s = PulseSchedule::constant(2.0, -1.5, 3.0);
    REQUIRE(s.omega(0.0) == 2.0);
    REQUIRE(s.omega(1.7) == 2.0);
    REQUIRE(s.omega(3.0) == 2.0);
    REQUIRE(s.omega(-0.1) == 0.0);
    REQUIRE(s.omega(3.1) == 0.0);
    REQUIRE(s.delta(2.9) == -1.5);
}

TEST_CASE("cubic sweep clips into the window and stays nondecreasing", "[model]") {
    // Ramp chosen so the unclipped cubic exits the window on both sides.
    const double dmin = -10.0, dmax = 14.0;
    const auto s = PulseSchedule::cubic_sweep(2.0, 40.0, 6.0, 2.0, 1.0, dmin, dmax, 2.0);
    REQUIRE(s.delta(0.0) == dmin);
    REQUIRE(s.delta(2.0) == dmax);
    double prev = s.delta(0.0);
    for (int k = 1; k <= 400; ++k) {
        const double d = s.delta(2.0 * k / 400.0);
        REQUIRE(d >= prev - 1e-12);
        REQUIRE(d >= dmin);
        REQUIRE(d <= dmax);
        prev = d;
    }
    // Mid-window value matches the cubic itself where unclipped.
    REQUIRE(s.delta(1.1) == Catch::Approx(40.0 * 0.001 + 0.6 + 2.0).epsilon(1e-12));
    REQUIRE_THROWS_AS(PulseSchedule::cubic_sweep(2.0, -1.0, 6.0, 2.0, 1.0, dmin, dmax, 2.0),
                      ValidationError);
    REQUIRE_THROWS_AS(PulseSchedule::cubic_sweep(2.0, 40.0, 6.0, 2.0, 1.0, 5.0, 5.0, 2.0),
                      ValidationError);
}

TEST_CASE("tangent sweep respects its domain", "[model]") {
    const auto s = PulseSchedule::tangent_sweep(2.0, 5.0, 0.6, 1.0, 1.0, -20.0, 20.0, 2.0);
    double prev = s.delta(0.0);
    for (int k = 1; k <= 200; ++k) {
        const double d = s.delta(2.0 * k / 200.0);
        REQUIRE(d >= prev - 1e-12);
        prev = d;
    }
    REQUIRE(s.delta(1.0) == Catch::Approx(1.0));
    // b large enough that b*(t-t0) reaches pi/2 inside the window.
    REQUIRE_THROWS_AS(PulseSchedule::tangent_sweep(2.0, 5.0, 1.8, 1.0, 1.0, -20.0, 20.0, 2.0),
                      ValidationError);
    REQUIRE_THROWS_AS(PulseSchedule::tangent_sweep(2.0, -5.0, 0.6, 1.0, 1.0, -20.0, 20.0, 2.0),
                      ValidationError);
}

TEST_CASE("quench schedule holds the drive and drops the detuning to zero", "[model]") {
    const auto prep = PulseSchedule::cubic_sweep(2.0, 40.0, 6.0, 2.0, 1.0, -10.0, 14.0, 2.0);
    const auto q = PulseSchedule::quench(prep, 1.5);
    REQUIRE(q.duration_us() == Catch::Approx(3.5));
    REQUIRE(q.prep_duration_us() == Catch::Approx(2.0));
    REQUIRE(q.delta(1.9) == prep.delta(1.9));
    REQUIRE(q.delta(2.0) == 0.0);
    REQUIRE(q.delta(3.4) == 0.0);
    // Drive continuous across the jump.
    REQUIRE(q.omega(1.999) == q.omega(2.001));
    REQUIRE_THROWS_AS(PulseSchedule::quench(prep, -0.1), ValidationError);
    REQUIRE_THROWS_AS(PulseSchedule::quench(q, 1.0), ValidationError);
}

TEST_CASE("schedule sample tables are piecewise-linear snapshots", "[model]") {
    const auto s = PulseSchedule::cubic_sweep(2.0, 40.0, 6.0, 2.0, 1.0, -10.0, 14.0, 2.0);
    const auto table = s.sample_table(0.01);
    REQUIRE(table.size() == 201);
    REQUIRE(table.front().t_us == 0.0);
    REQUIRE(table.back().t_us == Catch::Approx(2.0));
    for (const auto& row : table) {
        REQUIRE(row.omega == s.omega(row.t_us));
        REQUIRE(row.delta == Catch::Approx(s.delta(row.t_us)).margin(1e-12));
    }
}
