#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blipsum/drive.hpp"
#include "blipsum/errors.hpp"
#include "blipsum/numerics.hpp"

using namespace blipsum;
using drive::DriveProtocol;

TEST_CASE("system spec validation") {
    drive::SystemSpec bad{-1.0, 0.0};
    CHECK_THROWS_AS(bad.validate(), DomainError);
    drive::SystemSpec frozen_tunneling{0.0, 0.5};  // delta = 0 is a valid degenerate case
    CHECK_NOTHROW(frozen_tunneling.validate());
}

TEST_CASE("every protocol vanishes at t = 0") {
    const auto drives = {
        DriveProtocol::none(),
        DriveProtocol::constant_after_zero(0.7),
        DriveProtocol::rectangular_pulse(0.5, 1.0, 2.0),
        DriveProtocol::sinusoidal(1.0, 2.0),
        DriveProtocol::piecewise_linear({0.0, 1.0, 2.0}, {0.0, 0.3, -0.2}),
    };
    for (const auto& p : drives) {
        CHECK(p.bias_at(0.0) == 0.0);
        CHECK(p.g_integral(0.0) == 0.0);
    }
}

TEST_CASE("protocol constructors reject invariant violations") {
    CHECK_THROWS_AS(DriveProtocol::sinusoidal(1.0, 2.0, 0.5), DomainError);  // eps_d(0) != 0
    CHECK_THROWS_AS(DriveProtocol::sinusoidal(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(DriveProtocol::rectangular_pulse(1.0, 2.0, 1.0), DomainError);
    CHECK_THROWS_AS(DriveProtocol::rectangular_pulse(1.0, -0.5, 1.0), DomainError);
    CHECK_THROWS_AS(DriveProtocol::piecewise_linear({0.0, 1.0, 0.5}, {0.0, 1.0, 1.0}),
                    DomainError);  // decreasing knots
    CHECK_THROWS_AS(DriveProtocol::piecewise_linear({0.5, 1.0}, {0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(DriveProtocol::piecewise_linear({0.0, 1.0}, {0.3, 1.0}), DomainError);
}

TEST_CASE("bias evaluation per kind") {
    const auto sine = DriveProtocol::sinusoidal(1.0, 2.0);
    CHECK(sine.bias_at(M_PI / 4.0) == doctest::Approx(1.0).epsilon(1e-14));  // sin(pi/2)

    const auto pulse = DriveProtocol::rectangular_pulse(0.5, 1.0, 2.0);
    CHECK(pulse.bias_at(1.5) == 0.5);
    CHECK(pulse.bias_at(0.5) == 0.0);
    CHECK(pulse.bias_at(2.0) == 0.5);  // active on (t_on, t_off]
    CHECK(pulse.bias_at(2.01) == 0.0);

    const auto table = DriveProtocol::piecewise_linear({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
    CHECK(table.bias_at(0.5) == doctest::Approx(0.5));
    CHECK(table.bias_at(1.5) == doctest::Approx(0.5));
    CHECK_THROWS_AS(table.bias_at(2.5), DomainError);
    CHECK_THROWS_AS(table.bias_at(-0.1), DomainError);
}

TEST_CASE("g integral: analytic kinds and trapezoid tables") {
    CHECK(DriveProtocol::none().g_integral(3.0) == 0.0);

    const auto sine = DriveProtocol::sinusoidal(0.8, 1.7);
    for (double t : {0.3, 1.0, 2.9}) {
        CHECK(sine.g_integral(t) ==
              doctest::Approx((0.8 / 1.7) * (1.0 - std::cos(1.7 * t))).epsilon(1e-14));
    }

    const auto pulse = DriveProtocol::rectangular_pulse(0.5, 1.0, 2.0);
    CHECK(pulse.g_integral(3.0) == doctest::Approx(0.5));  // pulse area
    CHECK(pulse.g_integral(1.5) == doctest::Approx(0.25));

    // trapezoid is exact for piecewise-linear protocols
    const auto table = DriveProtocol::piecewise_linear({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
    CHECK(table.g_integral(2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(table.g_integral(0.5) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("g matches a numerical integral of bias_at") {
    const auto table =
        DriveProtocol::piecewise_linear({0.0, 0.4, 1.1, 2.0}, {0.0, -0.6, 0.9, 0.2});
    for (double t : {0.3, 0.9, 1.7, 2.0}) {
        bool ok = true;
        const double ref = num::adaptive_simpson([&](double u) { return table.bias_at(u); },
                                                 0.0, t, 1e-12, 40, &ok);
        CHECK(table.g_integral(t) == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("nonstationary work functions") {
    const auto sine = DriveProtocol::sinusoidal(1.0, 1.0);
    CHECK(drive::w_ns_rate(DriveProtocol::none(), +1, 1.0) == 0.0);
    CHECK(drive::w_ns_rate(sine, +1, M_PI / 2.0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(drive::w_ns_rate(sine, -1, 0.4) == -drive::w_ns_rate(sine, +1, 0.4));
    CHECK_THROWS_AS(drive::w_ns_rate(sine, 0, 0.4), DomainError);

    const auto sine2 = DriveProtocol::sinusoidal(2.0, 1.0);
    CHECK(drive::w1_work(sine2, +1, 0.0) == 0.0);
    CHECK(drive::w1_work(sine2, +1, M_PI / 2.0) == doctest::Approx(-2.0).epsilon(1e-14));

    // fundamental-theorem consistency on a sweep of times: w1 = -xi * bias, exactly
    for (int i = 0; i < 100; ++i) {
        const double t = 3.0 * (i + 0.5) / 100.0;
        CHECK(drive::w1_work(sine, +1, t) == -sine.bias_at(t));
        CHECK(drive::w1_work(sine, -1, t) == sine.bias_at(t));
    }

    // ramp protocol: W_1 = -xi A t
    const auto ramp = DriveProtocol::piecewise_linear({0.0, 2.0}, {0.0, 2.0 * 0.45});
    CHECK(drive::w1_work(ramp, +1, 1.2) == doctest::Approx(-0.45 * 1.2).epsilon(1e-14));

    // window integral against g differences
    CHECK(drive::ns_work_window(sine, +1, 0.3, 1.2) ==
          doctest::Approx(-(sine.g_integral(1.2) - sine.g_integral(0.3))).epsilon(1e-14));
}

TEST_CASE("classical work split examples") {
    // smooth ramp, pure sojourn eta = -1: W_qs = A t, W_ns = 0
    const double amp = 0.7, t_end = 1.3;
    const auto ramp = DriveProtocol::piecewise_linear({0.0, t_end}, {0.0, amp * t_end});
    drive::SpinTrajectory sojourn{{{0.0, t_end, -1, 0}}};
    const auto split1 = drive::classical_work_split(ramp, sojourn);
    CHECK(split1.quasistatic == doctest::Approx(amp * t_end).epsilon(1e-14));
    CHECK(split1.nonstationary == 0.0);

    // pure blip over [t1, t2]: W_ns = -A (t2 - t1)
    drive::SpinTrajectory blip{{{0.2, 0.9, 0, +1}}};
    const auto split2 = drive::classical_work_split(ramp, blip);
    CHECK(split2.quasistatic == 0.0);
    CHECK(split2.nonstationary == doctest::Approx(-amp * 0.7).epsilon(1e-12));

    // zero drive
    drive::SpinTrajectory mixed{{{0.0, 0.5, -1, 0}, {0.5, 1.0, 0, +1}}};
    const auto split3 = drive::classical_work_split(DriveProtocol::none(), mixed);
    CHECK(split3.quasistatic == 0.0);
    CHECK(split3.nonstationary == 0.0);
}

TEST_CASE("split completeness: W_qs + W_ns = -(1/2) int sigma_z eps_dot") {
    const auto sine = DriveProtocol::sinusoidal(0.9, 2.3);
    drive::SpinTrajectory traj{{{0.0, 0.3, -1, 0},
                                {0.3, 0.8, 0, +1},
                                {0.8, 1.1, +1, 0},
                                {1.1, 1.6, 0, -1},
                                {1.6, 2.0, -1, 0}}};
    const auto split = drive::classical_work_split(sine, traj);
    // sigma_z = 2 (eta + xi); integrated by parts segment by segment
    double ref = 0.0;
    for (const auto& seg : traj.segments) {
        const double sz = 2.0 * (seg.eta + seg.xi);
        ref += -0.5 * sz * (sine.bias_at(seg.t_end) - sine.bias_at(seg.t_begin));
    }
    CHECK(split.quasistatic + split.nonstationary == doctest::Approx(ref).epsilon(1e-12));

    // same identity against a smooth-derivative quadrature
    bool ok = true;
    double smooth = 0.0;
    for (const auto& seg : traj.segments) {
        const double sz = 2.0 * (seg.eta + seg.xi);
        smooth += -0.5 * sz *
                  num::adaptive_simpson(
                      [&](double u) { return 0.9 * 2.3 * std::cos(2.3 * u); }, seg.t_begin,
                      seg.t_end, 1e-13, 40, &ok);
    }
    CHECK(split.quasistatic + split.nonstationary == doctest::Approx(smooth).epsilon(1e-9));
}

TEST_CASE("trajectory validation") {
    drive::SpinTrajectory both_zero{{{0.0, 1.0, 0, 0}}};
    CHECK_THROWS_AS(drive::classical_work_split(DriveProtocol::none(), both_zero), DomainError);
    drive::SpinTrajectory both_set{{{0.0, 1.0, 1, 1}}};
    CHECK_THROWS_AS(drive::classical_work_split(DriveProtocol::none(), both_set), DomainError);
    drive::SpinTrajectory gap{{{0.0, 0.5, -1, 0}, {0.7, 1.0, 0, 1}}};
    CHECK_THROWS_AS(drive::classical_work_split(DriveProtocol::none(), gap), DomainError);
    // beyond a table's range
    const auto table = DriveProtocol::piecewise_linear({0.0, 1.0}, {0.0, 1.0});
    drive::SpinTrajectory beyond{{{0.0, 1.5, -1, 0}}};
    CHECK_THROWS_AS(drive::classical_work_split(table, beyond), DomainError);
}
