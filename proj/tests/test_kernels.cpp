#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "blipsum/bath.hpp"
#include "blipsum/drive.hpp"
#include "blipsum/errors.hpp"
#include "blipsum/kernels.hpp"
#include "blipsum/numerics.hpp"

using namespace blipsum;
using kernels::BlipPath;

namespace {

// Ohmic closed forms, recomputed here so the checks do not depend on the
// bath module's code path.
double s_closed(double tau) { return 0.25 * std::log1p(100.0 * tau * tau); }  // alpha=.25 wc=10
double r_closed(double tau) { return 2.0 * 0.25 * std::atan(10.0 * tau); }

const bath::BathSpec kSpec{0.25, 1.0, 10.0, 0.0};

bath::KernelTable fine_table(double tau_max = 3.0) {
    return bath::KernelTable::build(kSpec, tau_max, 1e-10);
}

BlipPath two_blip_path(std::vector<int> xi, std::vector<int> eta) {
    return BlipPath::make(1.0, {0.1, 0.2, 0.5, 0.7}, std::move(xi), std::move(eta));
}

std::vector<double> random_sorted_times(std::uint64_t key, int count, double t) {
    std::vector<double> times(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        times[static_cast<std::size_t>(i)] =
            t * num::uniform01(num::stream_key(key, 11, static_cast<std::uint64_t>(i)));
    std::sort(times.begin(), times.end());
    return times;
}

}  // namespace

TEST_CASE("blip path validation") {
    CHECK_THROWS_AS(BlipPath::make(1.0, {0.1, 0.2}, {1}, {1}), DomainError);  // eta0 != -1
    CHECK_THROWS_AS(BlipPath::make(1.0, {0.2, 0.1}, {1}, {-1}), DomainError);
    CHECK_THROWS_AS(BlipPath::make(1.0, {0.1, 1.2}, {1}, {-1}), DomainError);
    CHECK_THROWS_AS(BlipPath::make(1.0, {0.1, 0.2, 0.3, 0.4}, {1}, {-1}), DomainError);
    CHECK_THROWS_AS(BlipPath::make(1.0, {0.1, 0.2}, {2}, {-1}), DomainError);
    CHECK_NOTHROW(BlipPath::make(1.0, {0.1, 0.1}, {1}, {-1}));  // degenerate ties allowed
}

TEST_CASE("lambda_jk: zero coupling, degenerate blip, closed-form recomputation") {
    const auto zero = bath::KernelTable::zero(2.0);
    const auto path = two_blip_path({1, 1}, {-1, 1});
    CHECK(kernels::lambda_jk(zero, path, 2, 1) == 0.0);

    // zero-length blip k = 1 cancels pairwise, exactly
    const auto table = fine_table();
    const auto degenerate = BlipPath::make(1.0, {0.2, 0.2, 0.5, 0.7}, {1, 1}, {-1, 1});
    CHECK(kernels::lambda_jk(table, degenerate, 2, 1) == 0.0);

    const double expected = s_closed(0.6) + s_closed(0.3) - s_closed(0.5) - s_closed(0.4);
    CHECK(kernels::lambda_jk(table, path, 2, 1) == doctest::Approx(expected).epsilon(1e-7));
    CHECK_THROWS_AS(kernels::lambda_jk(table, path, 1, 1), DomainError);
    CHECK_THROWS_AS(kernels::lambda_jk(table, path, 3, 1), DomainError);
}

TEST_CASE("x_jk: zero coupling, degenerate sojourn, closed-form recomputation") {
    const auto zero = bath::KernelTable::zero(2.0);
    const auto path = two_blip_path({1, 1}, {-1, 1});
    CHECK(kernels::x_jk(zero, path, 2, 1) == 0.0);

    // zero-length sojourn (t2 = t3) cancels pairwise, exactly
    const auto table = fine_table();
    const auto degenerate = BlipPath::make(1.0, {0.1, 0.5, 0.5, 0.7}, {1, 1}, {-1, 1});
    CHECK(kernels::x_jk(table, degenerate, 2, 1) == 0.0);

    // X_{2,1} = R(t4-t3) + R(t3-t2) - R(t4-t2) - R(0)
    const double expected21 = r_closed(0.2) + r_closed(0.3) - r_closed(0.5);
    CHECK(kernels::x_jk(table, path, 2, 1) == doctest::Approx(expected21).epsilon(1e-7));

    // k = 0 references the preparation time t0 = 0
    const double expected10 = r_closed(0.1) + r_closed(0.1) - r_closed(0.2);
    CHECK(kernels::x_jk(table, path, 1, 0) == doctest::Approx(expected10).epsilon(1e-7));
    CHECK_THROWS_AS(kernels::x_jk(table, path, 1, 1), DomainError);
}

TEST_CASE("q_amplitude reductions") {
    const auto zero = bath::KernelTable::zero(2.0);
    const auto table = fine_table();

    const auto single = BlipPath::make(1.0, {0.3, 0.8}, {1}, {-1});
    CHECK(kernels::q_amplitude(zero, single) == 1.0);
    CHECK(kernels::q_amplitude(table, single) ==
          doctest::Approx(std::exp(-s_closed(0.5))).epsilon(1e-8));

    const auto path = two_blip_path({1, 1}, {-1, 1});
    const double lam = s_closed(0.6) + s_closed(0.3) - s_closed(0.5) - s_closed(0.4);
    const double expected = std::exp(-s_closed(0.1) - s_closed(0.2) - lam);
    CHECK(kernels::q_amplitude(table, path) == doctest::Approx(expected).epsilon(1e-7));
    CHECK(kernels::q_amplitude(table, path) > 0.0);

    // single-blip q is capped by 1 (no cross terms, S >= 0)
    CHECK(kernels::q_amplitude(table, single) <= 1.0);
}

TEST_CASE("h_phase reductions") {
    const auto zero = bath::KernelTable::zero(2.0);
    const auto table = fine_table();

    const auto single = BlipPath::make(1.0, {0.3, 0.8}, {1}, {-1});
    CHECK(kernels::h_phase(zero, single) == 0.0);
    // n = 1: xi1 eta0 X_{1,0} = -xi1 X_{1,0}
    const double x10 = r_closed(0.5) + r_closed(0.3) - r_closed(0.8);
    CHECK(kernels::h_phase(table, single) == doctest::Approx(-x10).epsilon(1e-7));

    const auto path = two_blip_path({1, -1}, {-1, 1});
    const auto x = [&](int j, int k) { return kernels::x_jk(table, path, j, k); };
    const double expected = 1.0 * (-1.0) * x(1, 0) + (-1.0) * (-1.0) * x(2, 0) +
                            (-1.0) * (1.0) * x(2, 1);
    CHECK(kernels::h_phase(table, path) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("phi_phase reductions") {
    const drive::SystemSpec unbiased{1.0, 0.0};
    const drive::SystemSpec biased{1.0, 0.8};
    const auto none = drive::DriveProtocol::none();

    const auto single = BlipPath::make(1.0, {0.3, 0.8}, {1}, {-1});
    CHECK(kernels::phi_phase(none, unbiased, single) == 0.0);
    CHECK(kernels::phi_phase(none, biased, single) == doctest::Approx(0.8 * 0.5).epsilon(1e-14));

    // sinusoidal drive: eps0 tau + (A/W)(cos W t1 - cos W t2)
    const auto sine = drive::DriveProtocol::sinusoidal(0.6, 2.0);
    const double expected =
        0.8 * 0.5 + (0.6 / 2.0) * (std::cos(2.0 * 0.3) - std::cos(2.0 * 0.8));
    CHECK(kernels::phi_phase(sine, biased, single) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("phase-work identity holds to machine precision") {
    const drive::SystemSpec system{1.0, 0.8};
    const std::vector<drive::DriveProtocol> drives = {
        drive::DriveProtocol::none(),
        drive::DriveProtocol::constant_after_zero(0.4),
        drive::DriveProtocol::rectangular_pulse(0.7, 0.2, 0.9),
        drive::DriveProtocol::sinusoidal(0.5, 3.0),
        drive::DriveProtocol::piecewise_linear({0.0, 0.5, 1.0, 2.0}, {0.0, 0.4, -0.3, 0.1}),
    };

    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(trial % 4);
        const auto times = random_sorted_times(500 + trial, 2 * n, 2.0);
        std::vector<int> xi(static_cast<std::size_t>(n));
        std::vector<int> eta(static_cast<std::size_t>(n));
        eta[0] = -1;
        for (int j = 0; j < n; ++j) {
            xi[static_cast<std::size_t>(j)] =
                num::uniform01(num::stream_key(trial, 21, static_cast<std::uint64_t>(j))) < 0.5
                    ? -1
                    : 1;
            if (j > 0)
                eta[static_cast<std::size_t>(j)] =
                    num::uniform01(num::stream_key(trial, 22, static_cast<std::uint64_t>(j))) <
                            0.5
                        ? -1
                        : 1;
        }
        const auto path = BlipPath::make(2.0, times, xi, eta);
        const auto& p = drives[trial % drives.size()];

        const double direct = kernels::phi_phase(p, system, path);
        double bias = 0.0, work_integral = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double t1 = path.time_point(2 * j - 1);
            const double t2 = path.time_point(2 * j);
            bias += path.xi[static_cast<std::size_t>(j - 1)] * system.epsilon0 * (t2 - t1);
            work_integral +=
                drive::ns_work_window(p, path.xi[static_cast<std::size_t>(j - 1)], t1, t2);
        }
        const double via_work = bias - work_integral;
        CHECK(std::abs(direct - via_work) <= 1e-12 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("global blip-sign flip negates phases and preserves q exactly") {
    const auto table = fine_table();
    const drive::SystemSpec system{1.0, 0.8};
    const auto sine = drive::DriveProtocol::sinusoidal(0.5, 3.0);

    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(trial % 3);
        const auto times = random_sorted_times(900 + trial, 2 * n, 2.0);
        std::vector<int> xi(static_cast<std::size_t>(n), 1);
        std::vector<int> eta(static_cast<std::size_t>(n), 1);
        eta[0] = -1;
        for (int j = 0; j < n; ++j)
            if (num::uniform01(num::stream_key(trial, 31, static_cast<std::uint64_t>(j))) < 0.5)
                xi[static_cast<std::size_t>(j)] = -1;

        std::vector<int> flipped(xi);
        for (int& v : flipped) v = -v;

        const auto path = BlipPath::make(2.0, times, xi, eta);
        const auto path_f = BlipPath::make(2.0, times, flipped, eta);

        CHECK(kernels::phi_phase(sine, system, path_f) ==
              -kernels::phi_phase(sine, system, path));
        CHECK(kernels::h_phase(table, path_f) == -kernels::h_phase(table, path));
        CHECK(kernels::q_amplitude(table, path_f) == kernels::q_amplitude(table, path));
    }
}

TEST_CASE("zero-length blip contributes nothing anywhere") {
    const auto table = fine_table();
    const drive::SystemSpec system{1.0, 0.8};
    const auto sine = drive::DriveProtocol::sinusoidal(0.5, 3.0);

    // blip 2 has zero length: t3 = t4
    const auto path = BlipPath::make(1.0, {0.1, 0.4, 0.6, 0.6}, {1, 1}, {-1, 1});
    const auto base = BlipPath::make(1.0, {0.1, 0.4}, {1}, {-1});

    CHECK(kernels::lambda_jk(table, path, 2, 1) == 0.0);
    CHECK(kernels::x_jk(table, path, 2, 1) == 0.0);
    CHECK(kernels::x_jk(table, path, 2, 0) == 0.0);
    CHECK(kernels::q_amplitude(table, path) ==
          doctest::Approx(kernels::q_amplitude(table, base)).epsilon(1e-15));
    CHECK(kernels::phi_phase(sine, system, path) ==
          doctest::Approx(kernels::phi_phase(sine, system, base)).epsilon(1e-15));
}

TEST_CASE("influence_factors gathers the three factors") {
    const auto table = fine_table();
    const drive::SystemSpec system{1.0, 0.8};
    const auto sine = drive::DriveProtocol::sinusoidal(0.5, 3.0);
    const auto path = two_blip_path({1, -1}, {-1, 1});
    const auto factors = kernels::influence_factors(table, sine, system, path);
    CHECK(factors.q_n == kernels::q_amplitude(table, path));
    CHECK(factors.h_n_phase == kernels::h_phase(table, path));
    CHECK(factors.phi_n == kernels::phi_phase(sine, system, path));
}
