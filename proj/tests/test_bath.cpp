#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blipsum/bath.hpp"
#include "blipsum/errors.hpp"
#include "blipsum/oracles.hpp"

using namespace blipsum;
using bath::BathSpec;

// expected values computed independently with 30-digit quadrature
namespace frozen {
constexpr double spectral_at_cutoff = 2.3114546995818436;   // 2 pi 0.1 * 10 * e^-1
constexpr double s_wctau_1 = 0.17328679513998633;           // 0.25 ln 2
constexpr double s_wctau_3 = 0.57564627324851142;           // 0.25 ln 10
constexpr double r_wctau_1 = 0.39269908169872415;           // pi/8
constexpr double s_T1_tau03 = 0.63868817900563136;          // alpha=.25 s=1 wc=10 T=1
constexpr double s_T05_tau1 = 1.33299354830844623;          // alpha=.25 s=1 wc=10 T=.5
constexpr double s_sub_T0 = 0.41829183913793844;            // s=.5 T=0 tau=.5
constexpr double s_sub_T2 = 1.08532780283716290;            // s=.5 T=2 tau=.5
constexpr double s_super_T1 = 2.30274199715143606;          // s=1.5 T=1 tau=.7
constexpr double r_sub = 0.80241664959123014;               // s=.5 tau=.5
constexpr double r_super = 0.69052194094760736;             // s=1.5 tau=.7
}  // namespace frozen

TEST_CASE("spectral density definition and edge cases") {
    BathSpec ohmic{0.1, 1.0, 10.0, 0.0};
    CHECK(bath::spectral_density({0.0, 1.0, 10.0, 0.0}, 1.0) == 0.0);
    CHECK(bath::spectral_density(ohmic, 0.0) == 0.0);
    // linear onset with slope 2 pi alpha
    const double w = 1e-8;
    CHECK(bath::spectral_density(ohmic, w) ==
          doctest::Approx(2.0 * M_PI * 0.1 * w).epsilon(1e-6));
    CHECK(bath::spectral_density(ohmic, 10.0) ==
          doctest::Approx(frozen::spectral_at_cutoff).epsilon(1e-14));
    CHECK_THROWS_AS(bath::spectral_density(ohmic, -1.0), DomainError);
}

TEST_CASE("bath spec validation") {
    CHECK_THROWS_AS(bath::correlator_s({-0.1, 1.0, 10.0, 0.0}, 1.0), DomainError);
    CHECK_THROWS_AS(bath::correlator_s({0.1, 0.0, 10.0, 0.0}, 1.0), DomainError);
    CHECK_THROWS_AS(bath::correlator_s({0.1, 2.5, 10.0, 0.0}, 1.0), DomainError);
    CHECK_THROWS_AS(bath::correlator_s({0.1, 1.0, 0.0, 0.0}, 1.0), DomainError);
    CHECK_THROWS_AS(bath::correlator_s({0.1, 1.0, 10.0, -1.0}, 1.0), DomainError);
}

TEST_CASE("ohmic closed forms at T = 0") {
    BathSpec spec{0.25, 1.0, 10.0, 0.0};
    CHECK(bath::correlator_s(spec, 0.0) == 0.0);
    CHECK(bath::correlator_r(spec, 0.0) == 0.0);
    CHECK(bath::correlator_s(spec, 0.1) == doctest::Approx(frozen::s_wctau_1).epsilon(1e-14));
    CHECK(bath::correlator_s(spec, 0.3) == doctest::Approx(frozen::s_wctau_3).epsilon(1e-14));
    CHECK(bath::correlator_r(spec, 0.1) == doctest::Approx(frozen::r_wctau_1).epsilon(1e-14));
    // R saturates at 2 alpha pi/2
    CHECK(bath::correlator_r(spec, 1e8) == doctest::Approx(M_PI / 4.0).epsilon(1e-8));
}

TEST_CASE("parity extensions are exact") {
    BathSpec spec{0.25, 1.0, 10.0, 0.7};
    for (double tau : {0.05, 0.2, 0.9, 2.5}) {
        CHECK(bath::correlator_s(spec, -tau) == bath::correlator_s(spec, tau));
        CHECK(bath::correlator_r(spec, -tau) == -bath::correlator_r(spec, tau));
    }
}

TEST_CASE("zero coupling kills both correlators exactly") {
    BathSpec spec{0.0, 1.0, 10.0, 1.0};
    for (double tau : {0.0, 0.1, 1.0, 7.3}) {
        CHECK(bath::correlator_s(spec, tau) == 0.0);
        CHECK(bath::correlator_r(spec, tau) == 0.0);
    }
}

TEST_CASE("S is non-decreasing in temperature") {
    const double tau = 0.3;
    double prev = -1.0;
    for (double temperature : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
        BathSpec spec{0.25, 1.0, 10.0, temperature};
        const double v = bath::correlator_s(spec, tau);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("finite temperature and non-ohmic quadrature anchors") {
    CHECK(bath::correlator_s({0.25, 1.0, 10.0, 1.0}, 0.3) ==
          doctest::Approx(frozen::s_T1_tau03).epsilon(2e-7));
    CHECK(bath::correlator_s({0.25, 1.0, 10.0, 0.5}, 1.0) ==
          doctest::Approx(frozen::s_T05_tau1).epsilon(2e-7));
    CHECK(bath::correlator_s({0.25, 0.5, 10.0, 0.0}, 0.5) ==
          doctest::Approx(frozen::s_sub_T0).epsilon(2e-7));
    CHECK(bath::correlator_s({0.25, 0.5, 10.0, 2.0}, 0.5) ==
          doctest::Approx(frozen::s_sub_T2).epsilon(2e-7));
    CHECK(bath::correlator_s({0.25, 1.5, 10.0, 1.0}, 0.7) ==
          doctest::Approx(frozen::s_super_T1).epsilon(2e-7));
    CHECK(bath::correlator_r({0.25, 0.5, 10.0, 0.0}, 0.5) ==
          doctest::Approx(frozen::r_sub).epsilon(2e-7));
    CHECK(bath::correlator_r({0.25, 1.5, 10.0, 0.0}, 0.7) ==
          doctest::Approx(frozen::r_super).epsilon(2e-7));
}

TEST_CASE("R is temperature independent bit for bit") {
    for (double tau : {0.07, 0.4, 1.9}) {
        const double cold = bath::correlator_r({0.3, 0.5, 8.0, 0.0}, tau);
        const double warm = bath::correlator_r({0.3, 0.5, 8.0, 3.0}, tau);
        CHECK(cold == warm);
    }
}

TEST_CASE("closed forms match the independent quadrature oracle") {
    BathSpec spec{0.25, 1.0, 10.0, 0.0};
    for (double wctau : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        const double tau = wctau / spec.omega_c;
        const auto pair = oracles::quadrature_correlators(spec, tau, 1e-9);
        const double s_closed = bath::correlator_s(spec, tau);
        const double r_closed = bath::correlator_r(spec, tau);
        CHECK(std::abs(pair.s - s_closed) <= 1e-6 * std::abs(s_closed));
        CHECK(std::abs(pair.r - r_closed) <= 1e-6 * std::abs(r_closed));
    }
}

TEST_CASE("kernel table: zero coupling table is exactly zero") {
    const auto table = bath::KernelTable::build({0.0, 1.0, 10.0, 0.0}, 5.0, 1e-8);
    CHECK(table.zero_coupling());
    for (double tau : {0.0, 0.5, 2.2, 5.0}) {
        CHECK(table.s_at(tau) == 0.0);
        CHECK(table.r_at(tau) == 0.0);
    }
}

TEST_CASE("kernel table reproduces the correlators at midpoints and beyond") {
    BathSpec spec{0.25, 1.0, 10.0, 0.0};
    const double tol = 1e-8;
    const auto table = bath::KernelTable::build(spec, 10.0, tol);
    CHECK(table.s_at(0.0) == 0.0);
    CHECK(table.r_at(0.0) == 0.0);

    const auto grid = table.grid();
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); i += 7) {
        const double m = 0.5 * (grid[i] + grid[i + 1]);
        worst = std::max(worst, std::abs(table.s_at(m) - bath::correlator_s(spec, m)));
        worst = std::max(worst, std::abs(table.r_at(m) - bath::correlator_r(spec, m)));
    }
    CHECK(worst <= tol);

    // general queries stay close to the direct evaluation
    for (int i = 0; i < 200; ++i) {
        const double tau = 10.0 * (i + 0.37) / 200.4;
        CHECK(std::abs(table.s_at(tau) - bath::correlator_s(spec, tau)) <= 1e-7);
        CHECK(std::abs(table.r_at(tau) - bath::correlator_r(spec, tau)) <= 1e-7);
    }
    for (double v : table.s_values()) CHECK(v >= 0.0);
}

TEST_CASE("kernel table error paths") {
    BathSpec spec{0.25, 1.0, 10.0, 0.0};
    CHECK_THROWS_AS(bath::KernelTable::build(spec, -1.0, 1e-8), DomainError);
    CHECK_THROWS_AS(bath::KernelTable::build(spec, 5.0, 0.0), DomainError);
    CHECK_THROWS_AS(bath::KernelTable::build(spec, 10.0, 1e-14, 80), ResourceError);
    const auto table = bath::KernelTable::build(spec, 2.0, 1e-8);
    CHECK_THROWS_AS(table.s_at(2.5), DomainError);
    CHECK_THROWS_AS(table.r_at(-0.5), DomainError);
}
