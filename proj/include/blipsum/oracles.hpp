// oracles.hpp — Independent, slower ground-truth computations used to validate
// the series engine and the bath module: exact driven two-level dynamics at
// zero coupling, truncated few-mode unitary evolution, direct quadrature of the
// bath correlators, and the two-point-measurement work statistics of the
// closed driven two-level system.

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "blipsum/bath.hpp"
#include "blipsum/drive.hpp"

namespace blipsum::oracles {

// |<R|psi(t)>|^2 from adaptive high-order integration of the two-level
// Schrodinger equation with H(t) = -(Delta/2) sx - (eps_T(t)/2) sz, psi(0) = |L>.
std::vector<double> tls_ode_probability(const drive::SystemSpec& system,
                                        const drive::DriveProtocol& drive_p,
                                        std::span<const double> t_grid,
                                        double ode_tol = 1e-12);

// A small set of harmonic modes with H_I = (sz/2) sum_k lambda_k (a_k + a_k^dag),
// i.e. the discrete spectral density J(w) = pi sum_k lambda_k^2 delta(w - w_k).
struct FewModeBath {
    std::vector<double> frequencies;
    std::vector<double> couplings;  // lambda_k
    int fock_cutoff = 6;            // levels per mode (occupations 0..cutoff-1), 2..8
    double temperature = 0.0;
    int thermal_samples = 64;       // Gibbs sampling for 3-4 modes at T > 0
    std::uint64_t seed = 1;
    double convergence_tol = 1e-4;  // allowed drift under cutoff doubling

    // Equal-spectral-weight discretization of a continuum bath over [0, 4 wc].
    static FewModeBath discretize(const bath::BathSpec& spec, int mode_count,
                                  int fock_cutoff);

    void validate() const;

    // Exact discrete-bath correlators (closed sums over the modes); feeding
    // these to the series engine puts both sides on the same model.
    double s_disc(double tau) const;
    double r_disc(double tau) const;
};

// p_{L->R}(t) from exact propagation in the truncated product space. The
// thermal initial state is handled as an exact weighted mixture of Fock
// configurations for <= 2 modes and by Gibbs sampling above. A smaller-cutoff
// companion run verifies convergence under cutoff doubling.
std::vector<double> few_mode_exact_probability(const drive::SystemSpec& system,
                                               const FewModeBath& bath_modes,
                                               const drive::DriveProtocol& drive_p,
                                               std::span<const double> t_grid,
                                               double ode_tol = 1e-10);

// ---- two-point-measurement work statistics (closed driven TLS) --------------

struct TpmDistribution {
    std::vector<double> work;  // distinct work values (merged degeneracies)
    std::vector<double> prob;  // matching probabilities, summing to 1
};

TpmDistribution tpm_work_distribution(const drive::SystemSpec& system,
                                      const drive::DriveProtocol& drive_p, double tau);

// chi_W(nu) = sum_W P(W) e^{i nu W}; chi(0) = 1 exactly.
std::complex<double> tpm_characteristic_function(const drive::SystemSpec& system,
                                                 const drive::DriveProtocol& drive_p,
                                                 double nu, double tau);

// Evaluates chi on a grid with a single propagation.
std::vector<std::complex<double>> tpm_characteristic_curve(const drive::SystemSpec& system,
                                                           const drive::DriveProtocol& drive_p,
                                                           std::span<const double> nu_grid,
                                                           double tau);

// <W> via the trace form Tr[H(tau) U rho_bar U^dag] - Tr[H(0) rho_bar] with
// rho_bar the H(0)-dephased initial state.
double tpm_mean_work(const drive::SystemSpec& system, const drive::DriveProtocol& drive_p,
                     double tau);

// Least-squares recovery of P(W) from chi samples on the known work support.
std::vector<double> tpm_reconstruct_distribution(std::span<const double> nu_grid,
                                                 std::span<const std::complex<double>> chi,
                                                 std::span<const double> work_support);

// ---- direct correlator quadrature -------------------------------------------

struct CorrelatorPair {
    double s = 0.0;
    double r = 0.0;
};

// Brute-force adaptive Simpson quadrature of the S/R integrals, independent of
// the bath module's closed forms and segmented Gauss-Legendre path.
CorrelatorPair quadrature_correlators(const bath::BathSpec& spec, double tau,
                                      double rel_tol = 1e-8);

}  // namespace blipsum::oracles
