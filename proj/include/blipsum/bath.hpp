// bath.hpp — Environment spectral density and the correlation integrals S(tau),
// R(tau) feeding every influence kernel. Units: hbar = 1, frequencies in Delta,
// temperature is k_B T in hbar*Delta. Prefactors are absorbed so that the Ohmic
// (s = 1) results are S|T=0 = 2 alpha ln sqrt(1+(wc tau)^2) and
// R = 2 alpha arctan(wc tau).

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace blipsum::bath {

struct BathSpec {
    double alpha = 0.0;        // dimensionless coupling strength, >= 0
    double s = 1.0;            // spectral exponent, in (0, 2]
    double omega_c = 10.0;     // cutoff frequency, > 0
    double temperature = 0.0;  // k_B T; 0 means T = 0 exactly (coth -> 1 branch)

    void validate() const;  // throws DomainError on violation
    bool operator==(const BathSpec&) const = default;
};

// J(w) = 2 pi alpha w^s exp(-w/wc). Requires w >= 0.
double spectral_density(const BathSpec& spec, double omega);

// Real part of the bath correlation integral; even in tau, non-negative,
// S(0) = 0. The only temperature-dependent kernel.
double correlator_s(const BathSpec& spec, double tau);

// Imaginary part; odd in tau, temperature independent, R(0) = 0.
double correlator_r(const BathSpec& spec, double tau);

// Immutable sampled S/R table with local cubic interpolation. Built once,
// then shared read-only across worker threads.
class KernelTable {
  public:
    // Adaptive grid on [0, tau_max]: refines until cubic interpolation at every
    // grid midpoint reproduces the direct correlators within `tolerance`
    // (absolute). Throws ResourceError when max_nodes is not enough.
    static KernelTable build(const BathSpec& spec, double tau_max, double tolerance,
                             std::size_t max_nodes = 60000);

    // All-zero table (zero coupling or test scaffolding).
    static KernelTable zero(double tau_max);

    // Table built from externally supplied exact correlators on an adaptive
    // grid (used by the few-mode oracle's discrete baths).
    template <typename FS, typename FR>
    static KernelTable from_functions(FS&& s_fn, FR&& r_fn, double tau_max,
                                      double tolerance, std::size_t max_nodes = 60000);

    double s_at(double tau) const;  // tau in [0, tau_max]
    double r_at(double tau) const;

    bool zero_coupling() const { return zero_; }
    double tau_max() const { return tau_.back(); }
    int interpolation_order() const { return 3; }
    std::size_t size() const { return tau_.size(); }

    std::span<const double> grid() const { return tau_; }
    std::span<const double> s_values() const { return s_; }
    std::span<const double> r_values() const { return r_; }

  private:
    KernelTable() = default;
    static KernelTable build_impl(const std::function<double(double)>& s_fn,
                                  const std::function<double(double)>& r_fn,
                                  double tau_max, double tolerance, std::size_t max_nodes,
                                  bool zero);

    std::vector<double> tau_;
    std::vector<double> s_;
    std::vector<double> r_;
    bool zero_ = false;
};

template <typename FS, typename FR>
KernelTable KernelTable::from_functions(FS&& s_fn, FR&& r_fn, double tau_max,
                                        double tolerance, std::size_t max_nodes) {
    return build_impl(std::function<double(double)>(std::forward<FS>(s_fn)),
                      std::function<double(double)>(std::forward<FR>(r_fn)), tau_max,
                      tolerance, max_nodes, false);
}

}  // namespace blipsum::bath
