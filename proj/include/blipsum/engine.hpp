// engine.hpp — Evaluates the left-to-right transition-probability series by
// exact summation over the discrete sign configurations and numerical
// integration over the time-ordered simplex, per order in the number of blips.
// A factorized evaluator covers the non-interacting-blip limit.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "blipsum/bath.hpp"
#include "blipsum/drive.hpp"
#include "blipsum/kernels.hpp"

namespace blipsum::engine {

enum class Quadrature {
    Deterministic,  // tensor Gauss-Legendre on the nested product map, all orders
    MonteCarlo,     // sorted-uniform sampling of the ordered simplex, all orders
    Hybrid,         // deterministic through det_max_order, Monte Carlo above
};

// The drive phase can be assembled directly (per-blip eps0 and g differences
// fused) or through the nonstationary-work exponent (bias phase and work
// integral accumulated separately). Both are algebraically identical; keeping
// the two code paths allows node-by-node cross-checks.
enum class Assembly { Phase, Work };

struct EngineConfig {
    int n_max = 4;  // 1..8
    Quadrature quadrature = Quadrature::Hybrid;
    int det_max_order = 2;             // hybrid switch-over order
    std::int64_t mc_samples = 100000;  // per order
    std::uint64_t seed = 1;
    int det_points_per_dim = 16;
    std::vector<double> target_times;  // increasing, >= 0
    bool niba = false;                 // requires zero_lambda and nearest_sojourn_only
    bool zero_lambda = false;          // force Lambda_{j,k} = 0
    bool nearest_sojourn_only = false; // force X_{j,k} = 0 for k != j-1
    Assembly assembly = Assembly::Phase;
    bool cross_check_assembly = false; // evaluate both assemblies per node, record deviation
    double series_tol = 0.0;           // stop orders once |term| < tol * |sum|; 0 = never
    std::int64_t eval_budget = 400000000;  // integrand evaluations allowed per order/time
    int threads = 0;                   // 0 = hardware concurrency
    std::int64_t mc_block = 8192;      // fixed reduction block (determinism contract)

    void validate() const;
    bool operator==(const EngineConfig&) const = default;
};

struct OrderTerm {
    double value = 0.0;
    double std_error = 0.0;         // 0 for deterministic quadrature
    double imag_integral = 0.0;     // quadrature-weighted imaginary part before discard
    double max_node_imag_rel = 0.0; // max |Im F| / max(1, envelope) over evaluated nodes
    double max_assembly_dev = 0.0;  // only filled in cross-check mode
    std::int64_t evaluations = 0;
    bool monte_carlo = false;
};

struct SeriesResult {
    std::vector<double> times;
    std::vector<double> p_values;
    std::vector<std::vector<double>> per_order;  // [time][order-1], 0 for skipped orders
    std::vector<double> mc_stderr;               // rss over orders
    std::vector<double> truncation_estimate;     // |last included order term|
    std::vector<double> imag_residual;           // |sum of integrated imaginary parts|
    std::vector<double> max_node_imag_rel;
    std::vector<double> assembly_deviation;      // cross-check mode, else 0
    std::vector<std::uint8_t> growth_warning;    // last order grew in magnitude
    std::vector<std::uint8_t> range_warning;     // p outside [-delta, 1+delta]
    bool any_warning = false;
};

// Compensated re-sum of stored per-order contributions; the engine uses the
// same routine, so re-summing reproduces p_values bit for bit.
double series_sum(std::span<const double> per_order_terms);

// Integrand of one ordered time configuration after the exact (xi, eta) sum.
// The eta sum is carried out in closed form (the phase is linear in each
// eta_k), the xi sum by enumeration of all 2^n sign words. `envelope` is the
// sum of the absolute sign-word magnitudes, the natural scale for residuals.
struct NodeValue {
    double re = 0.0;
    double im = 0.0;
    double envelope = 0.0;
};

NodeValue order_integrand(const drive::SystemSpec& system, const bath::KernelTable& table,
                          const drive::DriveProtocol& drive_p, std::span<const double> times,
                          bool zero_lambda, bool nearest_sojourn_only,
                          Assembly assembly = Assembly::Phase);

// Factorized per-blip integrand (cost O(n)); valid when blip-blip kernels are
// dropped and only nearest-sojourn couplings are kept.
NodeValue niba_integrand(const drive::SystemSpec& system, const bath::KernelTable& table,
                         const drive::DriveProtocol& drive_p, std::span<const double> times,
                         Assembly assembly = Assembly::Phase);

// Contribution of blip order n to p(t).
OrderTerm order_n_term(const drive::SystemSpec& system, const bath::KernelTable& table,
                       const drive::DriveProtocol& drive_p, int n, double t,
                       const EngineConfig& cfg);

SeriesResult transition_probability(const drive::SystemSpec& system,
                                    const bath::KernelTable& table,
                                    const drive::DriveProtocol& drive_p,
                                    const EngineConfig& cfg);

// Same contract, evaluated with the factorized per-blip form; requires
// cfg.niba (which implies the two kernel flags).
SeriesResult transition_probability_niba(const drive::SystemSpec& system,
                                         const bath::KernelTable& table,
                                         const drive::DriveProtocol& drive_p,
                                         const EngineConfig& cfg);

// Generalized average over an explicit batch of sign configurations at fixed
// times: sum of exp(i xi_j eps0 tau_j) Q_n H_n exp(-i sum_j int W_ns,j), with
// the work exponent assembled from the drive-work windows.
struct WorkFormAverage {
    double real = 0.0;
    double imag = 0.0;
};

WorkFormAverage work_form_average(const drive::SystemSpec& system,
                                  const bath::KernelTable& table,
                                  const drive::DriveProtocol& drive_p,
                                  std::span<const kernels::BlipPath> batch);

// All 2^n x 2^{n-1} sign configurations at the given times (eta_0 = -1).
std::vector<kernels::BlipPath> enumerate_sign_configs(int n, std::span<const double> times,
                                                      double total_time);

}  // namespace blipsum::engine
