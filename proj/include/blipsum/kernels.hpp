// kernels.hpp — Per-configuration influence-functional factors: pairwise
// blip-blip and blip-sojourn kernels and the amplitude/phase factors of one
// discrete path configuration. Index conventions are 1-based to match the
// series formulas; time index 0 refers to the preparation time t0 = 0.

#pragma once

#include <span>
#include <vector>

#include "blipsum/bath.hpp"
#include "blipsum/drive.hpp"

namespace blipsum::kernels {

// One discrete path configuration: n blips with transition times
// t1 <= ... <= t_{2n} inside [0, total_time], blip signs xi_j and sojourn
// signs eta_k (k = 0..n-1, eta_0 = -1 for the initial |L> restriction).
// Ties (zero-length blips or sojourns) are allowed as degenerate
// measure-zero configurations; every kernel involving them vanishes.
struct BlipPath {
    int n = 0;
    double total_time = 0.0;
    std::vector<double> times;  // 2n entries
    std::vector<int> xi;        // n entries, each +-1
    std::vector<int> eta;       // n entries, each +-1, eta[0] = -1

    static BlipPath make(double total_time, std::vector<double> times, std::vector<int> xi,
                         std::vector<int> eta);
    void validate() const;

    // 1-based time access; index 0 is the preparation time.
    double time_point(int i) const { return i == 0 ? 0.0 : times[static_cast<std::size_t>(i - 1)]; }
};

struct InfluenceFactors {
    double q_n = 1.0;        // positive amplitude
    double h_n_phase = 0.0;  // radians; the eta-resolved factor is exp(i h_n_phase)
    double phi_n = 0.0;      // radians; drive/bias phase
};

// Blip-blip interaction kernel, 1 <= k < j <= n:
//   Lambda_{j,k} = S_{2j,2k-1} + S_{2j-1,2k} - S_{2j,2k} - S_{2j-1,2k-1}.
double lambda_jk(const bath::KernelTable& table, const BlipPath& path, int j, int k);

// Blip-sojourn interaction kernel, 0 <= k <= j-1:
//   X_{j,k} = R_{2j,2k+1} + R_{2j-1,2k} - R_{2j,2k} - R_{2j-1,2k+1},
// where index 2k with k = 0 references t0 = 0.
double x_jk(const bath::KernelTable& table, const BlipPath& path, int j, int k);

// Q_n = exp(-sum_j S_{2j,2j-1} - sum_{j>k} xi_j xi_k Lambda_{j,k}); always > 0.
double q_amplitude(const bath::KernelTable& table, const BlipPath& path);

// Phase of H_n: sum_{j=1}^{n} sum_{k=0}^{j-1} xi_j eta_k X_{j,k}.
double h_phase(const bath::KernelTable& table, const BlipPath& path);

// Phi_n = sum_j xi_j [eps0 (t_{2j}-t_{2j-1}) + g(t_{2j}) - g(t_{2j-1})].
double phi_phase(const drive::DriveProtocol& p, const drive::SystemSpec& system,
                 const BlipPath& path);

InfluenceFactors influence_factors(const bath::KernelTable& table,
                                   const drive::DriveProtocol& p,
                                   const drive::SystemSpec& system, const BlipPath& path);

}  // namespace blipsum::kernels
