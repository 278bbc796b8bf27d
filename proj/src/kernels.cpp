#include "blipsum/kernels.hpp"

#include <cmath>
#include <string>

#include "blipsum/errors.hpp"

namespace blipsum::kernels {

BlipPath BlipPath::make(double total_time, std::vector<double> times, std::vector<int> xi,
                        std::vector<int> eta) {
    BlipPath path;
    path.n = static_cast<int>(xi.size());
    path.total_time = total_time;
    path.times = std::move(times);
    path.xi = std::move(xi);
    path.eta = std::move(eta);
    path.validate();
    return path;
}

void BlipPath::validate() const {
    if (n < 1) throw DomainError("blip path: n must be >= 1");
    if (times.size() != static_cast<std::size_t>(2 * n))
        throw DomainError("blip path: expected 2n transition times");
    if (xi.size() != static_cast<std::size_t>(n) || eta.size() != static_cast<std::size_t>(n))
        throw DomainError("blip path: xi and eta must each have n entries");
    if (!(total_time >= 0.0)) throw DomainError("blip path: total_time must be >= 0");
    double prev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < prev - 0.0 || times[i] > total_time)
            throw DomainError("blip path: times must be nondecreasing within [0, t] (index " +
                              std::to_string(i) + ")");
        prev = times[i];
    }
    for (int v : xi)
        if (v != 1 && v != -1) throw DomainError("blip path: xi entries must be +-1");
    for (int v : eta)
        if (v != 1 && v != -1) throw DomainError("blip path: eta entries must be +-1");
    if (eta[0] != -1) throw DomainError("blip path: eta_0 must be -1 (initial state L)");
}

double lambda_jk(const bath::KernelTable& table, const BlipPath& path, int j, int k) {
    if (!(k >= 1 && k < j && j <= path.n))
        throw DomainError("lambda_jk: requires 1 <= k < j <= n");
    const double t2j = path.time_point(2 * j);
    const double t2jm1 = path.time_point(2 * j - 1);
    const double t2k = path.time_point(2 * k);
    const double t2km1 = path.time_point(2 * k - 1);
    // difference pairing cancels exactly for zero-length blips j or k
    return (table.s_at(t2j - t2km1) - table.s_at(t2jm1 - t2km1)) +
           (table.s_at(t2jm1 - t2k) - table.s_at(t2j - t2k));
}

double x_jk(const bath::KernelTable& table, const BlipPath& path, int j, int k) {
    if (!(k >= 0 && k <= j - 1 && j >= 1 && j <= path.n))
        throw DomainError("x_jk: requires 0 <= k <= j-1 <= n-1");
    const double t2j = path.time_point(2 * j);
    const double t2jm1 = path.time_point(2 * j - 1);
    const double t2k = path.time_point(2 * k);      // k = 0 -> preparation time 0
    const double t2kp1 = path.time_point(2 * k + 1);
    // difference pairing cancels exactly for zero-length blip j or sojourn k
    return (table.r_at(t2j - t2kp1) - table.r_at(t2j - t2k)) +
           (table.r_at(t2jm1 - t2k) - table.r_at(t2jm1 - t2kp1));
}

double q_amplitude(const bath::KernelTable& table, const BlipPath& path) {
    path.validate();
    double exponent = 0.0;
    for (int j = 1; j <= path.n; ++j)
        exponent += table.s_at(path.time_point(2 * j) - path.time_point(2 * j - 1));
    for (int j = 2; j <= path.n; ++j)
        for (int k = 1; k <= j - 1; ++k)
            exponent += static_cast<double>(path.xi[static_cast<std::size_t>(j - 1)]) *
                        static_cast<double>(path.xi[static_cast<std::size_t>(k - 1)]) *
                        lambda_jk(table, path, j, k);
    return std::exp(-exponent);
}

double h_phase(const bath::KernelTable& table, const BlipPath& path) {
    path.validate();
    double phase = 0.0;
    for (int j = 1; j <= path.n; ++j)
        for (int k = 0; k <= j - 1; ++k)
            phase += static_cast<double>(path.xi[static_cast<std::size_t>(j - 1)]) *
                     static_cast<double>(path.eta[static_cast<std::size_t>(k)]) *
                     x_jk(table, path, j, k);
    return phase;
}

double phi_phase(const drive::DriveProtocol& p, const drive::SystemSpec& system,
                 const BlipPath& path) {
    path.validate();
    double phase = 0.0;
    for (int j = 1; j <= path.n; ++j) {
        const double t1 = path.time_point(2 * j - 1);
        const double t2 = path.time_point(2 * j);
        phase += static_cast<double>(path.xi[static_cast<std::size_t>(j - 1)]) *
                 (system.epsilon0 * (t2 - t1) + p.g_between(t1, t2));
    }
    return phase;
}

InfluenceFactors influence_factors(const bath::KernelTable& table,
                                   const drive::DriveProtocol& p,
                                   const drive::SystemSpec& system, const BlipPath& path) {
    InfluenceFactors out;
    out.q_n = q_amplitude(table, path);
    out.h_n_phase = h_phase(table, path);
    out.phi_n = phi_phase(p, system, path);
    return out;
}

}  // namespace blipsum::kernels
