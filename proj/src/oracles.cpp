#include "blipsum/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "blipsum/errors.hpp"
#include "blipsum/numerics.hpp"

namespace blipsum::oracles {

namespace {

using Complex = std::complex<double>;
using State = std::vector<Complex>;
namespace odeint = boost::numeric::odeint;

using Stepper = odeint::runge_kutta_fehlberg78<State>;

template <typename System, typename Observer>
void integrate_grid(System&& system, State& state, std::span<const double> t_grid,
                    double tol, Observer&& observer) {
    auto controlled = odeint::make_controlled<Stepper>(tol, tol);
    std::vector<double> times(t_grid.begin(), t_grid.end());
    double dt0 = 1e-3;
    if (times.size() >= 2) dt0 = std::max(1e-6, 1e-3 * (times.back() - times.front()));
    odeint::integrate_times(controlled, std::forward<System>(system), state, times.begin(),
                            times.end(), dt0, std::forward<Observer>(observer));
}

}  // namespace

std::vector<double> tls_ode_probability(const drive::SystemSpec& system,
                                        const drive::DriveProtocol& drive_p,
                                        std::span<const double> t_grid, double ode_tol) {
    system.validate();
    if (t_grid.empty()) throw DomainError("oracles: empty time grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw DomainError("oracles: time grid must be strictly increasing");
    if (t_grid.front() < 0.0) throw DomainError("oracles: times must be >= 0");

    const double delta = system.delta;
    const double eps0 = system.epsilon0;
    auto rhs = [&](const State& psi, State& dpsi, double t) {
        const double eps_t = eps0 + drive_p.bias_at(t);
        const Complex mi(0.0, -1.0);
        // basis (|R>, |L>): H = [[-eps/2, -Delta/2], [-Delta/2, +eps/2]]
        dpsi[0] = mi * (-0.5 * eps_t * psi[0] - 0.5 * delta * psi[1]);
        dpsi[1] = mi * (-0.5 * delta * psi[0] + 0.5 * eps_t * psi[1]);
    };

    std::vector<double> p;
    p.reserve(t_grid.size());
    State psi = {Complex(0.0, 0.0), Complex(1.0, 0.0)};  // |L>

    std::vector<double> times(t_grid.begin(), t_grid.end());
    const bool starts_at_zero = times.front() == 0.0;
    if (!starts_at_zero) times.insert(times.begin(), 0.0);
    integrate_grid(rhs, psi, times, ode_tol, [&](const State& s, double t) {
        if (!starts_at_zero && t == 0.0) return;
        p.push_back(std::norm(s[0]));
    });
    return p;
}

// ---- few-mode bath -----------------------------------------------------------

FewModeBath FewModeBath::discretize(const bath::BathSpec& spec, int mode_count,
                                    int fock_cutoff) {
    spec.validate();
    if (mode_count < 1 || mode_count > 4)
        throw DomainError("oracles: mode_count must be in [1, 4]");
    FewModeBath fm;
    fm.fock_cutoff = fock_cutoff;
    fm.temperature = spec.temperature;
    if (spec.alpha == 0.0) {
        // keep one decoupled mode so the state space stays well formed
        fm.frequencies.assign(static_cast<std::size_t>(mode_count), spec.omega_c);
        fm.couplings.assign(static_cast<std::size_t>(mode_count), 0.0);
        fm.validate();
        return fm;
    }

    // equal-weight split of int J(w) dw over (0, 4 wc]
    auto j_of = [&](double w) { return bath::spectral_density(spec, w); };
    const double w_hi = 4.0 * spec.omega_c;
    bool ok = true;
    const double total = num::adaptive_simpson(j_of, 0.0, w_hi, 1e-12, 40, &ok);
    if (!ok || !(total > 0.0))
        throw ConvergenceError("oracles: could not discretize the spectral density");
    const double share = total / mode_count;

    double lo = 0.0;
    for (int k = 0; k < mode_count; ++k) {
        double hi = w_hi;
        if (k + 1 < mode_count) {
            // bisect for the boundary holding one share of the weight
            double a = lo, b = w_hi;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double mass = num::adaptive_simpson(j_of, lo, mid, 1e-13, 40, &ok);
                if (mass < share) a = mid;
                else b = mid;
            }
            hi = 0.5 * (a + b);
        }
        const double mass = num::adaptive_simpson(j_of, lo, hi, 1e-13, 40, &ok);
        const double first_moment = num::adaptive_simpson(
            [&](double w) { return w * j_of(w); }, lo, hi, 1e-13, 40, &ok);
        const double w_k = first_moment / mass;  // weight centroid
        fm.frequencies.push_back(w_k);
        fm.couplings.push_back(std::sqrt(mass / M_PI));  // J_disc = pi sum lambda^2 delta
        lo = hi;
    }
    fm.validate();
    return fm;
}

void FewModeBath::validate() const {
    if (frequencies.empty() || frequencies.size() != couplings.size())
        throw DomainError("oracles: few-mode bath needs matching frequencies/couplings");
    if (frequencies.size() > 4) throw DomainError("oracles: at most 4 modes supported");
    if (fock_cutoff < 2 || fock_cutoff > 8)
        throw DomainError("oracles: fock_cutoff must be in [2, 8]");
    if (temperature < 0.0) throw DomainError("oracles: temperature must be >= 0");
    if (thermal_samples < 1) throw DomainError("oracles: thermal_samples must be >= 1");
    for (double w : frequencies)
        if (!(w > 0.0)) throw DomainError("oracles: mode frequencies must be > 0");
    double dim = 2.0;
    for (std::size_t k = 0; k < frequencies.size(); ++k) dim *= fock_cutoff;
    if (dim > 2.0 * 8.0 * 8.0 * 8.0 * 8.0)
        throw ResourceError("oracles: truncated dimension exceeds 2*8^4");
}

double FewModeBath::s_disc(double tau) const {
    tau = std::abs(tau);
    double sum = 0.0;
    for (std::size_t k = 0; k < frequencies.size(); ++k) {
        const double w = frequencies[k];
        const double g2 = couplings[k] * couplings[k] / (w * w);
        const double half = std::sin(0.5 * w * tau);
        double coth = 1.0;
        if (temperature > 0.0) {
            const double xarg = w / (2.0 * temperature);
            coth = (xarg >= 20.0) ? 1.0 : 1.0 + 2.0 / std::expm1(2.0 * xarg);
        }
        sum += g2 * 2.0 * half * half * coth;
    }
    return sum;
}

double FewModeBath::r_disc(double tau) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < frequencies.size(); ++k) {
        const double w = frequencies[k];
        const double g2 = couplings[k] * couplings[k] / (w * w);
        sum += g2 * std::sin(w * tau);
    }
    return sum;
}

namespace {

struct FockEnsemble {
    std::vector<std::vector<int>> configs;
    std::vector<double> weights;
};

// Thermal occupation ensemble: exact weighted enumeration for <= 2 modes,
// truncated-geometric Gibbs sampling otherwise.
FockEnsemble thermal_ensemble(const FewModeBath& fm) {
    const std::size_t modes = fm.frequencies.size();
    const int c = fm.fock_cutoff;
    FockEnsemble ens;

    if (fm.temperature == 0.0) {
        ens.configs.push_back(std::vector<int>(modes, 0));
        ens.weights.push_back(1.0);
        return ens;
    }

    std::vector<std::vector<double>> pmode(modes);
    for (std::size_t k = 0; k < modes; ++k) {
        const double x = std::exp(-fm.frequencies[k] / fm.temperature);
        double norm = 0.0;
        std::vector<double> p(static_cast<std::size_t>(c));
        double xn = 1.0;
        for (int nn = 0; nn < c; ++nn, xn *= x) {
            p[static_cast<std::size_t>(nn)] = xn;
            norm += xn;
        }
        for (double& v : p) v /= norm;
        pmode[k] = std::move(p);
    }

    if (modes <= 2) {
        std::vector<int> cfg(modes, 0);
        double kept = 0.0;
        for (;;) {
            double w = 1.0;
            for (std::size_t k = 0; k < modes; ++k)
                w *= pmode[k][static_cast<std::size_t>(cfg[k])];
            if (w >= 1e-12) {
                ens.configs.push_back(cfg);
                ens.weights.push_back(w);
                kept += w;
            }
            std::size_t k = 0;
            for (; k < modes; ++k) {
                if (++cfg[k] < c) break;
                cfg[k] = 0;
            }
            if (k == modes) break;
        }
        for (double& w : ens.weights) w /= kept;
        return ens;
    }

    const int samples = fm.thermal_samples;
    for (int sidx = 0; sidx < samples; ++sidx) {
        std::vector<int> cfg(modes, 0);
        for (std::size_t k = 0; k < modes; ++k) {
            const double u = num::uniform01(num::stream_key(
                fm.seed, 0x746865726du /* "therm" */, static_cast<std::uint64_t>(sidx),
                static_cast<std::uint64_t>(k)));
            double acc = 0.0;
            int pick = c - 1;
            for (int nn = 0; nn < c; ++nn) {
                acc += pmode[k][static_cast<std::size_t>(nn)];
                if (u < acc) {
                    pick = nn;
                    break;
                }
            }
            cfg[k] = pick;
        }
        ens.configs.push_back(std::move(cfg));
        ens.weights.push_back(1.0 / samples);
    }
    return ens;
}

std::vector<double> few_mode_run(const drive::SystemSpec& system, const FewModeBath& fm,
                                 const drive::DriveProtocol& drive_p,
                                 std::span<const double> t_grid, double ode_tol,
                                 int cutoff) {
    const std::size_t modes = fm.frequencies.size();
    std::size_t bath_dim = 1;
    for (std::size_t k = 0; k < modes; ++k) bath_dim *= static_cast<std::size_t>(cutoff);
    const std::size_t dim = 2 * bath_dim;

    // strides in the bath index; full index = bath * 2 + spin (spin 0 = R, 1 = L)
    std::vector<std::size_t> stride(modes, 1);
    for (std::size_t k = 1; k < modes; ++k)
        stride[k] = stride[k - 1] * static_cast<std::size_t>(cutoff);

    std::vector<double> bath_energy(bath_dim, 0.0);
    for (std::size_t b = 0; b < bath_dim; ++b) {
        double e = 0.0;
        for (std::size_t k = 0; k < modes; ++k)
            e += fm.frequencies[k] *
                 static_cast<double>((b / stride[k]) % static_cast<std::size_t>(cutoff));
        bath_energy[b] = e;
    }

    const double delta = system.delta;
    const double eps0 = system.epsilon0;
    auto rhs = [&](const State& psi, State& dpsi, double t) {
        const double eps_t = eps0 + drive_p.bias_at(t);
        const Complex mi(0.0, -1.0);
        for (std::size_t b = 0; b < bath_dim; ++b) {
            for (int spin = 0; spin < 2; ++spin) {
                const std::size_t idx = b * 2 + static_cast<std::size_t>(spin);
                const double sz = (spin == 0) ? 1.0 : -1.0;
                Complex h = (bath_energy[b] - 0.5 * eps_t * sz) * psi[idx];
                h += -0.5 * delta * psi[b * 2 + static_cast<std::size_t>(1 - spin)];
                for (std::size_t k = 0; k < modes; ++k) {
                    const int nk = static_cast<int>((b / stride[k]) %
                                                    static_cast<std::size_t>(cutoff));
                    const double g = 0.5 * sz * fm.couplings[k];
                    if (g == 0.0) continue;
                    if (nk > 0)
                        h += g * std::sqrt(static_cast<double>(nk)) *
                             psi[(b - stride[k]) * 2 + static_cast<std::size_t>(spin)];
                    if (nk + 1 < cutoff)
                        h += g * std::sqrt(static_cast<double>(nk + 1)) *
                             psi[(b + stride[k]) * 2 + static_cast<std::size_t>(spin)];
                }
                dpsi[idx] = mi * h;
            }
        }
    };

    const FockEnsemble ens = thermal_ensemble(FewModeBath{
        fm.frequencies, fm.couplings, cutoff, fm.temperature, fm.thermal_samples, fm.seed,
        fm.convergence_tol});

    std::vector<double> times(t_grid.begin(), t_grid.end());
    const bool starts_at_zero = times.front() == 0.0;
    if (!starts_at_zero) times.insert(times.begin(), 0.0);

    std::vector<double> p(t_grid.size(), 0.0);
    for (std::size_t cidx = 0; cidx < ens.configs.size(); ++cidx) {
        std::size_t b0 = 0;
        for (std::size_t k = 0; k < modes; ++k) {
            int occ = ens.configs[cidx][k];
            if (occ >= cutoff) occ = cutoff - 1;  // companion runs at smaller cutoffs
            b0 += static_cast<std::size_t>(occ) * stride[k];
        }
        State psi(dim, Complex(0.0, 0.0));
        psi[b0 * 2 + 1] = Complex(1.0, 0.0);  // |L> x |n>

        std::size_t out = 0;
        integrate_grid(rhs, psi, times, ode_tol, [&](const State& s, double t) {
            if (!starts_at_zero && t == 0.0) return;
            double pr = 0.0;
            for (std::size_t b = 0; b < bath_dim; ++b) pr += std::norm(s[b * 2]);
            p[out++] += ens.weights[cidx] * pr;
        });
    }
    return p;
}

}  // namespace

std::vector<double> few_mode_exact_probability(const drive::SystemSpec& system,
                                               const FewModeBath& bath_modes,
                                               const drive::DriveProtocol& drive_p,
                                               std::span<const double> t_grid,
                                               double ode_tol) {
    system.validate();
    bath_modes.validate();
    if (t_grid.empty()) throw DomainError("oracles: empty time grid");

    const int c = bath_modes.fock_cutoff;
    const int c_pair = (2 * c <= 8) ? 2 * c : c / 2;  // doubling partner
    const int c_hi = std::max(c, c_pair);
    const int c_lo = std::min(c, c_pair);

    const std::vector<double> p = few_mode_run(system, bath_modes, drive_p, t_grid, ode_tol, c);
    if (c_lo >= 2 && c_lo != c_hi) {
        const std::vector<double> p_lo =
            few_mode_run(system, bath_modes, drive_p, t_grid, ode_tol, c_lo);
        const std::vector<double> p_hi =
            (c_hi == c) ? p : few_mode_run(system, bath_modes, drive_p, t_grid, ode_tol, c_hi);
        double drift = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            drift = std::max(drift, std::abs(p_hi[i] - p_lo[i]));
        if (drift > bath_modes.convergence_tol)
            throw ConvergenceError(
                "oracles: few-mode truncation not converged (cutoffs " + std::to_string(c_lo) +
                " -> " + std::to_string(c_hi) + " drift " + std::to_string(drift) +
                " > tol " + std::to_string(bath_modes.convergence_tol) + ")");
    }
    return p;
}

// ---- TPM statistics ----------------------------------------------------------

namespace {

Eigen::Matrix2cd tls_hamiltonian(const drive::SystemSpec& system, double eps_d) {
    const double eps = system.epsilon0 + eps_d;
    Eigen::Matrix2cd h;
    h << Complex(-0.5 * eps, 0.0), Complex(-0.5 * system.delta, 0.0),
        Complex(-0.5 * system.delta, 0.0), Complex(0.5 * eps, 0.0);
    return h;
}

Eigen::Matrix2cd propagate_unitary(const drive::SystemSpec& system,
                                   const drive::DriveProtocol& drive_p, double tau) {
    State u = {Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0)};  // row-major
    if (tau > 0.0) {
        auto rhs = [&](const State& m, State& dm, double t) {
            const double eps_t = system.epsilon0 + drive_p.bias_at(t);
            const Complex mi(0.0, -1.0);
            // dU = -i H U with H = [[-e/2, -D/2], [-D/2, e/2]]
            const Complex a = Complex(-0.5 * eps_t, 0.0);
            const Complex b = Complex(-0.5 * system.delta, 0.0);
            dm[0] = mi * (a * m[0] + b * m[2]);
            dm[1] = mi * (a * m[1] + b * m[3]);
            dm[2] = mi * (b * m[0] - a * m[2]);
            dm[3] = mi * (b * m[1] - a * m[3]);
        };
        const double grid[2] = {0.0, tau};
        integrate_grid(rhs, u, grid, 1e-13, [](const State&, double) {});
    }
    Eigen::Matrix2cd m;
    m << u[0], u[1], u[2], u[3];
    return m;
}

}  // namespace

TpmDistribution tpm_work_distribution(const drive::SystemSpec& system,
                                      const drive::DriveProtocol& drive_p, double tau) {
    system.validate();
    if (tau < 0.0) throw DomainError("oracles: protocol duration must be >= 0");

    const Eigen::Matrix2cd h0 = tls_hamiltonian(system, drive_p.bias_at(0.0));
    const Eigen::Matrix2cd h1 = tls_hamiltonian(system, drive_p.bias_at(tau));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es0(h0), es1(h1);
    const Eigen::Matrix2cd u = propagate_unitary(system, drive_p, tau);

    // TPM: the first projective measurement dephases rho = |L><L| in the H(0) basis.
    std::vector<double> raw_w;
    std::vector<double> raw_p;
    for (int i = 0; i < 2; ++i) {
        const double pi_weight = std::norm(es0.eigenvectors().col(i)(1));  // |<i|L>|^2
        for (int f = 0; f < 2; ++f) {
            const Complex amp = es1.eigenvectors().col(f).adjoint() * u *
                                es0.eigenvectors().col(i);
            raw_w.push_back(es1.eigenvalues()(f) - es0.eigenvalues()(i));
            raw_p.push_back(pi_weight * std::norm(amp));
        }
    }

    // merge degenerate work values
    std::vector<std::size_t> idx(raw_w.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return raw_w[a] < raw_w[b]; });
    double scale = 1.0;
    for (double w : raw_w) scale = std::max(scale, std::abs(w));

    TpmDistribution dist;
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
        const double w = raw_w[idx[pos]];
        const double p = raw_p[idx[pos]];
        if (!dist.work.empty() && std::abs(w - dist.work.back()) <= 1e-9 * scale)
            dist.prob.back() += p;
        else {
            dist.work.push_back(w);
            dist.prob.push_back(p);
        }
    }
    double total = 0.0;
    for (double p : dist.prob) total += p;
    for (double& p : dist.prob) p /= total;  // unitarity drift <= ODE tolerance
    return dist;
}

std::complex<double> tpm_characteristic_function(const drive::SystemSpec& system,
                                                 const drive::DriveProtocol& drive_p,
                                                 double nu, double tau) {
    const TpmDistribution dist = tpm_work_distribution(system, drive_p, tau);
    Complex chi(0.0, 0.0);
    for (std::size_t i = 0; i < dist.work.size(); ++i)
        chi += dist.prob[i] * std::exp(Complex(0.0, nu * dist.work[i]));
    return chi;
}

std::vector<std::complex<double>> tpm_characteristic_curve(const drive::SystemSpec& system,
                                                           const drive::DriveProtocol& drive_p,
                                                           std::span<const double> nu_grid,
                                                           double tau) {
    const TpmDistribution dist = tpm_work_distribution(system, drive_p, tau);
    std::vector<Complex> out;
    out.reserve(nu_grid.size());
    for (double nu : nu_grid) {
        Complex chi(0.0, 0.0);
        for (std::size_t i = 0; i < dist.work.size(); ++i)
            chi += dist.prob[i] * std::exp(Complex(0.0, nu * dist.work[i]));
        out.push_back(chi);
    }
    return out;
}

double tpm_mean_work(const drive::SystemSpec& system, const drive::DriveProtocol& drive_p,
                     double tau) {
    const Eigen::Matrix2cd h0 = tls_hamiltonian(system, drive_p.bias_at(0.0));
    const Eigen::Matrix2cd h1 = tls_hamiltonian(system, drive_p.bias_at(tau));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es0(h0);
    const Eigen::Matrix2cd u = propagate_unitary(system, drive_p, tau);

    Eigen::Matrix2cd rho_bar = Eigen::Matrix2cd::Zero();
    for (int i = 0; i < 2; ++i) {
        const double w = std::norm(es0.eigenvectors().col(i)(1));
        rho_bar += w * es0.eigenvectors().col(i) * es0.eigenvectors().col(i).adjoint();
    }
    const Complex before = (h0 * rho_bar).trace();
    const Complex after = (h1 * u * rho_bar * u.adjoint()).trace();
    return after.real() - before.real();
}

std::vector<double> tpm_reconstruct_distribution(std::span<const double> nu_grid,
                                                 std::span<const std::complex<double>> chi,
                                                 std::span<const double> work_support) {
    if (nu_grid.size() != chi.size() || nu_grid.empty() || work_support.empty())
        throw DomainError("oracles: inconsistent reconstruction inputs");
    const std::size_t rows = 2 * nu_grid.size();
    const std::size_t cols = work_support.size();
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd b(rows);
    for (std::size_t k = 0; k < nu_grid.size(); ++k) {
        for (std::size_t m = 0; m < cols; ++m) {
            a(2 * k, m) = std::cos(nu_grid[k] * work_support[m]);
            a(2 * k + 1, m) = std::sin(nu_grid[k] * work_support[m]);
        }
        b(2 * k) = chi[k].real();
        b(2 * k + 1) = chi[k].imag();
    }
    const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
    return std::vector<double>(x.data(), x.data() + x.size());
}

// ---- independent correlator quadrature ---------------------------------------

namespace {

// All oracle-side evaluations keep the integrand in exponent-combined form so
// sub-ohmic tails do not overflow; the low leg uses a log substitution and the
// oscillatory leg is split at half periods, each piece handled by adaptive
// Simpson. This is deliberately a different construction from the bath module.

double coth_series(double x) {
    if (x >= 20.0) return 1.0;
    if (x < 1e-4) return 1.0 / x + x / 3.0 - x * x * x / 45.0;
    return 1.0 + 2.0 / std::expm1(2.0 * x);
}

double xcoth_smooth(double x) {
    if (x < 1e-4) return 1.0 + x * x / 3.0;
    if (x >= 20.0) return x;
    return x * (1.0 + 2.0 / std::expm1(2.0 * x));
}

double sinc_smooth(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

double half_square_smooth(double y) {  // 2 (1-cos y) / y^2
    const double h = 0.5 * y;
    if (std::abs(h) < 1e-8) return 1.0 - h * h / 3.0;
    const double s = std::sin(h) / h;
    return s * s;
}

struct LegSplit {
    double w_star = 0.0;
    double w_max = 0.0;
    double x_lo = 0.0;       // log-space lower limit for the low leg
    double tail_ratio = 0.0; // neglected relative mass below exp(x_lo)
};

// Adaptive Simpson seeded with unit-width panels; the integrands vary on the
// scale of one log unit, so a single whole-interval estimate can miss the
// interior mass entirely while panels cannot.
double panelled_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, bool* ok) {
    const int panels = std::max(8, static_cast<int>(std::ceil(b - a)));
    const double h = (b - a) / panels;
    const double panel_tol = abs_tol / panels;
    num::KahanSum acc;
    for (int i = 0; i < panels; ++i) {
        bool panel_ok = true;
        acc.add(num::adaptive_simpson(f, a + i * h, a + (i + 1) * h, panel_tol, 32, &panel_ok));
        if (!panel_ok) *ok = false;
    }
    return acc.value();
}

LegSplit make_split(const bath::BathSpec& spec, double tau, double s_eff) {
    LegSplit ls;
    ls.w_max = spec.omega_c * (50.0 + 10.0 * std::log1p(spec.temperature / spec.omega_c));
    ls.w_star = std::min(1.0 / tau, ls.w_max);
    const double decades = std::min(650.0, 37.0 * std::log(10.0) / s_eff);
    ls.x_lo = std::log(ls.w_star) - decades;
    ls.tail_ratio = std::exp(-s_eff * decades);
    return ls;
}

double oscillatory_leg(const std::function<double(double)>& f, double w_star, double w_max,
                       double tau, double abs_tol, bool* ok) {
    if (w_star >= w_max) return 0.0;
    const double step = M_PI / tau;
    const std::size_t count = static_cast<std::size_t>(std::ceil((w_max - w_star) / step));
    if (count > 2000000)
        throw ConvergenceError("oracles: oscillatory segment count too large (tau too big)");
    const double seg_tol = abs_tol / static_cast<double>(count);
    num::KahanSum acc;
    double lo = w_star;
    while (lo < w_max) {
        const double hi = std::min(lo + step, w_max);
        bool seg_ok = true;
        acc.add(num::adaptive_simpson(f, lo, hi, seg_tol, 24, &seg_ok));
        if (!seg_ok) *ok = false;
        lo = hi;
    }
    return acc.value();
}

}  // namespace

CorrelatorPair quadrature_correlators(const bath::BathSpec& spec, double tau,
                                      double rel_tol) {
    spec.validate();
    CorrelatorPair out;
    const double sign_r = (tau < 0.0) ? -1.0 : 1.0;
    tau = std::abs(tau);
    if (tau == 0.0 || spec.alpha == 0.0) return out;

    const double alpha = spec.alpha, s = spec.s, wc = spec.omega_c, T = spec.temperature;

    // ---- S ----
    {
        const double s_eff = (T > 0.0) ? s : s + 1.0;
        const LegSplit ls = make_split(spec, tau, s_eff);
        std::function<double(double)> low;  // integrand in x = ln w
        if (T > 0.0) {
            low = [=](double x) {
                const double w = std::exp(x);
                return 2.0 * alpha * tau * tau * T * std::exp(s * x) *
                       half_square_smooth(w * tau) * xcoth_smooth(w / (2.0 * T)) *
                       std::exp(-w / wc);
            };
        } else {
            low = [=](double x) {
                const double w = std::exp(x);
                return alpha * tau * tau * std::exp((s + 1.0) * x) *
                       half_square_smooth(w * tau) * std::exp(-w / wc);
            };
        }
        auto high = [=](double w) {
            const double h = std::sin(0.5 * w * tau);
            const double cothf = (T > 0.0) ? coth_series(w / (2.0 * T)) : 1.0;
            return 2.0 * alpha * std::pow(w, s - 2.0) * std::exp(-w / wc) * 2.0 * h * h * cothf;
        };

        bool ok = true;
        const double x_hi = std::log(ls.w_star);
        const double rough_low = panelled_simpson(low, ls.x_lo, x_hi, 1e-6, &ok);
        ok = true;
        double rough_high = 0.0;
        if (ls.w_star < ls.w_max)
            rough_high = oscillatory_leg(high, ls.w_star, ls.w_max, tau,
                                         1e-6 * std::max(1.0, std::abs(rough_low)), &ok);
        const double scale = std::abs(rough_low) + std::abs(rough_high);
        const double tol = std::max(0.25 * rel_tol * scale, 1e-300);
        if (ls.tail_ratio > rel_tol)
            throw ConvergenceError(
                "oracles: S quadrature cannot resolve the infrared tail for s = " +
                std::to_string(s) + " (neglected mass ratio " +
                std::to_string(ls.tail_ratio) + ")");

        ok = true;
        double value = panelled_simpson(low, ls.x_lo, x_hi, tol, &ok);
        value += oscillatory_leg(high, ls.w_star, ls.w_max, tau, tol, &ok);
        if (!ok || !std::isfinite(value))
            throw ConvergenceError("oracles: S quadrature failed to converge (s=" +
                                   std::to_string(s) + ", T=" + std::to_string(T) +
                                   ", tau=" + std::to_string(tau) + ")");
        out.s = value;
    }

    // ---- R ----
    {
        const LegSplit ls = make_split(spec, tau, s);
        auto low = [=](double x) {
            const double w = std::exp(x);
            return 2.0 * alpha * tau * std::exp(s * x) * sinc_smooth(w * tau) *
                   std::exp(-w / wc);
        };
        auto high = [=](double w) {
            return 2.0 * alpha * std::pow(w, s - 2.0) * std::exp(-w / wc) * std::sin(w * tau);
        };

        bool ok = true;
        const double x_hi = std::log(ls.w_star);
        const double rough_low = panelled_simpson(low, ls.x_lo, x_hi, 1e-6, &ok);
        ok = true;
        double rough_high = 0.0;
        if (ls.w_star < ls.w_max)
            rough_high = oscillatory_leg(high, ls.w_star, ls.w_max, tau,
                                         1e-6 * std::max(1.0, std::abs(rough_low)), &ok);
        const double scale = std::abs(rough_low) + std::abs(rough_high) + 1e-30;
        const double tol = std::max(0.25 * rel_tol * scale, 1e-300);
        if (ls.tail_ratio > rel_tol)
            throw ConvergenceError(
                "oracles: R quadrature cannot resolve the infrared tail for s = " +
                std::to_string(s));

        ok = true;
        double value = panelled_simpson(low, ls.x_lo, x_hi, tol, &ok);
        value += oscillatory_leg(high, ls.w_star, ls.w_max, tau, tol, &ok);
        if (!ok || !std::isfinite(value))
            throw ConvergenceError("oracles: R quadrature failed to converge (s=" +
                                   std::to_string(s) + ", tau=" + std::to_string(tau) + ")");
        out.r = sign_r * value;
    }

    return out;
}

}  // namespace blipsum::oracles
