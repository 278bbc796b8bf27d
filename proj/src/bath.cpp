#include "blipsum/bath.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blipsum/errors.hpp"
#include "blipsum/numerics.hpp"

namespace blipsum::bath {

namespace {

// coth(x) = 1 + 2/(e^{2x}-1), stable via expm1; series below x = 1e-4.
double coth_stable(double x) {
    if (x >= 20.0) return 1.0;
    if (x < 1e-4) return 1.0 / x + x / 3.0 - x * x * x / 45.0;
    return 1.0 + 2.0 / std::expm1(2.0 * x);
}

// c(x) = x coth(x), smooth, c(0) = 1.
double xcoth(double x) {
    if (x < 1e-4) return 1.0 + x * x / 3.0;
    if (x >= 20.0) return x;
    return x * (1.0 + 2.0 / std::expm1(2.0 * x));
}

// q(y) = 2 (1 - cos y) / y^2 = sinc(y/2)^2, smooth, q(0) = 1.
double one_minus_cos_over_half_square(double y) {
    const double h = 0.5 * y;
    if (std::abs(h) < 1e-8) return 1.0 - h * h / 3.0;
    const double s = std::sin(h) / h;
    return s * s;
}

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

struct AdaptState {
    double tol = 0.0;
    int max_depth = 26;
    bool ok = true;
};

double adapt_gl(const std::function<double(double)>& f, double a, double b, double tol,
                int depth, AdaptState& st) {
    const auto& rule = num::gauss_legendre_01(15);
    auto gl = [&](double lo, double hi) {
        num::KahanSum acc;
        const double h = hi - lo;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc.add(rule.weights[i] * f(lo + h * rule.nodes[i]));
        return h * acc.value();
    };
    const double whole = gl(a, b);
    const double m = 0.5 * (a + b);
    const double split = gl(a, m) + gl(m, b);
    if (std::abs(split - whole) <= tol) return split;
    if (depth <= 0) {
        st.ok = false;
        return split;
    }
    return adapt_gl(f, a, m, 0.5 * tol, depth - 1, st) +
           adapt_gl(f, m, b, 0.5 * tol, depth - 1, st);
}

// Integration limits shared by the S and R quadratures.
double omega_max_for(const BathSpec& spec) {
    return spec.omega_c * (50.0 + 10.0 * std::log1p(spec.temperature / spec.omega_c));
}

constexpr std::size_t kMaxOscillationSegments = 2000000;

// S(tau) for tau > 0, alpha > 0, by segmented quadrature:
//  - [0, min(1/tau, wmax)]: graded substitution w = w* u^gamma removing the
//    w^{s-1} (finite T) or w^s (T = 0) endpoint behaviour,
//  - [1/tau, wmax]: half-period segments of the oscillatory factor.
double s_quadrature(const BathSpec& spec, double tau) {
    const double alpha = spec.alpha, s = spec.s, wc = spec.omega_c, T = spec.temperature;
    const double wmax = omega_max_for(spec);
    const double wstar = std::min(1.0 / tau, wmax);
    const double gamma = std::max(1.0, 2.0 / s);

    std::function<double(double)> leg_a;
    if (T > 0.0) {
        const double pref = 2.0 * alpha * tau * tau * T * gamma * std::pow(wstar, s);
        leg_a = [=](double u) {
            if (u <= 0.0) return 0.0;
            const double w = wstar * std::pow(u, gamma);
            return pref * std::pow(u, gamma * s - 1.0) *
                   one_minus_cos_over_half_square(w * tau) * xcoth(w / (2.0 * T)) *
                   std::exp(-w / wc);
        };
    } else {
        const double pref = alpha * tau * tau * gamma * std::pow(wstar, s + 1.0);
        leg_a = [=](double u) {
            if (u <= 0.0) return 0.0;
            const double w = wstar * std::pow(u, gamma);
            return pref * std::pow(u, gamma * (s + 1.0) - 1.0) *
                   one_minus_cos_over_half_square(w * tau) * std::exp(-w / wc);
        };
    }

    auto direct = [=](double w) {
        const double h = std::sin(0.5 * w * tau);
        const double osc = 2.0 * h * h;  // 1 - cos(w tau)
        const double cothf = (T > 0.0) ? coth_stable(w / (2.0 * T)) : 1.0;
        return 2.0 * alpha * std::pow(w, s - 2.0) * std::exp(-w / wc) * osc * cothf;
    };

    AdaptState st;
    const double rough_a = adapt_gl(leg_a, 0.0, 1.0, 1e-6, 8, st);
    double rough_b = 0.0;
    std::vector<std::pair<double, double>> segments;
    if (wstar < wmax) {
        const double step = M_PI / tau;
        const std::size_t count = static_cast<std::size_t>(std::ceil((wmax - wstar) / step));
        if (count > kMaxOscillationSegments)
            throw ConvergenceError("bath: oscillatory segment count " + std::to_string(count) +
                                   " exceeds limit (tau too large)");
        double lo = wstar;
        while (lo < wmax) {
            const double hi = std::min(lo + step, wmax);
            segments.emplace_back(lo, hi);
            lo = hi;
        }
        const auto& rule = num::gauss_legendre_01(15);
        num::KahanSum acc;
        for (const auto& [lo2, hi2] : segments) {
            double seg = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                seg += rule.weights[i] * direct(lo2 + (hi2 - lo2) * rule.nodes[i]);
            acc.add(seg * (hi2 - lo2));
        }
        rough_b = acc.value();
    }

    const double scale = std::abs(rough_a) + std::abs(rough_b);
    const double tol = std::max(1e-10 * scale, 1e-300);

    st = AdaptState{};
    num::KahanSum total;
    total.add(adapt_gl(leg_a, 0.0, 1.0, 0.5 * tol, st.max_depth, st));
    if (!segments.empty()) {
        const double seg_tol = 0.5 * tol / static_cast<double>(segments.size());
        for (const auto& [lo, hi] : segments)
            total.add(adapt_gl(direct, lo, hi, seg_tol, 12, st));
    }
    if (!st.ok)
        throw ConvergenceError("bath: S(tau) quadrature did not reach tolerance (s=" +
                               std::to_string(spec.s) + ", T=" + std::to_string(T) +
                               ", tau=" + std::to_string(tau) + ")");
    const double value = total.value();
    if (!std::isfinite(value))
        throw ConvergenceError("bath: S(tau) quadrature produced a non-finite value");
    return value;
}

// R(tau) for tau > 0, alpha > 0; same segmentation, temperature never enters.
double r_quadrature(const BathSpec& spec, double tau) {
    const double alpha = spec.alpha, s = spec.s, wc = spec.omega_c;
    const double wmax = omega_max_for(spec);
    const double wstar = std::min(1.0 / tau, wmax);
    const double gamma = std::max(1.0, 2.0 / s);

    const double pref = 2.0 * alpha * tau * gamma * std::pow(wstar, s);
    auto leg_a = [=](double u) {
        if (u <= 0.0) return 0.0;
        const double w = wstar * std::pow(u, gamma);
        return pref * std::pow(u, gamma * s - 1.0) * sinc(w * tau) * std::exp(-w / wc);
    };
    auto direct = [=](double w) {
        return 2.0 * alpha * std::pow(w, s - 2.0) * std::exp(-w / wc) * std::sin(w * tau);
    };

    AdaptState st;
    const double rough_a = adapt_gl(leg_a, 0.0, 1.0, 1e-6, 8, st);

    std::vector<std::pair<double, double>> segments;
    double rough_b = 0.0;
    if (wstar < wmax) {
        const double step = M_PI / tau;
        const std::size_t count = static_cast<std::size_t>(std::ceil((wmax - wstar) / step));
        if (count > kMaxOscillationSegments)
            throw ConvergenceError("bath: oscillatory segment count " + std::to_string(count) +
                                   " exceeds limit (tau too large)");
        double lo = wstar;
        const auto& rule = num::gauss_legendre_01(15);
        num::KahanSum acc;
        while (lo < wmax) {
            const double hi = std::min(lo + step, wmax);
            segments.emplace_back(lo, hi);
            double seg = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                seg += rule.weights[i] * direct(lo + (hi - lo) * rule.nodes[i]);
            acc.add(seg * (hi - lo));
            lo = hi;
        }
        rough_b = acc.value();
    }

    const double scale = std::abs(rough_a) + std::abs(rough_b) + 1e-30;
    const double tol = std::max(1e-10 * scale, 1e-300);

    st = AdaptState{};
    num::KahanSum total;
    total.add(adapt_gl(leg_a, 0.0, 1.0, 0.5 * tol, st.max_depth, st));
    if (!segments.empty()) {
        const double seg_tol = 0.5 * tol / static_cast<double>(segments.size());
        for (const auto& [lo, hi] : segments)
            total.add(adapt_gl(direct, lo, hi, seg_tol, 12, st));
    }
    if (!st.ok)
        throw ConvergenceError("bath: R(tau) quadrature did not reach tolerance (s=" +
                               std::to_string(spec.s) + ", tau=" + std::to_string(tau) + ")");
    const double value = total.value();
    if (!std::isfinite(value))
        throw ConvergenceError("bath: R(tau) quadrature produced a non-finite value");
    return value;
}

}  // namespace

void BathSpec::validate() const {
    if (!(alpha >= 0.0)) throw DomainError("bath: alpha must be >= 0");
    if (!(omega_c > 0.0)) throw DomainError("bath: omega_c must be > 0");
    if (!(temperature >= 0.0)) throw DomainError("bath: temperature must be >= 0");
    if (!(s > 0.0) || s > 2.0) throw DomainError("bath: spectral exponent s must be in (0, 2]");
}

double spectral_density(const BathSpec& spec, double omega) {
    spec.validate();
    if (omega < 0.0) throw DomainError("bath: spectral_density requires omega >= 0");
    if (omega == 0.0) return 0.0;  // s > 0
    return 2.0 * M_PI * spec.alpha * std::pow(omega, spec.s) * std::exp(-omega / spec.omega_c);
}

double correlator_s(const BathSpec& spec, double tau) {
    spec.validate();
    tau = std::abs(tau);  // even extension
    if (tau == 0.0 || spec.alpha == 0.0) return 0.0;
    if (spec.s == 1.0 && spec.temperature == 0.0) {
        const double x = spec.omega_c * tau;
        return spec.alpha * std::log1p(x * x);  // 2 alpha ln sqrt(1+x^2)
    }
    return s_quadrature(spec, tau);
}

double correlator_r(const BathSpec& spec, double tau) {
    spec.validate();
    const double sign = (tau < 0.0) ? -1.0 : 1.0;  // odd extension
    tau = std::abs(tau);
    if (tau == 0.0 || spec.alpha == 0.0) return 0.0;
    if (spec.s == 1.0) return sign * 2.0 * spec.alpha * std::atan(spec.omega_c * tau);
    return sign * r_quadrature(spec, tau);
}

KernelTable KernelTable::zero(double tau_max) {
    if (!(tau_max > 0.0)) throw DomainError("bath: tau_max must be > 0");
    KernelTable table;
    table.tau_ = {0.0, tau_max};
    table.s_ = {0.0, 0.0};
    table.r_ = {0.0, 0.0};
    table.zero_ = true;
    return table;
}

KernelTable KernelTable::build_impl(const std::function<double(double)>& s_fn,
                                    const std::function<double(double)>& r_fn,
                                    double tau_max, double tolerance,
                                    std::size_t max_nodes, bool zero) {
    if (!(tau_max > 0.0)) throw DomainError("bath: tau_max must be > 0");
    if (!(tolerance > 0.0)) throw DomainError("bath: tolerance must be > 0");
    if (zero) return KernelTable::zero(tau_max);

    KernelTable table;
    const std::size_t n0 = 65;
    table.tau_.resize(n0);
    for (std::size_t i = 0; i < n0; ++i)
        table.tau_[i] = tau_max * static_cast<double>(i) / static_cast<double>(n0 - 1);
    auto eval_at = [&](double tau, double& s_out, double& r_out) {
        s_out = (tau == 0.0) ? 0.0 : s_fn(tau);
        r_out = (tau == 0.0) ? 0.0 : r_fn(tau);
    };
    table.s_.resize(n0);
    table.r_.resize(n0);
    for (std::size_t i = 0; i < n0; ++i) eval_at(table.tau_[i], table.s_[i], table.r_[i]);

    for (int pass = 0; pass < 48; ++pass) {
        std::vector<double> new_tau;
        std::vector<double> new_s;
        std::vector<double> new_r;
        for (std::size_t i = 0; i + 1 < table.tau_.size(); ++i) {
            const double m = 0.5 * (table.tau_[i] + table.tau_[i + 1]);
            if (m <= table.tau_[i] || m >= table.tau_[i + 1]) continue;  // grid exhausted
            double sm, rm;
            eval_at(m, sm, rm);
            const double is = num::interp_cubic(table.tau_, table.s_, m);
            const double ir = num::interp_cubic(table.tau_, table.r_, m);
            if (std::abs(is - sm) > tolerance || std::abs(ir - rm) > tolerance) {
                new_tau.push_back(m);
                new_s.push_back(sm);
                new_r.push_back(rm);
            }
        }
        if (new_tau.empty()) break;
        if (table.tau_.size() + new_tau.size() > max_nodes)
            throw ResourceError("bath: kernel table would exceed " + std::to_string(max_nodes) +
                                " nodes before reaching tolerance " + std::to_string(tolerance));
        std::vector<double> merged_tau, merged_s, merged_r;
        merged_tau.reserve(table.tau_.size() + new_tau.size());
        merged_s.reserve(merged_tau.capacity());
        merged_r.reserve(merged_tau.capacity());
        std::size_t a = 0, b = 0;
        while (a < table.tau_.size() || b < new_tau.size()) {
            const bool take_old =
                b >= new_tau.size() || (a < table.tau_.size() && table.tau_[a] < new_tau[b]);
            if (take_old) {
                merged_tau.push_back(table.tau_[a]);
                merged_s.push_back(table.s_[a]);
                merged_r.push_back(table.r_[a]);
                ++a;
            } else {
                merged_tau.push_back(new_tau[b]);
                merged_s.push_back(new_s[b]);
                merged_r.push_back(new_r[b]);
                ++b;
            }
        }
        table.tau_ = std::move(merged_tau);
        table.s_ = std::move(merged_s);
        table.r_ = std::move(merged_r);
    }

    for (double& v : table.s_) {
        if (v < 0.0 && v > -1e-12) v = 0.0;  // quadrature noise
        if (v < 0.0) throw ConvergenceError("bath: negative S(tau) sample in kernel table");
    }
    return table;
}

KernelTable KernelTable::build(const BathSpec& spec, double tau_max, double tolerance,
                               std::size_t max_nodes) {
    spec.validate();
    return build_impl([&spec](double tau) { return correlator_s(spec, tau); },
                      [&spec](double tau) { return correlator_r(spec, tau); }, tau_max,
                      tolerance, max_nodes, spec.alpha == 0.0);
}

double KernelTable::s_at(double tau) const {
    if (zero_) return 0.0;
    if (tau < 0.0) {
        if (tau < -1e-12) throw DomainError("bath: kernel table query at negative tau");
        tau = 0.0;
    }
    if (tau > tau_.back()) {
        if (tau > tau_.back() * (1.0 + 1e-12))
            throw DomainError("bath: kernel table query beyond tau_max");
        tau = tau_.back();
    }
    return num::interp_cubic(tau_, s_, tau);
}

double KernelTable::r_at(double tau) const {
    if (zero_) return 0.0;
    if (tau < 0.0) {
        if (tau < -1e-12) throw DomainError("bath: kernel table query at negative tau");
        tau = 0.0;
    }
    if (tau > tau_.back()) {
        if (tau > tau_.back() * (1.0 + 1e-12))
            throw DomainError("bath: kernel table query beyond tau_max");
        tau = tau_.back();
    }
    return num::interp_cubic(tau_, r_, tau);
}

}  // namespace blipsum::bath
