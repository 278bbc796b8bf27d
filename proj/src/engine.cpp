#include "blipsum/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blipsum/errors.hpp"
#include "blipsum/numerics.hpp"

namespace blipsum::engine {

namespace {

constexpr int kMaxOrder = 8;
constexpr int kMaxDims = 2 * kMaxOrder;

double order_prefactor(const drive::SystemSpec& system, int n) {
    const double base = 0.25 * system.delta * system.delta;
    double p = 1.0;
    for (int i = 0; i < n; ++i) p *= base;
    return (n % 2 == 0) ? -p : p;  // -(-Delta^2/4)^n
}

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

// Kernel data of one ordered time configuration, shared by both assemblies.
struct NodeData {
    int n = 0;
    double tau[kMaxOrder];                 // blip lengths t_{2j} - t_{2j-1}
    double dg[kMaxOrder];                  // g(t_{2j}) - g(t_{2j-1})
    double sdiag[kMaxOrder];               // S(tau_j)
    double sdiag_sum = 0.0;
    double lam[kMaxOrder][kMaxOrder];      // [j-1][k-1], 1 <= k < j
    double x[kMaxOrder][kMaxOrder];        // [j-1][k], 0 <= k < j
    bool has_lambda = false;
};

void precompute_node(const bath::KernelTable& table, const drive::DriveProtocol& drive_p,
                     std::span<const double> times, bool zero_lambda,
                     bool nearest_sojourn_only, NodeData& d) {
    const int n = static_cast<int>(times.size()) / 2;
    d.n = n;
    auto tp = [&](int i) { return i == 0 ? 0.0 : times[static_cast<std::size_t>(i - 1)]; };

    for (int j = 1; j <= n; ++j) {
        const double t1 = tp(2 * j - 1);
        const double t2 = tp(2 * j);
        d.tau[j - 1] = t2 - t1;
        d.dg[j - 1] = drive_p.g_between(t1, t2);
    }

    const bool zero = table.zero_coupling();
    d.sdiag_sum = 0.0;
    for (int j = 1; j <= n; ++j) {
        d.sdiag[j - 1] = zero ? 0.0 : table.s_at(d.tau[j - 1]);
        d.sdiag_sum += d.sdiag[j - 1];
    }

    d.has_lambda = !zero && !zero_lambda && n >= 2;
    if (d.has_lambda) {
        // difference pairing cancels exactly for zero-length blips
        for (int j = 2; j <= n; ++j)
            for (int k = 1; k < j; ++k)
                d.lam[j - 1][k - 1] =
                    (table.s_at(tp(2 * j) - tp(2 * k - 1)) -
                     table.s_at(tp(2 * j - 1) - tp(2 * k - 1))) +
                    (table.s_at(tp(2 * j - 1) - tp(2 * k)) - table.s_at(tp(2 * j) - tp(2 * k)));
    }

    for (int j = 1; j <= n; ++j)
        for (int k = 0; k < j; ++k) {
            if (zero || (nearest_sojourn_only && k != j - 1)) {
                d.x[j - 1][k] = 0.0;
                continue;
            }
            d.x[j - 1][k] =
                (table.r_at(tp(2 * j) - tp(2 * k + 1)) - table.r_at(tp(2 * j) - tp(2 * k))) +
                (table.r_at(tp(2 * j - 1) - tp(2 * k)) -
                 table.r_at(tp(2 * j - 1) - tp(2 * k + 1)));
        }
}

// Exact (xi, eta) sum for one configuration. The eta sum is closed-form:
// with Y_k = sum_{j>k} xi_j X_{j,k}, the restricted sum gives
// e^{-i Y_0} prod_{k>=1} 2 cos(Y_k).
NodeValue eval_node(const NodeData& d, double eps0, Assembly assembly) {
    const int n = d.n;
    NodeValue out;
    double xi[kMaxOrder];
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        for (int j = 0; j < n; ++j) xi[j] = (mask >> j) & 1u ? 1.0 : -1.0;

        double phi;
        if (assembly == Assembly::Phase) {
            phi = 0.0;
            for (int j = 0; j < n; ++j) phi += xi[j] * (eps0 * d.tau[j] + d.dg[j]);
        } else {
            double bias = 0.0;
            double work_integral = 0.0;  // sum_j int W_ns,j (hbar = 1)
            for (int j = 0; j < n; ++j) {
                bias += xi[j] * (eps0 * d.tau[j]);
                work_integral += -xi[j] * d.dg[j];
            }
            phi = bias - work_integral;
        }

        double lam_sum = 0.0;
        if (d.has_lambda)
            for (int j = 1; j < n; ++j)
                for (int k = 0; k < j; ++k) lam_sum += xi[j] * xi[k] * d.lam[j][k];
        const double q = std::exp(-(d.sdiag_sum + lam_sum));

        double y0 = 0.0;
        for (int j = 1; j <= n; ++j) y0 += xi[j - 1] * d.x[j - 1][0];
        double cos_prod = 1.0;
        for (int k = 1; k < n; ++k) {
            double yk = 0.0;
            for (int j = k + 1; j <= n; ++j) yk += xi[j - 1] * d.x[j - 1][k];
            cos_prod *= 2.0 * std::cos(yk);
        }

        const double mag = q * cos_prod;
        const double angle = phi - y0;
        out.re += mag * std::cos(angle);
        out.im += mag * std::sin(angle);
        out.envelope += std::abs(mag);
    }
    return out;
}

// Factorized per-blip product; exact when Lambda = 0 and only nearest-sojourn
// couplings survive.
NodeValue eval_node_niba(const NodeData& d, double eps0, Assembly assembly) {
    const int n = d.n;
    NodeValue out{1.0, 0.0, 1.0};
    for (int j = 1; j <= n; ++j) {
        double phi_j;
        if (assembly == Assembly::Phase) {
            phi_j = eps0 * d.tau[j - 1] + d.dg[j - 1];
        } else {
            const double bias = eps0 * d.tau[j - 1];
            const double work_integral = -d.dg[j - 1];
            phi_j = bias - work_integral;
        }
        const double damp = std::exp(-d.sdiag[j - 1]);
        double factor, bound;
        if (j == 1) {
            factor = damp * 2.0 * std::cos(phi_j - d.x[0][0]);
            bound = damp * 2.0;
        } else {
            // nearest sojourn of blip j is k = j-1
            const double cx = 2.0 * std::cos(d.x[j - 1][j - 1]);
            factor = damp * 2.0 * std::cos(phi_j) * cx;
            bound = damp * 2.0 * std::abs(cx);
        }
        out.re *= factor;
        out.envelope *= bound;
    }
    return out;
}

struct BlockAccum {
    num::KahanSum re;
    num::KahanSum im;
    num::KahanSum re_sq;
    double max_imag_rel = 0.0;
    double max_assembly_dev = 0.0;
    std::int64_t count = 0;
};

struct NodeContext {
    const drive::SystemSpec* system;
    const bath::KernelTable* table;
    const drive::DriveProtocol* drive_p;
    bool zero_lambda;
    bool nearest_sojourn_only;
    bool use_niba;
    Assembly assembly;
    bool cross_check;
};

void accumulate_node(const NodeContext& ctx, std::span<const double> times, double weight,
                     BlockAccum& acc) {
    NodeData d;
    precompute_node(*ctx.table, *ctx.drive_p, times, ctx.zero_lambda,
                    ctx.nearest_sojourn_only, d);
    const double eps0 = ctx.system->epsilon0;
    const NodeValue v = ctx.use_niba ? eval_node_niba(d, eps0, ctx.assembly)
                                     : eval_node(d, eps0, ctx.assembly);
    if (ctx.cross_check) {
        const Assembly other =
            ctx.assembly == Assembly::Phase ? Assembly::Work : Assembly::Phase;
        const NodeValue w2 =
            ctx.use_niba ? eval_node_niba(d, eps0, other) : eval_node(d, eps0, other);
        const double dev = (std::abs(v.re - w2.re) + std::abs(v.im - w2.im)) /
                           std::max(1.0, v.envelope);
        acc.max_assembly_dev = std::max(acc.max_assembly_dev, dev);
    }
    acc.re.add(weight * v.re);
    acc.im.add(weight * v.im);
    acc.re_sq.add(v.re * v.re);  // only meaningful for MC (weight = 1)
    acc.max_imag_rel =
        std::max(acc.max_imag_rel, std::abs(v.im) / std::max(1.0, v.envelope));
    acc.count += 1;
}

OrderTerm integrate_deterministic(const NodeContext& ctx, int n, double t,
                                  const EngineConfig& cfg) {
    const int m = 2 * n;
    const int points = cfg.det_points_per_dim;
    const double total_nodes = std::pow(static_cast<double>(points), m);
    if (total_nodes > static_cast<double>(cfg.eval_budget))
        throw ResourceError("engine: deterministic quadrature at order " + std::to_string(n) +
                            " needs " + std::to_string(total_nodes) +
                            " nodes, over the evaluation budget; use Monte Carlo");
    const auto& rule = num::gauss_legendre_01(points);

    std::vector<BlockAccum> blocks(static_cast<std::size_t>(points));
    num::parallel_blocks(points, cfg.threads, [&](std::int64_t b) {
        BlockAccum acc;
        std::vector<int> idx(static_cast<std::size_t>(m - 1), 0);
        double v[kMaxDims], tt[kMaxDims];
        v[m - 1] = rule.nodes[static_cast<std::size_t>(b)];
        const double w_outer = rule.weights[static_cast<std::size_t>(b)];
        const std::int64_t inner = static_cast<std::int64_t>(
            std::llround(std::pow(static_cast<double>(points), m - 1)));
        for (std::int64_t it = 0; it < inner; ++it) {
            double weight = w_outer;
            for (int i = 0; i < m - 1; ++i) {
                v[i] = rule.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
                weight *= rule.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
            }
            // nested product map with Jacobian t * prod_{k>=1} t_k
            tt[m - 1] = t * v[m - 1];
            for (int k = m - 2; k >= 0; --k) tt[k] = tt[k + 1] * v[k];
            double jac = t;
            for (int k = 1; k < m; ++k) jac *= tt[k];
            accumulate_node(ctx, std::span<const double>(tt, static_cast<std::size_t>(m)),
                            weight * jac, acc);
            // odometer
            for (int i = 0; i < m - 1; ++i) {
                if (++idx[static_cast<std::size_t>(i)] < points) break;
                idx[static_cast<std::size_t>(i)] = 0;
            }
        }
        blocks[static_cast<std::size_t>(b)] = acc;
    });

    OrderTerm term;
    num::KahanSum re, im;
    for (const auto& acc : blocks) {
        re.add(acc.re.value());
        im.add(acc.im.value());
        term.max_node_imag_rel = std::max(term.max_node_imag_rel, acc.max_imag_rel);
        term.max_assembly_dev = std::max(term.max_assembly_dev, acc.max_assembly_dev);
        term.evaluations += acc.count;
    }
    const double pref = order_prefactor(*ctx.system, n);
    term.value = pref * re.value();
    term.imag_integral = pref * im.value();
    term.monte_carlo = false;
    return term;
}

OrderTerm integrate_monte_carlo(const NodeContext& ctx, int n, double t,
                                const EngineConfig& cfg, std::int64_t time_index) {
    const int m = 2 * n;
    const std::int64_t samples = cfg.mc_samples;
    if (samples > cfg.eval_budget)
        throw ResourceError("engine: mc_samples exceeds the evaluation budget");
    const std::int64_t block = std::max<std::int64_t>(1, cfg.mc_block);
    const std::int64_t n_blocks = (samples + block - 1) / block;

    std::vector<BlockAccum> blocks(static_cast<std::size_t>(n_blocks));
    num::parallel_blocks(n_blocks, cfg.threads, [&](std::int64_t b) {
        BlockAccum acc;
        double tt[kMaxDims];
        const std::int64_t lo = b * block;
        const std::int64_t hi = std::min(samples, lo + block);
        for (std::int64_t sample = lo; sample < hi; ++sample) {
            for (int i = 0; i < m; ++i) {
                const std::uint64_t key = num::stream_key(
                    cfg.seed, static_cast<std::uint64_t>(n),
                    static_cast<std::uint64_t>(time_index),
                    static_cast<std::uint64_t>(sample), static_cast<std::uint64_t>(i + 1));
                tt[i] = t * num::uniform01(key);
            }
            std::sort(tt, tt + m);
            accumulate_node(ctx, std::span<const double>(tt, static_cast<std::size_t>(m)), 1.0,
                            acc);
        }
        blocks[static_cast<std::size_t>(b)] = acc;
    });

    OrderTerm term;
    num::KahanSum re, im, re_sq;
    std::int64_t count = 0;
    for (const auto& acc : blocks) {
        re.add(acc.re.value());
        im.add(acc.im.value());
        re_sq.add(acc.re_sq.value());
        term.max_node_imag_rel = std::max(term.max_node_imag_rel, acc.max_imag_rel);
        term.max_assembly_dev = std::max(term.max_assembly_dev, acc.max_assembly_dev);
        count += acc.count;
    }
    const double pref = order_prefactor(*ctx.system, n);
    const double volume = std::pow(t, m) / factorial(m);
    const double mean = re.value() / static_cast<double>(count);
    term.value = pref * volume * mean;
    term.imag_integral = pref * volume * (im.value() / static_cast<double>(count));
    if (count > 1) {
        double variance =
            (re_sq.value() - re.value() * re.value() / static_cast<double>(count)) /
            static_cast<double>(count - 1);
        variance = std::max(0.0, variance);
        term.std_error = std::abs(pref * volume) *
                         std::sqrt(variance / static_cast<double>(count));
    }
    term.evaluations = count;
    term.monte_carlo = true;
    return term;
}

bool order_uses_monte_carlo(const EngineConfig& cfg, int n) {
    switch (cfg.quadrature) {
        case Quadrature::Deterministic: return false;
        case Quadrature::MonteCarlo: return true;
        case Quadrature::Hybrid: return n > cfg.det_max_order;
    }
    return true;
}

OrderTerm integrate_order(const drive::SystemSpec& system, const bath::KernelTable& table,
                          const drive::DriveProtocol& drive_p, int n, double t,
                          const EngineConfig& cfg, std::int64_t time_index, bool use_niba) {
    NodeContext ctx{&system, &table, &drive_p,
                    cfg.zero_lambda, cfg.nearest_sojourn_only, use_niba,
                    cfg.assembly, cfg.cross_check_assembly};
    if (use_niba) {
        ctx.zero_lambda = true;
        ctx.nearest_sojourn_only = true;
    }
    OrderTerm term = order_uses_monte_carlo(cfg, n)
                         ? integrate_monte_carlo(ctx, n, t, cfg, time_index)
                         : integrate_deterministic(ctx, n, t, cfg);
    if (term.max_node_imag_rel > 1e-6)
        throw ConvergenceError(
            "engine: imaginary residual after the sign sum is far above rounding "
            "(order " + std::to_string(n) + ", residual " +
            std::to_string(term.max_node_imag_rel) + ")");
    return term;
}

SeriesResult run_series(const drive::SystemSpec& system, const bath::KernelTable& table,
                        const drive::DriveProtocol& drive_p, const EngineConfig& cfg,
                        bool use_niba) {
    cfg.validate();
    system.validate();
    if (cfg.target_times.empty()) throw DomainError("engine: empty output time grid");
    if (cfg.target_times.back() > table.tau_max() * (1.0 + 1e-12))
        throw DomainError("engine: output grid extends beyond the kernel table range");
    if (use_niba && !cfg.niba)
        throw DomainError("engine: factorized evaluation requires cfg.niba = true");

    const std::size_t nt = cfg.target_times.size();
    SeriesResult res;
    res.times = cfg.target_times;
    res.p_values.assign(nt, 0.0);
    res.per_order.assign(nt, std::vector<double>(static_cast<std::size_t>(cfg.n_max), 0.0));
    res.mc_stderr.assign(nt, 0.0);
    res.truncation_estimate.assign(nt, 0.0);
    res.imag_residual.assign(nt, 0.0);
    res.max_node_imag_rel.assign(nt, 0.0);
    res.assembly_deviation.assign(nt, 0.0);
    res.growth_warning.assign(nt, 0);
    res.range_warning.assign(nt, 0);

    for (std::size_t ti = 0; ti < nt; ++ti) {
        const double t = cfg.target_times[ti];
        if (t == 0.0) continue;  // empty integration domain

        num::KahanSum imag_acc;
        double stderr_sq = 0.0;
        double prev_mag = 0.0;
        bool have_prev = false;
        std::vector<double>& orders = res.per_order[ti];

        for (int n = 1; n <= cfg.n_max; ++n) {
            const OrderTerm term = integrate_order(system, table, drive_p, n, t, cfg,
                                                   static_cast<std::int64_t>(ti), use_niba);
            orders[static_cast<std::size_t>(n - 1)] = term.value;
            imag_acc.add(term.imag_integral);
            stderr_sq += term.std_error * term.std_error;
            res.max_node_imag_rel[ti] =
                std::max(res.max_node_imag_rel[ti], term.max_node_imag_rel);
            res.assembly_deviation[ti] =
                std::max(res.assembly_deviation[ti], term.max_assembly_dev);
            res.truncation_estimate[ti] = std::abs(term.value);
            if (have_prev && std::abs(term.value) > prev_mag) res.growth_warning[ti] = 1;
            else if (have_prev) res.growth_warning[ti] = 0;  // heuristic: last pair decides
            prev_mag = std::abs(term.value);
            have_prev = true;

            if (cfg.series_tol > 0.0) {
                const double partial = series_sum(orders);
                if (std::abs(term.value) < cfg.series_tol * std::abs(partial)) break;
            }
        }

        res.p_values[ti] = series_sum(orders);
        res.mc_stderr[ti] = std::sqrt(stderr_sq);
        res.imag_residual[ti] = std::abs(imag_acc.value());

        const double delta = res.truncation_estimate[ti] + 3.0 * res.mc_stderr[ti];
        if (res.p_values[ti] < -delta || res.p_values[ti] > 1.0 + delta)
            res.range_warning[ti] = 1;
        if (res.growth_warning[ti] || res.range_warning[ti]) res.any_warning = true;
    }
    return res;
}

}  // namespace

void EngineConfig::validate() const {
    if (n_max < 1 || n_max > kMaxOrder)
        throw DomainError("engine: n_max must be in [1, " + std::to_string(kMaxOrder) + "]");
    if (mc_samples < 1) throw DomainError("engine: mc_samples must be >= 1");
    if (det_points_per_dim < 2 || det_points_per_dim > 64)
        throw DomainError("engine: det_points_per_dim must be in [2, 64]");
    if (det_max_order < 0 || det_max_order > kMaxOrder)
        throw DomainError("engine: det_max_order must be in [0, 8]");
    if (series_tol < 0.0) throw DomainError("engine: series_tol must be >= 0");
    if (eval_budget < 1) throw DomainError("engine: eval_budget must be >= 1");
    if (mc_block < 1) throw DomainError("engine: mc_block must be >= 1");
    if (threads < 0) throw DomainError("engine: threads must be >= 0");
    for (std::size_t i = 0; i < target_times.size(); ++i) {
        if (target_times[i] < 0.0) throw DomainError("engine: output times must be >= 0");
        if (i > 0 && !(target_times[i] > target_times[i - 1]))
            throw DomainError("engine: output time grid must be strictly increasing");
    }
    if (niba && !(zero_lambda && nearest_sojourn_only))
        throw DomainError("engine: niba requires zero_lambda and nearest_sojourn_only");
}

double series_sum(std::span<const double> per_order_terms) {
    return num::kahan_total(per_order_terms);
}

NodeValue order_integrand(const drive::SystemSpec& system, const bath::KernelTable& table,
                          const drive::DriveProtocol& drive_p, std::span<const double> times,
                          bool zero_lambda, bool nearest_sojourn_only, Assembly assembly) {
    if (times.empty() || times.size() % 2 != 0 ||
        times.size() > static_cast<std::size_t>(kMaxDims))
        throw DomainError("engine: integrand needs 2n times with n in [1, 8]");
    NodeData d;
    precompute_node(table, drive_p, times, zero_lambda, nearest_sojourn_only, d);
    return eval_node(d, system.epsilon0, assembly);
}

NodeValue niba_integrand(const drive::SystemSpec& system, const bath::KernelTable& table,
                         const drive::DriveProtocol& drive_p, std::span<const double> times,
                         Assembly assembly) {
    if (times.empty() || times.size() % 2 != 0 ||
        times.size() > static_cast<std::size_t>(kMaxDims))
        throw DomainError("engine: integrand needs 2n times with n in [1, 8]");
    NodeData d;
    precompute_node(table, drive_p, times, true, true, d);
    return eval_node_niba(d, system.epsilon0, assembly);
}

OrderTerm order_n_term(const drive::SystemSpec& system, const bath::KernelTable& table,
                       const drive::DriveProtocol& drive_p, int n, double t,
                       const EngineConfig& cfg) {
    cfg.validate();
    system.validate();
    if (n < 1 || n > cfg.n_max) throw DomainError("engine: order must satisfy 1 <= n <= n_max");
    if (t < 0.0) throw DomainError("engine: t must be >= 0");
    if (t == 0.0) return OrderTerm{};
    if (t > table.tau_max() * (1.0 + 1e-12))
        throw DomainError("engine: t beyond the kernel table range");
    return integrate_order(system, table, drive_p, n, t, cfg, 0, false);
}

SeriesResult transition_probability(const drive::SystemSpec& system,
                                    const bath::KernelTable& table,
                                    const drive::DriveProtocol& drive_p,
                                    const EngineConfig& cfg) {
    return run_series(system, table, drive_p, cfg, false);
}

SeriesResult transition_probability_niba(const drive::SystemSpec& system,
                                         const bath::KernelTable& table,
                                         const drive::DriveProtocol& drive_p,
                                         const EngineConfig& cfg) {
    return run_series(system, table, drive_p, cfg, true);
}

WorkFormAverage work_form_average(const drive::SystemSpec& system,
                                  const bath::KernelTable& table,
                                  const drive::DriveProtocol& drive_p,
                                  std::span<const kernels::BlipPath> batch) {
    WorkFormAverage out;
    num::KahanSum re, im;
    for (const auto& path : batch) {
        const double q = kernels::q_amplitude(table, path);
        const double h = kernels::h_phase(table, path);
        double bias = 0.0;
        double work_integral = 0.0;
        for (int j = 1; j <= path.n; ++j) {
            const double t1 = path.time_point(2 * j - 1);
            const double t2 = path.time_point(2 * j);
            const int xi = path.xi[static_cast<std::size_t>(j - 1)];
            bias += static_cast<double>(xi) * system.epsilon0 * (t2 - t1);
            work_integral += drive::ns_work_window(drive_p, xi, t1, t2);
        }
        const double phase = bias + h - work_integral;
        re.add(q * std::cos(phase));
        im.add(q * std::sin(phase));
    }
    out.real = re.value();
    out.imag = im.value();
    return out;
}

std::vector<kernels::BlipPath> enumerate_sign_configs(int n, std::span<const double> times,
                                                      double total_time) {
    if (n < 1 || n > kMaxOrder) throw DomainError("engine: n must be in [1, 8]");
    if (times.size() != static_cast<std::size_t>(2 * n))
        throw DomainError("engine: expected 2n times");
    std::vector<kernels::BlipPath> batch;
    batch.reserve((1u << n) * (1u << (n - 1)));
    const std::vector<double> times_v(times.begin(), times.end());
    for (std::uint32_t xi_mask = 0; xi_mask < (1u << n); ++xi_mask) {
        std::vector<int> xi(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) xi[static_cast<std::size_t>(j)] = (xi_mask >> j) & 1u ? 1 : -1;
        for (std::uint32_t eta_mask = 0; eta_mask < (1u << (n - 1)); ++eta_mask) {
            std::vector<int> eta(static_cast<std::size_t>(n));
            eta[0] = -1;
            for (int k = 1; k < n; ++k)
                eta[static_cast<std::size_t>(k)] = (eta_mask >> (k - 1)) & 1u ? 1 : -1;
            batch.push_back(kernels::BlipPath::make(total_time, times_v, xi, eta));
        }
    }
    return batch;
}

}  // namespace blipsum::engine
