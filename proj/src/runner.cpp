#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "blipsum/cli.hpp"
#include "blipsum/errors.hpp"
#include "blipsum/io.hpp"
#include "blipsum/numerics.hpp"
#include "blipsum/oracles.hpp"

namespace blipsum::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kUnitBanner =
    "# units: hbar = 1; energies/frequencies in Delta; times in 1/Delta; "
    "temperature is k_B T in hbar*Delta\n";

struct RunContext {
    const RunConfig* cfg;
    std::vector<fs::path> written;
    json summary;

    fs::path out_path(const std::string& what) const {
        return fs::path(cfg->output.directory) / (cfg->output.prefix + "_" + what);
    }

    void write(const fs::path& path, const std::string& content) {
        fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
        io::write_text_file(path.string(), content);
        written.push_back(path);
    }

    void cleanup() {
        for (const auto& p : written) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        written.clear();
    }
};

std::string series_csv(const engine::SeriesResult& res, int n_max) {
    std::ostringstream out;
    out << "t,p,stderr,trunc,imag_residual";
    for (int n = 1; n <= n_max; ++n) out << ",order_" << n;
    out << "\n";
    for (std::size_t i = 0; i < res.times.size(); ++i) {
        out << io::format_g17(res.times[i]) << ',' << io::format_g17(res.p_values[i]) << ','
            << io::format_g17(res.mc_stderr[i]) << ','
            << io::format_g17(res.truncation_estimate[i]) << ','
            << io::format_g17(res.imag_residual[i]);
        for (int n = 1; n <= n_max; ++n)
            out << ',' << io::format_g17(res.per_order[i][static_cast<std::size_t>(n - 1)]);
        out << "\n";
    }
    return out.str();
}

json series_summary(const engine::SeriesResult& res) {
    double max_p = 0.0, max_stderr = 0.0, max_trunc = 0.0, max_imag = 0.0, max_asm = 0.0;
    int warnings = 0;
    for (std::size_t i = 0; i < res.times.size(); ++i) {
        max_p = std::max(max_p, res.p_values[i]);
        max_stderr = std::max(max_stderr, res.mc_stderr[i]);
        max_trunc = std::max(max_trunc, res.truncation_estimate[i]);
        max_imag = std::max(max_imag, res.imag_residual[i]);
        max_asm = std::max(max_asm, res.assembly_deviation[i]);
        if (res.growth_warning[i] || res.range_warning[i]) ++warnings;
    }
    json j;
    j["max_p"] = max_p;
    j["max_mc_stderr"] = max_stderr;
    j["max_truncation"] = max_trunc;
    j["max_imag_residual"] = max_imag;
    j["max_assembly_deviation"] = max_asm;
    j["warning_count"] = warnings;
    return j;
}

bath::KernelTable build_table(const RunConfig& cfg) {
    return bath::KernelTable::build(cfg.bath, cfg.resolved_tau_max(), cfg.kernel.tolerance,
                                    cfg.kernel.max_nodes);
}

void run_kernels(RunContext& ctx, std::ostream& log) {
    const RunConfig& cfg = *ctx.cfg;
    const auto table = build_table(cfg);
    std::ostringstream out;
    out << "tau,S,R\n";
    for (std::size_t i = 0; i < table.size(); ++i)
        out << io::format_g17(table.grid()[i]) << ',' << io::format_g17(table.s_values()[i])
            << ',' << io::format_g17(table.r_values()[i]) << "\n";
    ctx.write(ctx.out_path("kernels.csv"), out.str());
    ctx.summary["nodes"] = table.size();
    ctx.summary["tau_max"] = table.tau_max();
    log << "kernels: nodes=" << table.size() << " tau_max=" << io::format_g17(table.tau_max());
}

void run_transition(RunContext& ctx, std::ostream& log, bool factorized) {
    const RunConfig& cfg = *ctx.cfg;
    const auto table = build_table(cfg);
    const engine::SeriesResult res =
        factorized
            ? engine::transition_probability_niba(cfg.system, table, cfg.drive, cfg.engine)
            : engine::transition_probability(cfg.system, table, cfg.drive, cfg.engine);
    ctx.write(ctx.out_path("series.csv"), series_csv(res, cfg.engine.n_max));
    ctx.summary.update(series_summary(res));

    double max_err = 0.0;
    for (std::size_t i = 0; i < res.times.size(); ++i)
        max_err = std::max(max_err, res.truncation_estimate[i] + 3.0 * res.mc_stderr[i]);

    // self-check against the analytic free-tunneling curve when applicable
    if (cfg.bath.alpha == 0.0 && cfg.system.epsilon0 == 0.0 && cfg.drive.is_zero()) {
        double dev = 0.0;
        for (std::size_t i = 0; i < res.times.size(); ++i) {
            const double s = std::sin(0.5 * cfg.system.delta * res.times[i]);
            dev = std::max(dev, std::abs(res.p_values[i] - s * s));
        }
        ctx.summary["free_reference_max_dev"] = dev;
        log << (factorized ? "niba" : "transition") << ": free-case max dev "
            << io::format_g17(dev) << "; ";
    }

    log << (factorized ? "niba" : "transition")
        << ": max_p=" << io::format_g17(ctx.summary["max_p"].get<double>())
        << " max_err=" << io::format_g17(max_err);
}

void run_oracle_compare(RunContext& ctx, std::ostream& log) {
    const RunConfig& cfg = *ctx.cfg;
    const auto table = build_table(cfg);
    const engine::SeriesResult res =
        engine::transition_probability(cfg.system, table, cfg.drive, cfg.engine);

    std::vector<double> oracle_p;
    std::string oracle_kind;
    if (cfg.bath.alpha == 0.0) {
        oracle_kind = "tls-ode";
        oracle_p = oracles::tls_ode_probability(cfg.system, cfg.drive, cfg.engine.target_times,
                                                cfg.oracle.ode_tol);
    } else {
        oracle_kind = "few-mode";
        auto fm = oracles::FewModeBath::discretize(cfg.bath, cfg.oracle.modes,
                                                   cfg.oracle.fock_cutoff);
        fm.thermal_samples = cfg.oracle.thermal_samples;
        fm.seed = cfg.engine.seed;
        fm.convergence_tol = cfg.oracle.convergence_tol;
        oracle_p = oracles::few_mode_exact_probability(cfg.system, fm, cfg.drive,
                                                       cfg.engine.target_times,
                                                       cfg.oracle.ode_tol);
    }

    std::ostringstream out;
    out << "t,p_series,p_oracle,abs_dev\n";
    double max_dev = 0.0;
    for (std::size_t i = 0; i < res.times.size(); ++i) {
        const double dev = std::abs(res.p_values[i] - oracle_p[i]);
        max_dev = std::max(max_dev, dev);
        out << io::format_g17(res.times[i]) << ',' << io::format_g17(res.p_values[i]) << ','
            << io::format_g17(oracle_p[i]) << ',' << io::format_g17(dev) << "\n";
    }
    ctx.write(ctx.out_path("series.csv"), series_csv(res, cfg.engine.n_max));
    ctx.write(ctx.out_path("oracle.csv"), out.str());
    ctx.summary.update(series_summary(res));
    ctx.summary["oracle"] = oracle_kind;
    ctx.summary["max_abs_deviation"] = max_dev;
    log << "oracle-compare[" << oracle_kind << "]: max_dev=" << io::format_g17(max_dev);
}

void run_work_stats(RunContext& ctx, std::ostream& log) {
    const RunConfig& cfg = *ctx.cfg;
    std::ostringstream out;
    out << "t,eps_d,g,w1_plus,w1_minus\n";
    for (double t : cfg.engine.target_times)
        out << io::format_g17(t) << ',' << io::format_g17(cfg.drive.bias_at(t)) << ','
            << io::format_g17(cfg.drive.g_integral(t)) << ','
            << io::format_g17(drive::w1_work(cfg.drive, +1, t)) << ','
            << io::format_g17(drive::w1_work(cfg.drive, -1, t)) << "\n";
    ctx.write(ctx.out_path("work.csv"), out.str());

    if (!cfg.work.trajectory_file.empty()) {
        drive::SpinTrajectory traj;
        traj.segments = io::load_trajectory_csv(cfg.work.trajectory_file);
        const drive::WorkSplit split = drive::classical_work_split(cfg.drive, traj);
        ctx.summary["w_quasistatic"] = split.quasistatic;
        ctx.summary["w_nonstationary"] = split.nonstationary;
        ctx.summary["w_classical"] = split.quasistatic + split.nonstationary;
        log << "work-stats: W_qs=" << io::format_g17(split.quasistatic)
            << " W_ns=" << io::format_g17(split.nonstationary);
    } else {
        log << "work-stats: curve over " << cfg.engine.target_times.size() << " times";
    }
}

void run_tpm(RunContext& ctx, std::ostream& log) {
    const RunConfig& cfg = *ctx.cfg;
    const double tau = cfg.work.tau;
    if (cfg.drive.kind() == drive::Kind::Table && cfg.drive.max_time() < tau)
        throw ConfigError("drive table ends before work.tau");

    std::vector<double> nu = num::linspace0(cfg.work.nu_max, cfg.work.nu_points);
    const auto chi = oracles::tpm_characteristic_curve(cfg.system, cfg.drive, nu, tau);
    const auto dist = oracles::tpm_work_distribution(cfg.system, cfg.drive, tau);

    std::ostringstream out;
    out << "nu,re_chi,im_chi\n";
    for (std::size_t i = 0; i < nu.size(); ++i)
        out << io::format_g17(nu[i]) << ',' << io::format_g17(chi[i].real()) << ','
            << io::format_g17(chi[i].imag()) << "\n";
    ctx.write(ctx.out_path("tpm.csv"), out.str());

    std::ostringstream dout;
    dout << "work,prob\n";
    double mean_dist = 0.0;
    for (std::size_t i = 0; i < dist.work.size(); ++i) {
        dout << io::format_g17(dist.work[i]) << ',' << io::format_g17(dist.prob[i]) << "\n";
        mean_dist += dist.work[i] * dist.prob[i];
    }
    ctx.write(ctx.out_path("tpm_dist.csv"), dout.str());

    const double mean_trace = oracles::tpm_mean_work(cfg.system, cfg.drive, tau);
    ctx.summary["chi_at_zero_re"] = chi.front().real();
    ctx.summary["chi_at_zero_im"] = chi.front().imag();
    ctx.summary["mean_work_distribution"] = mean_dist;
    ctx.summary["mean_work_trace"] = mean_trace;
    ctx.summary["work_support_size"] = dist.work.size();
    log << "tpm: <W>=" << io::format_g17(mean_dist)
        << " chi(0)=" << io::format_g17(chi.front().real());
}

}  // namespace

int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& log) {
    RunContext ctx;
    ctx.cfg = &cfg;
    const auto t0 = std::chrono::steady_clock::now();

    log << kUnitBanner;
    log << dump_config(cfg) << "\n";

    try {
        std::ostringstream line;
        if (subcommand == "kernels") run_kernels(ctx, line);
        else if (subcommand == "transition") run_transition(ctx, line, false);
        else if (subcommand == "niba") {
            if (!cfg.engine.niba)
                throw ConfigError("the niba subcommand requires engine.niba = true "
                                  "(with zero_lambda and nearest_sojourn_only)");
            run_transition(ctx, line, true);
        } else if (subcommand == "oracle-compare") run_oracle_compare(ctx, line);
        else if (subcommand == "work-stats") run_work_stats(ctx, line);
        else if (subcommand == "tpm") run_tpm(ctx, line);
        else throw ConfigError("unknown subcommand '" + subcommand +
                               "' (expected kernels|transition|niba|oracle-compare|"
                               "work-stats|tpm)");

        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        ctx.summary["subcommand"] = subcommand;
        ctx.summary["wall_ms"] = wall_ms;
        ctx.write(ctx.out_path("summary.json"), ctx.summary.dump(2) + "\n");
        log << line.str() << " wall=" << io::format_g17(wall_ms * 1e-3) << "s\n";
        return 0;
    } catch (const ConfigError& e) {
        ctx.cleanup();
        log << "error: category=config message=" << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        ctx.cleanup();
        log << "error: category=config message=" << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        ctx.cleanup();
        log << "error: category=convergence message=" << e.what() << "\n";
        return 3;
    } catch (const ResourceError& e) {
        ctx.cleanup();
        log << "error: category=resource message=" << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        ctx.cleanup();
        log << "error: category=internal message=" << e.what() << "\n";
        return 1;
    }
}

}  // namespace blipsum::cli
