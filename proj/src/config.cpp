#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>

#include "blipsum/cli.hpp"
#include "blipsum/errors.hpp"
#include "blipsum/io.hpp"
#include "blipsum/numerics.hpp"

namespace blipsum::cli {

namespace {

struct RawEntry {
    std::string value;
    int line = 0;  // 0 = command-line override
    mutable bool used = false;
};

using RawMap = std::map<std::pair<std::string, std::string>, RawEntry>;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const RawEntry& entry, const std::string& what) {
    const std::string where =
        entry.line > 0 ? "line " + std::to_string(entry.line) : "override";
    throw ConfigError(where + ": " + what + " (value '" + entry.value + "')");
}

class Reader {
  public:
    explicit Reader(RawMap entries) : entries_(std::move(entries)) {}

    bool has(const std::string& sec, const std::string& key) const {
        return entries_.count({sec, key}) > 0;
    }

    std::string get_string(const std::string& sec, const std::string& key,
                           const std::string& fallback) const {
        const auto it = entries_.find({sec, key});
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        return it->second.value;
    }

    double get_double(const std::string& sec, const std::string& key, double fallback) const {
        const auto it = entries_.find({sec, key});
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        const char* begin = it->second.value.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin || *end != '\0')
            fail(it->second, "expected a number for " + sec + "." + key);
        return v;
    }

    long long get_int(const std::string& sec, const std::string& key, long long fallback) const {
        const auto it = entries_.find({sec, key});
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        const char* begin = it->second.value.c_str();
        char* end = nullptr;
        const long long v = std::strtoll(begin, &end, 10);
        if (end == begin || *end != '\0')
            fail(it->second, "expected an integer for " + sec + "." + key);
        return v;
    }

    std::uint64_t get_uint64(const std::string& sec, const std::string& key,
                             std::uint64_t fallback) const {
        const auto it = entries_.find({sec, key});
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        const char* begin = it->second.value.c_str();
        char* end = nullptr;
        const unsigned long long v = std::strtoull(begin, &end, 10);
        if (end == begin || *end != '\0')
            fail(it->second, "expected an unsigned integer for " + sec + "." + key);
        return v;
    }

    bool get_bool(const std::string& sec, const std::string& key, bool fallback) const {
        const auto it = entries_.find({sec, key});
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        if (it->second.value == "true") return true;
        if (it->second.value == "false") return false;
        fail(it->second, "expected true/false for " + sec + "." + key);
    }

    std::vector<double> get_double_list(const std::string& sec, const std::string& key) const {
        const auto it = entries_.find({sec, key});
        if (it == entries_.end()) return {};
        it->second.used = true;
        std::vector<double> out;
        std::istringstream ss(it->second.value);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            const char* begin = tok.c_str();
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin || *end != '\0')
                fail(it->second, "bad list entry '" + tok + "' in " + sec + "." + key);
            out.push_back(v);
        }
        return out;
    }

    // "t:v; t:v; ..." knot list
    std::pair<std::vector<double>, std::vector<double>> get_knots(const std::string& sec,
                                                                  const std::string& key) const {
        const auto it = entries_.find({sec, key});
        if (it == entries_.end()) return {};
        it->second.used = true;
        std::vector<double> t, v;
        std::istringstream ss(it->second.value);
        std::string tok;
        while (std::getline(ss, tok, ';')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                fail(it->second, "knot entries must be t:value in " + sec + "." + key);
            const std::string ts = trim(tok.substr(0, colon));
            const std::string vs = trim(tok.substr(colon + 1));
            char* end = nullptr;
            const double tv = std::strtod(ts.c_str(), &end);
            if (end == ts.c_str() || *end != '\0') fail(it->second, "bad knot time '" + ts + "'");
            const double vv = std::strtod(vs.c_str(), &end);
            if (end == vs.c_str() || *end != '\0')
                fail(it->second, "bad knot value '" + vs + "'");
            t.push_back(tv);
            v.push_back(vv);
        }
        return {std::move(t), std::move(v)};
    }

    void check_all_used() const {
        for (const auto& [key, entry] : entries_) {
            if (!entry.used) {
                const std::string where =
                    entry.line > 0 ? "line " + std::to_string(entry.line) : "override";
                throw ConfigError(where + ": unknown key '" + key.second + "' in [" +
                                  key.first + "]");
            }
        }
    }

  private:
    RawMap entries_;
};

RawMap tokenize(const std::string& text,
                const std::vector<std::pair<std::string, std::string>>& overrides) {
    static const std::vector<std::string> kSections = {
        "system", "bath", "drive", "engine", "kernel", "oracle", "work", "output"};
    RawMap entries;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (std::find(kSections.begin(), kSections.end(), section) == kSections.end())
                throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" +
                                  section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        entries[{section, key}] = RawEntry{value, line_no};
    }
    for (const auto& [skey, value] : overrides) {
        const auto dot = skey.find('.');
        if (dot == std::string::npos)
            throw ConfigError("override '" + skey + "' must be section.key");
        const std::string sec = skey.substr(0, dot);
        if (std::find(kSections.begin(), kSections.end(), sec) == kSections.end())
            throw ConfigError("override: unknown section [" + sec + "]");
        entries[{sec, skey.substr(dot + 1)}] = RawEntry{trim(value), 0};
    }
    return entries;
}

drive::DriveProtocol build_drive(const Reader& r) {
    const std::string kind = r.get_string("drive", "kind", "none");
    const double amplitude = r.get_double("drive", "amplitude", 0.0);
    const double frequency = r.get_double("drive", "frequency", 1.0);
    const double phase = r.get_double("drive", "phase", 0.0);
    const double t_on = r.get_double("drive", "t_on", 0.0);
    const double t_off = r.get_double("drive", "t_off", 0.0);
    const std::string file = r.get_string("drive", "file", "");
    const auto knots = r.get_knots("drive", "knots");

    try {
        if (kind == "none") return drive::DriveProtocol::none();
        if (kind == "constant") return drive::DriveProtocol::constant_after_zero(amplitude);
        if (kind == "pulse")
            return drive::DriveProtocol::rectangular_pulse(amplitude, t_on, t_off);
        if (kind == "sinusoidal")
            return drive::DriveProtocol::sinusoidal(amplitude, frequency, phase);
        if (kind == "table") {
            if (!knots.first.empty())
                return drive::DriveProtocol::piecewise_linear(knots.first, knots.second);
            if (!file.empty()) {
                auto cols = io::load_two_column_csv(file);
                return drive::DriveProtocol::piecewise_linear(std::move(cols.first),
                                                              std::move(cols.second));
            }
            throw ConfigError("drive.kind = table requires drive.knots or drive.file");
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("drive: ") + e.what());
    }
    throw ConfigError("drive.kind must be none|constant|pulse|sinusoidal|table (got '" + kind +
                      "')");
}

}  // namespace

double RunConfig::resolved_tau_max() const {
    if (!kernel.tau_auto) return kernel.tau_max;
    const double t_back = engine.target_times.empty() ? 0.0 : engine.target_times.back();
    return std::max(t_back, 1e-3);
}

RunConfig parse_config(const std::string& text,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
    Reader r(tokenize(text, overrides));
    RunConfig cfg;

    cfg.system.delta = r.get_double("system", "delta", 1.0);
    cfg.system.epsilon0 = r.get_double("system", "epsilon0", 0.0);

    cfg.bath.alpha = r.get_double("bath", "alpha", 0.0);
    cfg.bath.s = r.get_double("bath", "s", 1.0);
    cfg.bath.omega_c = r.get_double("bath", "omega_c", 10.0);
    cfg.bath.temperature = r.get_double("bath", "temperature", 0.0);

    cfg.drive = build_drive(r);

    auto& eng = cfg.engine;
    eng.n_max = static_cast<int>(r.get_int("engine", "n_max", 4));
    const std::string quad = r.get_string("engine", "quadrature", "hybrid");
    if (quad == "deterministic-simplex") eng.quadrature = engine::Quadrature::Deterministic;
    else if (quad == "monte-carlo") eng.quadrature = engine::Quadrature::MonteCarlo;
    else if (quad == "hybrid") eng.quadrature = engine::Quadrature::Hybrid;
    else throw ConfigError("engine.quadrature must be deterministic-simplex|monte-carlo|hybrid");
    eng.det_max_order = static_cast<int>(r.get_int("engine", "det_max_order", 2));
    eng.det_points_per_dim = static_cast<int>(r.get_int("engine", "det_points_per_dim", 16));
    eng.mc_samples = r.get_int("engine", "mc_samples", 100000);
    eng.mc_block = r.get_int("engine", "mc_block", 8192);
    eng.seed = r.get_uint64("engine", "seed", 1);
    eng.niba = r.get_bool("engine", "niba", false);
    eng.zero_lambda = r.get_bool("engine", "zero_lambda", false);
    eng.nearest_sojourn_only = r.get_bool("engine", "nearest_sojourn_only", false);
    const std::string assembly = r.get_string("engine", "assembly", "phase");
    if (assembly == "phase") eng.assembly = engine::Assembly::Phase;
    else if (assembly == "work") eng.assembly = engine::Assembly::Work;
    else throw ConfigError("engine.assembly must be phase|work");
    eng.cross_check_assembly = r.get_bool("engine", "cross_check_assembly", false);
    eng.series_tol = r.get_double("engine", "series_tol", 0.0);
    eng.eval_budget = r.get_int("engine", "eval_budget", 400000000);
    eng.threads = static_cast<int>(r.get_int("engine", "threads", 0));

    eng.target_times = r.get_double_list("engine", "times");
    const double time_max = r.get_double("engine", "time_max", 2.0);
    const long long time_points = r.get_int("engine", "time_points", 21);
    if (eng.target_times.empty()) {
        if (time_points < 1 || time_points > 100000)
            throw ConfigError("engine.time_points must be in [1, 100000]");
        if (!(time_max >= 0.0)) throw ConfigError("engine.time_max must be >= 0");
        eng.target_times = num::linspace0(time_max, static_cast<int>(time_points));
    }

    const std::string tau_max_raw = r.get_string("kernel", "tau_max", "auto");
    if (tau_max_raw == "auto") {
        cfg.kernel.tau_auto = true;
        cfg.kernel.tau_max = 0.0;
    } else {
        cfg.kernel.tau_auto = false;
        char* end = nullptr;
        cfg.kernel.tau_max = std::strtod(tau_max_raw.c_str(), &end);
        if (end == tau_max_raw.c_str() || *end != '\0')
            throw ConfigError("kernel.tau_max must be 'auto' or a number");
    }
    cfg.kernel.tolerance = r.get_double("kernel", "tolerance", 1e-8);
    cfg.kernel.max_nodes = static_cast<std::size_t>(r.get_int("kernel", "max_nodes", 60000));

    cfg.oracle.modes = static_cast<int>(r.get_int("oracle", "modes", 1));
    cfg.oracle.fock_cutoff = static_cast<int>(r.get_int("oracle", "fock_cutoff", 6));
    cfg.oracle.thermal_samples = static_cast<int>(r.get_int("oracle", "thermal_samples", 64));
    cfg.oracle.convergence_tol = r.get_double("oracle", "convergence_tol", 1e-4);
    cfg.oracle.ode_tol = r.get_double("oracle", "ode_tol", 1e-12);

    cfg.work.tau = r.get_double("work", "tau", 1.0);
    cfg.work.nu_max = r.get_double("work", "nu_max", 5.0);
    cfg.work.nu_points = static_cast<int>(r.get_int("work", "nu_points", 101));
    cfg.work.trajectory_file = r.get_string("work", "trajectory", "");

    cfg.output.directory = r.get_string("output", "directory", ".");
    cfg.output.prefix = r.get_string("output", "prefix", "run");

    r.check_all_used();

    // validation, config-level errors
    try {
        cfg.system.validate();
        cfg.bath.validate();
        cfg.engine.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (!(cfg.kernel.tolerance > 0.0)) throw ConfigError("kernel.tolerance must be > 0");
    if (cfg.kernel.max_nodes < 16) throw ConfigError("kernel.max_nodes must be >= 16");
    if (!cfg.kernel.tau_auto && !(cfg.kernel.tau_max > 0.0))
        throw ConfigError("kernel.tau_max must be > 0");
    const double t_back = cfg.engine.target_times.back();
    if (!cfg.kernel.tau_auto && cfg.kernel.tau_max < t_back)
        throw ConfigError("output grid extends beyond the kernel table (kernel.tau_max = " +
                          io::format_g17(cfg.kernel.tau_max) + " < max time " +
                          io::format_g17(t_back) + ")");
    if (cfg.drive.kind() == drive::Kind::Table && cfg.drive.max_time() < t_back)
        throw ConfigError("drive table ends before the last output time");
    if (cfg.oracle.modes < 1 || cfg.oracle.modes > 4)
        throw ConfigError("oracle.modes must be in [1, 4]");
    if (cfg.oracle.fock_cutoff < 2 || cfg.oracle.fock_cutoff > 8)
        throw ConfigError("oracle.fock_cutoff must be in [2, 8]");
    if (cfg.oracle.thermal_samples < 1) throw ConfigError("oracle.thermal_samples must be >= 1");
    if (!(cfg.oracle.ode_tol > 0.0) || !(cfg.oracle.convergence_tol > 0.0))
        throw ConfigError("oracle tolerances must be > 0");
    if (!(cfg.work.tau >= 0.0)) throw ConfigError("work.tau must be >= 0");
    if (!(cfg.work.nu_max > 0.0)) throw ConfigError("work.nu_max must be > 0");
    if (cfg.work.nu_points < 2 || cfg.work.nu_points > 100000)
        throw ConfigError("work.nu_points must be in [2, 100000]");
    if (cfg.output.prefix.empty()) throw ConfigError("output.prefix must not be empty");

    return cfg;
}

RunConfig parse_config_file(const std::string& path,
                            const std::vector<std::pair<std::string, std::string>>& overrides) {
    return parse_config(io::read_text_file(path), overrides);
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream out;
    auto g = io::format_g17;

    out << "[system]\n";
    out << "delta = " << g(cfg.system.delta) << "\n";
    out << "epsilon0 = " << g(cfg.system.epsilon0) << "\n\n";

    out << "[bath]\n";
    out << "alpha = " << g(cfg.bath.alpha) << "\n";
    out << "s = " << g(cfg.bath.s) << "\n";
    out << "omega_c = " << g(cfg.bath.omega_c) << "\n";
    out << "temperature = " << g(cfg.bath.temperature) << "\n\n";

    out << "[drive]\n";
    switch (cfg.drive.kind()) {
        case drive::Kind::ConstantAfterZero:
            if (cfg.drive.is_zero()) {
                out << "kind = none\n";
            } else {
                out << "kind = constant\n";
                out << "amplitude = " << g(cfg.drive.amplitude()) << "\n";
            }
            break;
        case drive::Kind::RectangularPulse:
            out << "kind = pulse\n";
            out << "amplitude = " << g(cfg.drive.amplitude()) << "\n";
            out << "t_on = " << g(cfg.drive.t_on()) << "\n";
            out << "t_off = " << g(cfg.drive.t_off()) << "\n";
            break;
        case drive::Kind::Sinusoidal:
            out << "kind = sinusoidal\n";
            out << "amplitude = " << g(cfg.drive.amplitude()) << "\n";
            out << "frequency = " << g(cfg.drive.frequency()) << "\n";
            out << "phase = " << g(cfg.drive.phase()) << "\n";
            break;
        case drive::Kind::Table: {
            out << "kind = table\n";
            out << "knots = ";
            const auto& kt = cfg.drive.knot_times();
            const auto& kv = cfg.drive.knot_values();
            for (std::size_t i = 0; i < kt.size(); ++i) {
                if (i) out << "; ";
                out << g(kt[i]) << ":" << g(kv[i]);
            }
            out << "\n";
            break;
        }
    }
    out << "\n[engine]\n";
    out << "n_max = " << cfg.engine.n_max << "\n";
    out << "quadrature = "
        << (cfg.engine.quadrature == engine::Quadrature::Deterministic ? "deterministic-simplex"
            : cfg.engine.quadrature == engine::Quadrature::MonteCarlo ? "monte-carlo"
                                                                      : "hybrid")
        << "\n";
    out << "det_max_order = " << cfg.engine.det_max_order << "\n";
    out << "det_points_per_dim = " << cfg.engine.det_points_per_dim << "\n";
    out << "mc_samples = " << cfg.engine.mc_samples << "\n";
    out << "mc_block = " << cfg.engine.mc_block << "\n";
    out << "seed = " << cfg.engine.seed << "\n";
    out << "times = ";
    for (std::size_t i = 0; i < cfg.engine.target_times.size(); ++i) {
        if (i) out << ",";
        out << g(cfg.engine.target_times[i]);
    }
    out << "\n";
    out << "niba = " << (cfg.engine.niba ? "true" : "false") << "\n";
    out << "zero_lambda = " << (cfg.engine.zero_lambda ? "true" : "false") << "\n";
    out << "nearest_sojourn_only = " << (cfg.engine.nearest_sojourn_only ? "true" : "false")
        << "\n";
    out << "assembly = " << (cfg.engine.assembly == engine::Assembly::Phase ? "phase" : "work")
        << "\n";
    out << "cross_check_assembly = " << (cfg.engine.cross_check_assembly ? "true" : "false")
        << "\n";
    out << "series_tol = " << g(cfg.engine.series_tol) << "\n";
    out << "eval_budget = " << cfg.engine.eval_budget << "\n";
    out << "threads = " << cfg.engine.threads << "\n";

    out << "\n[kernel]\n";
    out << "tau_max = " << (cfg.kernel.tau_auto ? std::string("auto") : g(cfg.kernel.tau_max))
        << "\n";
    out << "tolerance = " << g(cfg.kernel.tolerance) << "\n";
    out << "max_nodes = " << cfg.kernel.max_nodes << "\n";

    out << "\n[oracle]\n";
    out << "modes = " << cfg.oracle.modes << "\n";
    out << "fock_cutoff = " << cfg.oracle.fock_cutoff << "\n";
    out << "thermal_samples = " << cfg.oracle.thermal_samples << "\n";
    out << "convergence_tol = " << g(cfg.oracle.convergence_tol) << "\n";
    out << "ode_tol = " << g(cfg.oracle.ode_tol) << "\n";

    out << "\n[work]\n";
    out << "tau = " << g(cfg.work.tau) << "\n";
    out << "nu_max = " << g(cfg.work.nu_max) << "\n";
    out << "nu_points = " << cfg.work.nu_points << "\n";
    if (!cfg.work.trajectory_file.empty())
        out << "trajectory = " << cfg.work.trajectory_file << "\n";

    out << "\n[output]\n";
    out << "directory = " << cfg.output.directory << "\n";
    out << "prefix = " << cfg.output.prefix << "\n";
    return out.str();
}

}  // namespace blipsum::cli
