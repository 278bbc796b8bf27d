// cli.hpp — Run configuration in the flat-section key/value format, the
// normalized dump, and the subcommand dispatcher. The grammar is documented in
// the README; every physical quantity is in Delta units with hbar = 1.

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "blipsum/bath.hpp"
#include "blipsum/drive.hpp"
#include "blipsum/engine.hpp"

namespace blipsum::cli {

struct KernelConfig {
    bool tau_auto = true;     // tau_max follows the output grid
    double tau_max = 0.0;     // used when tau_auto is false
    double tolerance = 1e-8;  // midpoint interpolation target
    std::size_t max_nodes = 60000;

    bool operator==(const KernelConfig&) const = default;
};

struct OracleConfig {
    int modes = 1;
    int fock_cutoff = 6;
    int thermal_samples = 64;
    double convergence_tol = 1e-4;
    double ode_tol = 1e-12;

    bool operator==(const OracleConfig&) const = default;
};

struct WorkConfig {
    double tau = 1.0;    // TPM protocol duration
    double nu_max = 5.0; // characteristic-function grid
    int nu_points = 101;
    std::string trajectory_file;  // optional CSV: t_begin,t_end,eta,xi

    bool operator==(const WorkConfig&) const = default;
};

struct OutputConfig {
    std::string directory = ".";
    std::string prefix = "run";

    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    drive::SystemSpec system;
    bath::BathSpec bath;
    drive::DriveProtocol drive = drive::DriveProtocol::none();
    engine::EngineConfig engine;
    KernelConfig kernel;
    OracleConfig oracle;
    WorkConfig work;
    OutputConfig output;

    double resolved_tau_max() const;  // tau_auto ? max output time : kernel.tau_max
    bool operator==(const RunConfig&) const = default;
};

// Parses the documented flat-section format, applies defaults, and validates
// every invariant including the cross-field ones. Overrides ("section.key",
// "value") are applied after the text, any key may be overridden.
RunConfig parse_config(const std::string& text,
                       const std::vector<std::pair<std::string, std::string>>& overrides = {});
RunConfig parse_config_file(const std::string& path,
                            const std::vector<std::pair<std::string, std::string>>& overrides = {});

// Normalized dump: every key explicit, fixed order, full double precision.
// Re-parsing the dump yields an equal RunConfig.
std::string dump_config(const RunConfig& cfg);

// Executes one subcommand: kernels | transition | niba | oracle-compare |
// work-stats | tpm. Writes the declared artifacts under output.directory,
// prints the unit banner, the normalized config and a one-line summary to
// `log`. Returns the process exit code (0 ok, 2 config, 3 convergence,
// 4 resource, 1 other); partially written outputs are removed on failure.
int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& log);

}  // namespace blipsum::cli
