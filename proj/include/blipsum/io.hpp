// io.hpp — Small file helpers: deterministic number formatting, text files,
// and the two CSV ingestion formats (drive tables and spin trajectories).

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "blipsum/drive.hpp"

namespace blipsum::io {

// Shortest representation that round-trips a double (17 significant digits),
// locale independent; used for every CSV/config number so outputs are
// byte-stable across runs and worker counts.
std::string format_g17(double value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Two-column numeric CSV (t, value); an optional non-numeric header line is
// skipped. Used for tabulated drives.
std::pair<std::vector<double>, std::vector<double>> load_two_column_csv(
    const std::string& path);

// Trajectory CSV with columns t_begin,t_end,eta,xi.
std::vector<drive::SpinTrajectory::Segment> load_trajectory_csv(const std::string& path);

}  // namespace blipsum::io
