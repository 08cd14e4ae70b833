#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "etsm/config.hpp"
#include "etsm/simulation.hpp"

namespace etsm {

/// Process exit codes of the subcommands.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitNotObservable = 2,
  kExitBoundUndefined = 3,
};

/// 17 significant digits; round-trips every double through text.
std::string format_real(double value);

/// Boundary of the 2-D projection of e onto coordinates (i, j).
std::vector<std::pair<double, double>> ellipse_boundary(const Ellipsoid& e, Eigen::Index i,
                                                        Eigen::Index j, int points = 64);

void write_measurement_log(const std::filesystem::path& path,
                           const std::vector<MeasurementRecord>& records);
/// Needs header columns k, gamma, y_tau (others ignored). Rejects gaps in
/// k with the offending row.
std::vector<MeasurementRecord> read_measurement_log(const std::filesystem::path& path);

int cmd_check(const SimConfig& config, std::ostream& out);
int cmd_bound(const SimConfig& config, std::ostream& out);

/// Writes steps.csv, log.csv, summary.json and the ellipsoid polylines into
/// out_dir. seeds > 1 adds a Monte Carlo sweep to the summary.
int cmd_simulate(const SimConfig& config, const std::filesystem::path& out_dir,
                 std::int64_t seeds, std::ostream& out);

/// Observer-only run over a recorded log; writes replay_steps.csv.
int cmd_replay(const SimConfig& config, const std::filesystem::path& log_path,
               const std::filesystem::path& out_dir, std::ostream& out);

}  // namespace etsm
