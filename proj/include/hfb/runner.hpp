#pragma once

// Command implementations behind the CLI: evolve, oracle comparison,
// parameter sweeps and trajectory diagnostics, with CSV/JSON output.

#include <string>
#include <vector>

#include "hfb/config.hpp"
#include "hfb/dynamics.hpp"

namespace hfb {

// exit codes shared by all commands
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitInvariantAbort = 2;
inline constexpr int kExitCutoffOverflow = 3;

int cmd_evolve(const RunConfig& cfg);
int cmd_oracle_compare(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg, const std::string& axis,
              const std::vector<double>& values);
int cmd_diagnose(const RunConfig& cfg, const std::string& trajectory_path);

// binary trajectory round trip ("HFBTRAJ1" format)
void write_trajectory(const std::string& path, const Trajectory& traj,
                      const PotentialSpec& pot);
Trajectory read_trajectory(const std::string& path);

}  // namespace hfb
