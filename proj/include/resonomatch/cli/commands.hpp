#pragma once

#include <complex>
#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include "resonomatch/cli/config.hpp"
#include "resonomatch/resonance.hpp"

namespace resonomatch::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_no_resonance = 3,
  exit_validation = 4,
  exit_numerical = 5,
};

// Maps a library exception onto the process exit code.
int exit_code_for(const std::exception& e);

struct CommandOptions {
  int workers = 0;  // <= 0: all available processors
  std::ostream* log = nullptr;
  // validate: replace the FD oracle by mode matching itself
  bool self_test = false;
};

struct CommandResult {
  int exit_code = exit_ok;
  std::vector<std::string> files;
  std::string summary;
};

CommandResult cmd_spectrum(const RunConfig& config, const CommandOptions& options = {});
CommandResult cmd_resonance(const RunConfig& config, const CommandOptions& options = {});
CommandResult cmd_field(const RunConfig& config, const CommandOptions& options = {});
CommandResult cmd_validate(const RunConfig& config, const CommandOptions& options = {});
CommandResult cmd_asymptotics(const RunConfig& config, const CommandOptions& options = {});

// Validation data shared by cmd_validate and the acceptance harness.
struct ValidationPoint {
  double k = 0.0;
  Parity parity = Parity::dirichlet;
  std::complex<double> r1_mm;
  std::complex<double> r1_fd;
  double delta = 0.0;
  double fd_unitarity = 0.0;  // | |r1_fd| - 1 |
};

struct ValidationReport {
  double k_star = 0.0;
  double h = 0.0;
  std::vector<ValidationPoint> points;
  double max_delta = 0.0;
  double max_fd_unitarity = 0.0;
  double fd_argmin = 0.0;  // argmin |r1| over the FD resonance sweep
  double fd_argmin_offset = 0.0;
  std::vector<double> fd_sweep_k;
  std::vector<double> fd_sweep_abs_r1;
  // Refinement study at k_conv on {2h, h, h/2}.
  double k_conv = 0.0;
  std::vector<double> conv_h;
  double order_D = 0.0, order_N = 0.0;
  double extrap_delta_D = 0.0, extrap_delta_N = 0.0;
  std::string conv_warning;
  bool agreement_ok = false;
  bool unitarity_ok = false;
  bool location_ok = false;
  std::string worst;
  bool passed() const { return agreement_ok && unitarity_ok && location_ok; }
};

// Five comparison points: band quartile centers and k_star - 0.025.
std::vector<double> validation_points(const Band& band, double k_star);

ValidationReport run_validation(const RunConfig& config, const CommandOptions& options = {});

}  // namespace resonomatch::cli
