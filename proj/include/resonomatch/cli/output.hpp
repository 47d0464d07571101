#pragma once

#include <string>
#include <vector>

#include "resonomatch/cli/config.hpp"
#include "resonomatch/resonance.hpp"
#include "resonomatch/scattering.hpp"

namespace resonomatch::cli {

// "# resonomatch <version> config=<hash>"
std::string provenance(const RunConfig& config);

std::string spectrum_csv(const RunConfig& config, const std::vector<resonance::SpectrumRow>& rows);
std::string spectrum_svg(const RunConfig& config, const std::vector<resonance::SpectrumRow>& rows);

std::string field_csv(const RunConfig& config, const scattering::FieldMap& map);
std::string field_svg(const RunConfig& config, const scattering::FieldMap& map);

std::string asymptotics_csv(const RunConfig& config,
                            const std::vector<resonance::AsymptoticRow>& rows);

// Flag bits as text: "", "shifted", "phase_gap" or "shifted|phase_gap".
std::string flag_text(unsigned flags);

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained line plot with axes, ticks and legend.
std::string line_plot_svg(const std::string& comment, const std::string& title,
                          const std::string& x_label, const std::vector<Series>& series);

void write_file(const std::string& path, const std::string& contents);

}  // namespace resonomatch::cli
