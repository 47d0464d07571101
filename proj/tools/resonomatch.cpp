// resonomatch: spectrum | resonance | field | validate | asymptotics
//
// RESONOMATCH_SEED is accepted and ignored; nothing here is random.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "resonomatch/cli/commands.hpp"
#include "resonomatch/errors.hpp"

namespace rc = resonomatch::cli;

namespace {
std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonant transmission between coupled waveguides by mode matching"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, formats;
  int workers = 0;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--out", out_dir, "output directory (overrides [output] directory)");
  app.add_option("--workers", workers, "worker threads, 0 = all processors");
  app.add_option("--format", formats, "comma list from csv,svg,json");

  auto* spectrum = app.add_subcommand("spectrum", "reflection/transmission sweep over the band");
  auto* resonance = app.add_subcommand("resonance", "locate the transmission resonance");
  auto* field = app.add_subcommand("field", "field map at one frequency");
  auto* validate = app.add_subcommand("validate", "compare against the finite-difference oracle");
  auto* asymptotics = app.add_subcommand("asymptotics", "small-hole trend table");
  (void)spectrum;
  (void)resonance;

  double field_k = 0.0;
  std::string field_mode;
  field->add_option("--k", field_k, "frequency");
  field->add_option("--mode", field_mode, "dirichlet, neumann or combined");
  bool self_test = false;
  validate->add_flag("--self-test", self_test, "use mode matching as its own oracle");
  std::string widths;
  asymptotics->add_option("--widths", widths, "comma list of hole widths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rc::exit_config;
  }

  try {
    rc::RunConfig config = config_path.empty() ? rc::RunConfig{} : rc::load_config(config_path);
    if (!out_dir.empty()) config.output.directory = out_dir;
    if (!formats.empty()) config.output.formats = split_list(formats);
    if (field->count("--k")) config.field.k = field_k;
    if (!field_mode.empty()) config.field.mode = field_mode;
    if (!widths.empty()) {
      config.widths.clear();
      for (const auto& w : split_list(widths)) {
        try {
          config.widths.push_back(std::stod(w));
        } catch (const std::exception&) {
          throw resonomatch::ConfigError("--widths: bad number '" + w + "'");
        }
      }
    }

    rc::CommandOptions options;
    options.workers = workers;
    options.log = &std::cerr;
    options.self_test = self_test;

    rc::CommandResult result;
    if (app.got_subcommand("spectrum")) result = rc::cmd_spectrum(config, options);
    else if (app.got_subcommand("resonance")) result = rc::cmd_resonance(config, options);
    else if (app.got_subcommand("field")) result = rc::cmd_field(config, options);
    else if (app.got_subcommand("validate")) result = rc::cmd_validate(config, options);
    else result = rc::cmd_asymptotics(config, options);

    for (const auto& f : result.files) std::cout << f << "\n";
    (result.exit_code == 0 ? std::cout : std::cerr) << result.summary << "\n";
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rc::exit_code_for(e);
  }
}
