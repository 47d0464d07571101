#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "resonomatch/cli/commands.hpp"
#include "resonomatch/cli/config.hpp"
#include "resonomatch/cli/output.hpp"
#include "resonomatch/errors.hpp"

using namespace resonomatch;
using namespace resonomatch::cli;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("resonomatch_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig config_in(const fs::path& dir) {
  RunConfig c;
  c.output.directory = dir.string();
  return c;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string l;
  while (std::getline(ss, l)) out.push_back(l);
  return out;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(RESONOMATCH_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

TEST_SUITE("cli") {

TEST_CASE("shipped config parses to the defaults") {
  const RunConfig c = load_config(std::string(RESONOMATCH_SOURCE_DIR) + "/configs/default.ini");
  RunConfig expected;
  expected.output.formats = {"csv", "svg"};
  CHECK(c == expected);
}

TEST_CASE("config round trip") {
  RunConfig c;
  c.geometry.hole_lo = -0.6123456789012345;
  c.truncation.n_guide = 321;
  c.truncation.tail_correction = false;
  c.strict_truncation = true;
  c.sweep.k_min = 4.1;
  c.oracle.h = 1.0 / 3.0;
  c.output.formats = {"json", "csv"};
  c.field.mode = "neumann";
  c.widths = {0.25, 0.125};
  const std::string text = serialize(c);
  const RunConfig back = parse_config(text);
  CHECK(back == c);
  CHECK(serialize(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  RunConfig d = c;
  d.sweep.n_points += 1;
  CHECK(config_hash(d) != config_hash(c));
}

TEST_CASE("config errors name the line and key") {
  try {
    parse_config("[sweep]\nk_min = 4.0\nk_max = abc\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string w = e.what();
    CHECK(w.find("line 3") != std::string::npos);
    CHECK(w.find("k_max") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[nope]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("k_min = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nn_points = 4.5\n"), ConfigError);
  CHECK_NOTHROW(parse_config("# comment\n; another\n\n[sweep]\nk_min = 4.5  # trailing\n"));
  CHECK(parse_config("[sweep]\nk_min = 4.5 # trailing\n").sweep.k_min == 4.5);
}

TEST_CASE("config validation") {
  RunConfig c;
  auto w = validate(c);
  REQUIRE(w.size() == 1);
  CHECK(w[0].find("truncation rule") != std::string::npos);
  c.strict_truncation = true;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.truncation.n_guide = c.truncation.n_res = recommended_modes(c.geometry, c.truncation.p_aperture);
  CHECK(validate(c).empty());

  RunConfig bad;
  bad.sweep.k_min = 3.0;  // below sqrt(lambda_1)
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = RunConfig{};
  bad.geometry.hole_hi = -0.1;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = RunConfig{};
  bad.output.formats = {"png"};
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = RunConfig{};
  bad.widths = {0.9};
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(BandError("x")) == 2);
  CHECK(exit_code_for(DomainError("x")) == 2);
  CHECK(exit_code_for(NoResonanceError("x")) == 3);
  CHECK(exit_code_for(ResolutionError("x")) == 4);
  CHECK(exit_code_for(GuideLengthError("x")) == 4);
  CHECK(exit_code_for(SingularFrequencyError("x", 2)) == 5);
  CHECK(exit_code_for(NotSpdError("x")) == 5);
  CHECK(exit_code_for(NearSingularReductionError("x")) == 5);
}

TEST_CASE("spectrum output") {
  const auto dir = scratch("spectrum");
  auto c = load_config(std::string(RESONOMATCH_SOURCE_DIR) + "/configs/default.ini");
  c.output.directory = dir.string();
  c.output.formats = {"csv", "svg", "json"};
  const auto res = cmd_spectrum(c);
  CHECK(res.exit_code == 0);
  REQUIRE(res.files.size() == 3);
  const std::string csv = slurp(dir / "spectrum.csv");
  const auto lines = lines_of(csv);
  REQUIRE(lines.size() == 402);
  CHECK(lines[0] == provenance(c));
  CHECK(lines[0].rfind("# resonomatch ", 0) == 0);
  CHECK(lines[0].find("config=" + config_hash(c)) != std::string::npos);
  CHECK(lines[1] ==
        "k,re_r1D,im_r1D,re_r1N,im_r1N,re_r1,im_r1,re_t1,im_t1,abs_r1,abs_t1,phase_D_unwrapped,energy_residual,flags");
  CHECK(csv.find('\r') == std::string::npos);
  for (size_t i = 2; i < lines.size(); ++i) {
    std::stringstream ss(lines[i]);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() >= 13);
    CHECK(std::stod(cells[12]) <= 1e-10);
  }
  CHECK(slurp(dir / "spectrum.svg").rfind("<!-- resonomatch ", 0) == 0);
  const auto j = nlohmann::ordered_json::parse(slurp(dir / "spectrum.json"));
  CHECK(j.begin().key() == "provenance");
  CHECK(j["rows"].size() == 400);

  // byte-identical rerun, any worker count
  CommandOptions one;
  one.workers = 1;
  const std::string first = csv;
  cmd_spectrum(c, one);
  CHECK(slurp(dir / "spectrum.csv") == first);

  c.sweep.n_points = 2;
  c.output.formats = {"csv"};
  cmd_spectrum(c);
  const auto two = lines_of(slurp(dir / "spectrum.csv"));
  REQUIRE(two.size() == 4);
  CHECK(two[2].rfind("4,", 0) == 0);
  CHECK(two[3].rfind("7.7999999999999998,", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("format_double keeps 17 digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(std::numbers::pi)) == std::numbers::pi);
}

TEST_CASE("resonance report") {
  const auto dir = scratch("resonance");
  const auto c = config_in(dir);
  const auto res = cmd_resonance(c);
  CHECK(res.exit_code == 0);
  const auto j = nlohmann::ordered_json::parse(slurp(dir / "resonance.json"));
  CHECK(j.begin().key() == "provenance");
  CHECK(j["k_closed"].get<double>() == doctest::Approx(4.442882938158366).epsilon(1e-15));
  const double t1 = j["t1_at_kstar"]["abs"].get<double>();
  const double r1 = j["abs_r1_at_kstar"].get<double>();
  CHECK(t1 * t1 + r1 * r1 == doctest::Approx(1.0).epsilon(1e-10));
  const double mn = j["min_abs_r1"].get<double>();
  CHECK(mn <= r1);
  CHECK(t1 <= std::sqrt(1.0 - mn * mn) + 1e-10);
  for (const char* key : {"k_star", "min_abs_r1", "t1_at_kstar", "determinant_root", "hole_width"})
    CHECK(j.contains(key));
  fs::remove_all(dir);
}

TEST_CASE("resonance outside the band exits 3") {
  const auto dir = scratch("nores");
  auto c = config_in(dir);
  c.sweep.k_min = 5.0;
  c.sweep.k_max = 6.0;
  try {
    cmd_resonance(c);
    FAIL("expected NoResonanceError");
  } catch (const std::exception& e) {
    CHECK(exit_code_for(e) == exit_no_resonance);
    CHECK(std::string(e.what()).find("arg r1^D range") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("field output") {
  const auto dir = scratch("field");
  auto c = config_in(dir);
  c.output.formats = {"csv", "svg"};
  c.field.ny = 40;
  c.field.nz = 60;
  const auto res = cmd_field(c);
  CHECK(res.files.size() == 2);
  const auto lines = lines_of(slurp(dir / "field.csv"));
  CHECK(lines[0].rfind("# resonomatch ", 0) == 0);
  CHECK(lines[1] == "y,z,re_u,im_u,abs_u");
  CHECK(lines.size() > 100);
  CHECK(slurp(dir / "field.svg").rfind("<!-- resonomatch ", 0) == 0);
  c.field.k = 3.0;
  try {
    cmd_field(c);
    FAIL("expected BandError");
  } catch (const std::exception& e) {
    CHECK(exit_code_for(e) == exit_config);
  }
  c.field.k = 5.0;
  c.field.mode = "dirichlet";
  CHECK_NOTHROW(cmd_field(c));
  fs::remove_all(dir);
}

TEST_CASE("validation self-test and coarse grid") {
  const auto dir = scratch("validate");
  auto c = config_in(dir);
  CommandOptions self;
  self.self_test = true;
  const auto rep = run_validation(c, self);
  REQUIRE(rep.points.size() == 10);
  for (const auto& p : rep.points) CHECK(p.delta == 0.0);
  const auto ks = validation_points(c.sweep.band(), rep.k_star);
  CHECK(ks.size() == 5);
  CHECK(std::abs(ks.back() - rep.k_star) <= 0.05);
  const auto res = cmd_validate(c, self);
  CHECK(res.exit_code == 0);
  const auto j = nlohmann::ordered_json::parse(slurp(dir / "validate.json"));
  CHECK(j["pass"].get<bool>());

  c.oracle.h = 1.0 / 32.0;
  try {
    cmd_validate(c);
    FAIL("expected ResolutionError");
  } catch (const std::exception& e) {
    CHECK(exit_code_for(e) == exit_validation);
  }
  fs::remove_all(dir);
}

TEST_CASE("asymptotics table") {
  const auto dir = scratch("asym");
  auto c = config_in(dir);
  cmd_asymptotics(c);
  const auto lines = lines_of(slurp(dir / "asymptotics.csv"));
  REQUIRE(lines.size() == 6);
  CHECK(lines[0].rfind("# resonomatch ", 0) == 0);
  auto column = [&](const std::string& name) {
    std::stringstream hs(lines[1]);
    std::string cell;
    int idx = 0, found = -1;
    while (std::getline(hs, cell, ',')) {
      if (cell == name) found = idx;
      ++idx;
    }
    REQUIRE(found >= 0);
    std::vector<double> v;
    for (size_t i = 2; i < lines.size(); ++i) {
      std::stringstream ss(lines[i]);
      for (int t = 0; t <= found; ++t) std::getline(ss, cell, ',');
      v.push_back(std::stod(cell));
    }
    return v;
  };
  const auto alpha = column("alpha"), at_k = column("abs_r1_at_kstar");
  for (size_t i = 1; i < alpha.size(); ++i) {
    CHECK(alpha[i] < alpha[i - 1]);
    CHECK(at_k[i] < at_k[i - 1]);
  }
  c.widths = {0.2};
  cmd_asymptotics(c);
  CHECK(lines_of(slurp(dir / "asymptotics.csv")).size() == 3);
  fs::remove_all(dir);
}

TEST_CASE("executable exit codes") {
  const auto dir = scratch("binary");
  const std::string out = " --out " + dir.string();
  CHECK(run_binary("--help") == 0);
  CHECK(run_binary("spectrum" + out) == 0);
  CHECK(run_binary("field --k 3" + out) == 2);
  CHECK(run_binary("spectrum --config /nonexistent.ini" + out) == 2);
  CHECK(run_binary("spectrum --format pdf" + out) == 2);
  CHECK(run_binary("frobnicate") == 2);
  {
    std::ofstream f(dir / "nores.ini");
    f << "[sweep]\nk_min = 5\nk_max = 6\n";
  }
  CHECK(run_binary("resonance --config " + (dir / "nores.ini").string() + out) == 3);
  {
    std::ofstream f(dir / "coarse.ini");
    f << "[oracle]\nh = 0.03125\n";
  }
  CHECK(run_binary("validate --config " + (dir / "coarse.ini").string() + out) == 4);
  CHECK(run_binary("validate --self-test" + out) == 0);
  {
    std::ofstream f(dir / "pole.ini");
    f << "[field]\nk = 4.4428829381583661\n";
  }
  CHECK(run_binary("field --config " + (dir / "pole.ini").string() + out) == 5);
  fs::remove_all(dir);
}

}  // TEST_SUITE
