/*
 Copyright 2026 The robustroa Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <sys/wait.h>

#include "robustroa/error.hpp"
#include "robustroa/harness.hpp"

using namespace robustroa;
using namespace robustroa::harness;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = ROBUSTROA_CONFIG_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string edited(const std::string& file, const std::string& pattern, const std::string& replacement) {
  const std::string text = slurp(kConfigs / file);
  const std::string out = std::regex_replace(text, std::regex(pattern), replacement);
  REQUIRE(out != text);
  return out;
}

ErrorCode parse_error(const std::string& text) {
  std::istringstream is(text);
  try {
    parse_scenario(is);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / ("robustroa_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ROBUSTROA_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Exit count recomputed from the CSV's E and roa_level columns alone.
int exits_from_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string header;
  std::getline(is, header);
  std::vector<std::string> cols;
  {
    std::istringstream hs(header);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
  }
  const auto e_col = std::find(cols.begin(), cols.end(), "E") - cols.begin();
  const auto c_col = std::find(cols.begin(), cols.end(), "roa_level") - cols.begin();
  REQUIRE(static_cast<std::size_t>(e_col) < cols.size());
  REQUIRE(static_cast<std::size_t>(c_col) < cols.size());
  int exits = 0;
  bool inside = false, entered = false;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string f;
    std::vector<double> v;
    while (std::getline(ls, f, ',')) v.push_back(std::stod(f));
    const bool now = v[e_col] <= v[c_col];
    if (now) entered = true;
    if (entered && inside && !now) ++exits;
    inside = now;
  }
  return exits;
}

}  // namespace

TEST_CASE("bundled scenarios parse") {
  const auto fig3 = load_scenario((kConfigs / "fig3.ini").string());
  CHECK(fig3.plant == PlantKind::Quadcopter);
  REQUIRE(fig3.blocks.size() == 1);
  CHECK(fig3.blocks[0].w_max == 3.5);
  CHECK(fig3.mpc.q(4, 4) == 1e14);
  CHECK(fig3.blocks[0].params.r(1, 1) == 1e-4);

  const auto fig4a = load_scenario((kConfigs / "fig4a.ini").string());
  CHECK(fig4a.plant == PlantKind::Quadruped);
  CHECK(fig4a.monitor == "z");
  const auto& z = fig4a.block("z");
  CHECK(z.params.mu == 90.0);
  CHECK(z.params.lambda == 0.8);
  REQUIRE(z.reach);
  CHECK(z.reach->horizon == -2.0);
  CHECK(z.reach->set == hj::SetMode::Invariance);
  CHECK(z.state_indices() == std::vector<std::size_t>{1, 4});
  CHECK(z.input_indices() == std::vector<std::size_t>{2, 3});
  CHECK(fig4a.disturbance.amplitude == plants::Vector{5.0, 0.0});

  const auto fig4c = load_scenario((kConfigs / "fig4c.ini").string());
  CHECK(fig4c.monitor == "y");
  CHECK(fig4c.disturbance.amplitude == plants::Vector{0.0, -29.43});
  CHECK(fig4c.block("y").reach->dynamics.ext_force_lo == -29.43);
}

TEST_CASE("configuration errors") {
  CHECK(parse_error("") == ErrorCode::ConfigError);
  CHECK(parse_error("[scenario]\nname = x\n") == ErrorCode::ConfigError);
  CHECK(parse_error(edited("fig3.ini", "plant = quadcopter", "plant = hexapod")) == ErrorCode::ConfigError);
  CHECK(parse_error(edited("fig3.ini", "mu = 0.1", "mu = abc")) == ErrorCode::ConfigError);
  CHECK(parse_error(edited("fig3.ini", "mu = 0.1", "mu = 0.1 # inline")) == ErrorCode::ConfigError);
  CHECK(parse_error(edited("fig3.ini", "r = 1e6 1e6", "r = 1e6")) == ErrorCode::ConfigError);
  CHECK(parse_error(edited("fig3.ini", "monitor = full", "monitor = other")) == ErrorCode::ConfigError);
  CHECK(parse_error(edited("fig3.ini", "w_max = 3.5\n", "")) == ErrorCode::ConfigError);
  CHECK(parse_error(edited("fig3.ini", "lambda = 0.5", "lambda = -0.5")) == ErrorCode::ConfigError);
  CHECK(parse_error(edited("fig4a.ini", "horizon = -2.0", "horizon = 2.0")) == ErrorCode::ConfigError);
  CHECK(parse_error(edited("fig4a.ini", "model = quadruped_y", "model = quadcopter")) == ErrorCode::ConfigError);
  CHECK(parse_error(edited("fig4a.ini", "\\[mpc\\]", "[mpx]")) == ErrorCode::ConfigError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/file.ini"), Error);
}

TEST_CASE("certificate round trip") {
  const auto s = load_scenario((kConfigs / "fig3.ini").string());
  auto certs = synthesize_blocks(s);
  auto& c = certs[0].certificate;
  c.set_w_max(3.5);
  std::stringstream ss;
  write_certificate(ss, "full", c);
  std::string block;
  const auto back = read_certificate(ss, &block);
  CHECK(block == "full");
  CHECK((back.k - c.k).max_abs() == 0.0);
  CHECK((back.p - c.p).max_abs() == 0.0);
  CHECK((back.params.q - c.params.q).max_abs() == 0.0);
  CHECK(back.params.lambda == c.params.lambda);
  CHECK(back.params.mu == c.params.mu);
  CHECK(back.w_max == c.w_max);
  CHECK(back.roa_level == c.roa_level);

  std::istringstream bad("robustroa-certificate 2\n");
  CHECK_THROWS_AS(read_certificate(bad), Error);
  std::istringstream truncated("robustroa-certificate 1\nblock a\nlambda 1\nmu 1\nw_max none\nroa_level 0\nK 1 2\n1\n");
  CHECK_THROWS_AS(read_certificate(truncated), Error);
}

TEST_CASE("fixed seed gives identical CSV bytes") {
  auto s = load_scenario((kConfigs / "fig3.ini").string());
  s.disturbance.kind = plants::DisturbanceKind::UniformRandom;
  const auto a = run_scenario(s, ControllerMode::Robust).sim.trajectory.to_csv();
  const auto b = run_scenario(s, ControllerMode::Robust).sim.trajectory.to_csv();
  CHECK(a == b);
  s.disturbance.seed = s.seed + 1;
  const auto c = run_scenario(s, ControllerMode::Robust).sim.trajectory.to_csv();
  CHECK(a != c);
}

TEST_CASE("exit count recomputed from the CSV matches the live count") {
  const auto s = load_scenario((kConfigs / "fig3.ini").string());
  for (auto mode : {ControllerMode::Nominal, ControllerMode::Robust}) {
    const auto r = run_scenario(s, mode);
    CHECK(exits_from_csv(r.sim.trajectory.to_csv()) == r.sim.metrics.invariant_exits);
    const auto text = format_metrics(s, mode, r);
    CHECK(text.find("invariant_exits: " + std::to_string(r.sim.metrics.invariant_exits)) != std::string::npos);
    CHECK(text.find("diverged: ") != std::string::npos);
    CHECK(text.find("rms_error: y=") != std::string::npos);
  }
}

TEST_CASE("figure rendering") {
  const auto s = load_scenario((kConfigs / "fig3.ini").string());
  const auto nominal = run_scenario(s, ControllerMode::Nominal);
  const auto robust = run_scenario(s, ControllerMode::Robust);
  const auto svg = render_figure(s, {{ControllerMode::Nominal, &nominal}, {ControllerMode::Robust, &robust}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("invariant band") != std::string::npos);
  CHECK(svg.find("error in y") != std::string::npos);
  CHECK(svg.find("error in z") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
}

TEST_CASE("command-line exit codes and outputs") {
  const auto dir = scratch_dir();
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  const std::string out = " --out " + (dir / "out").string();

  CHECK(run_cli("synth --config " + (kConfigs / "fig3.ini").string() + out) == 0);
  CHECK(fs::exists(dir / "out" / "fig3_full.cert"));
  {
    std::ifstream in(dir / "out" / "fig3_full.cert");
    CHECK_NOTHROW(read_certificate(in));
  }

  const auto infeasible = write("infeasible.ini", edited("fig3.ini", "lambda = 0.5", "lambda = 1e6"));
  CHECK(run_cli("synth --config " + infeasible + out) == 2);

  const auto empty = write("empty.ini", edited("fig4a.ini", "half_width = 0.08 0.5", "half_width = 0 0"));
  CHECK(run_cli("wmax --config " + empty + out) == 3);

  const auto broken = write("broken.ini", "[scenario]\nname = x\nplant = quadcopter\n");
  CHECK(run_cli("simulate --config " + broken + out) == 4);
  CHECK(run_cli("simulate") == 4);
  CHECK(run_cli("bogus") == 4);

  CHECK(run_cli("simulate --config " + (kConfigs / "fig3.ini").string() + " --mode nominal --seed 3" + out) == 0);
  CHECK(fs::exists(dir / "out" / "fig3_nominal.csv"));
  CHECK(fs::exists(dir / "out" / "fig3_nominal.svg"));
  fs::remove_all(dir);
}
