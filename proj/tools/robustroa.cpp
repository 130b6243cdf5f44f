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

// robustroa command-line front end.
//
//   robustroa synth|hj-brs|wmax|simulate --config FILE [--seed N] [--out DIR]
//   robustroa reproduce fig3|fig4a|fig4c [--out DIR]
//
// Exit status: 0 ok, 2 synthesis infeasible, 3 no safe region of attraction,
// 4 configuration error, 1 anything else.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "robustroa/error.hpp"
#include "robustroa/harness.hpp"

namespace fs = std::filesystem;
using namespace robustroa;
using namespace robustroa::harness;

namespace {

#ifndef ROBUSTROA_CONFIG_DIR
#define ROBUSTROA_CONFIG_DIR "configs"
#endif

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string mode;
};

Scenario load(const Common& c) {
  auto s = load_scenario(c.config);
  if (c.seed) {
    s.seed = *c.seed;
    s.disturbance.seed = *c.seed;
  }
  if (c.mode == "nominal") s.mode = ControllerMode::Nominal;
  else if (c.mode == "robust") s.mode = ControllerMode::Robust;
  return s;
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void print_matrix(std::ostream& os, const char* name, const linalg::DenseMatrix& m) {
  os << name << " =\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << " ";
    for (std::size_t j = 0; j < m.cols(); ++j) os << ' ' << std::setw(14) << m(i, j);
    os << '\n';
  }
}

void save_certificate(const fs::path& dir, const std::string& scenario, const std::string& block,
                      const clf::ClfCertificate& c) {
  std::ostringstream os;
  write_certificate(os, block, c);
  write_file(dir / (scenario + "_" + block + ".cert"), os.str());
}

void save_value_grid(const fs::path& dir, const std::string& scenario, const ReachOutcome& r) {
  std::ostringstream os;
  hj::write_value_grid(os, r.brs.value);
  write_file(dir / (scenario + "_" + r.block + ".vgrid"), os.str());
  write_file(dir / (scenario + "_" + r.block + "_value.csv"), r.brs.value.to_csv());
}

int cmd_synth(const Common& c) {
  const auto s = load(c);
  const auto certs = synthesize_blocks(s);
  std::cout << std::setprecision(6) << "scenario: " << s.name << '\n';
  for (const auto& b : certs) {
    std::cout << "block " << b.block << ": status=" << lmi::to_string(b.synthesis.sdp.status)
              << " block_lambda_max=" << b.synthesis.block_max_eig
              << " certificate_lambda_max=" << b.synthesis.certificate_max_eig << '\n';
    print_matrix(std::cout, "K", b.certificate.k);
    print_matrix(std::cout, "P", b.certificate.p);
    save_certificate(c.out, s.name, b.block, b.certificate);
  }
  return 0;
}

int cmd_hj(const Common& c) {
  const auto s = load(c);
  std::cout << "scenario: " << s.name << '\n';
  int solved = 0;
  for (const auto& b : s.blocks) {
    if (!b.reach) continue;
    const auto r = solve_reach(b, s.quadruped);
    std::cout << "block " << b.name << ": steps=" << r.brs.steps << " t=" << r.brs.value.time;
    if (!b.reach->horizon) std::cout << " converged=" << (r.brs.converged ? "true" : "false");
    std::cout << " change_rate=" << r.brs.last_change_rate << " safe_cells=" << r.safe.count()
              << " of " << r.safe.grid.size() << '\n';
    save_value_grid(c.out, s.name, r);
    ++solved;
  }
  if (solved == 0) throw Error(ErrorCode::ConfigError, "no [reach_*] section in " + c.config);
  return 0;
}

int cmd_wmax(const Common& c) {
  const auto s = load(c);
  auto certs = synthesize_blocks(s);
  std::cout << std::setprecision(6) << "scenario: " << s.name << '\n';
  for (std::size_t i = 0; i < s.blocks.size(); ++i) {
    const auto out = certify_block(s, s.blocks[i], certs[i].certificate);
    std::cout << "block " << out.block << ": w_max=" << out.result.w_max << " roa_level=" << out.result.level;
    if (out.reach) {
      std::cout << " margin=" << out.result.margin << " iterations=" << out.result.iterations
                << " bracket_too_small=" << (out.result.bracket_too_small ? "true" : "false");
      save_value_grid(c.out, s.name, *out.reach);
    }
    std::cout << '\n';
    save_certificate(c.out, s.name, out.block, certs[i].certificate);
  }
  return 0;
}

void emit_run(const fs::path& dir, const Scenario& s, const std::vector<std::pair<ControllerMode, RunResult>>& runs) {
  std::vector<ModeRun> refs;
  for (const auto& [mode, r] : runs) {
    write_file(dir / (s.name + "_" + to_string(mode) + ".csv"), r.sim.trajectory.to_csv());
    std::cout << format_metrics(s, mode, r) << '\n';
    refs.push_back({mode, &r});
  }
  const std::string stem = runs.size() == 1 ? s.name + "_" + to_string(runs.front().first) : s.name;
  write_file(dir / (stem + ".svg"), render_figure(s, refs));
}

int cmd_simulate(const Common& c) {
  const auto s = load(c);
  std::vector<std::pair<ControllerMode, RunResult>> runs;
  runs.emplace_back(s.mode, run_scenario(s, s.mode));
  emit_run(c.out, s, runs);
  return 0;
}

int cmd_reproduce(const Common& c, const std::string& figure) {
  const char* env = std::getenv("ROBUSTROA_CONFIG_DIR");
  Common cc = c;
  if (cc.config.empty()) cc.config = (fs::path(env ? env : ROBUSTROA_CONFIG_DIR) / (figure + ".ini")).string();
  const auto s = load(cc);
  // The two modes are independent simulations.
  auto nominal = std::async(std::launch::async, [&] { return run_scenario(s, ControllerMode::Nominal); });
  auto robust = run_scenario(s, ControllerMode::Robust);
  std::vector<std::pair<ControllerMode, RunResult>> runs;
  runs.emplace_back(ControllerMode::Nominal, nominal.get());
  runs.emplace_back(ControllerMode::Robust, std::move(robust));
  emit_run(c.out, s, runs);
  return 0;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Infeasible: return 2;
    case ErrorCode::NoSafeRoa: return 3;
    case ErrorCode::ConfigError: return 4;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust MPC certification: CLF synthesis, HJ reachability, disturbance bounds"};
  app.require_subcommand(1);
  Common common;
  std::string figure;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", common.config, "scenario file");
    if (need_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "override the scenario seed");
    sub->add_option("--out", common.out, "output directory")->capture_default_str();
  };
  auto* synth = app.add_subcommand("synth", "solve the CLF LMI for every block and write certificates");
  auto* hjbrs = app.add_subcommand("hj-brs", "compute the backward reachable set of every reach block");
  auto* wmax = app.add_subcommand("wmax", "certify the disturbance bound of every block");
  auto* sim = app.add_subcommand("simulate", "run the closed loop and write CSV, SVG and metrics");
  auto* repro = app.add_subcommand("reproduce", "run a bundled figure scenario in both controller modes");
  for (auto* sub : {synth, hjbrs, wmax, sim}) add_common(sub, true);
  add_common(repro, false);
  sim->add_option("--mode", common.mode, "override the controller mode")->check(CLI::IsMember({"nominal", "robust"}));
  repro->add_option("figure", figure, "figure id")->required()->check(CLI::IsMember({"fig3", "fig4a", "fig4c"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 4;
  }

  try {
    if (*synth) return cmd_synth(common);
    if (*hjbrs) return cmd_hj(common);
    if (*wmax) return cmd_wmax(common);
    if (*sim) return cmd_simulate(common);
    return cmd_reproduce(common, figure);
  } catch (const Error& e) {
    std::cerr << "robustroa: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "robustroa: " << e.what() << '\n';
    return 1;
  }
}
