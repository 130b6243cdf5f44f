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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "robustroa/clf.hpp"
#include "robustroa/hj.hpp"
#include "robustroa/mpc.hpp"
#include "robustroa/plants.hpp"
#include "robustroa/roa.hpp"

namespace robustroa::harness {

enum class PlantKind { Quadcopter, Quadruped };
enum class ControllerMode { Nominal, Robust };

const char* to_string(ControllerMode m);

/// Linear model a CLF block is synthesized on; fixes which states and
/// inputs of the plant it acts on.
enum class BlockModel { Quadcopter, QuadrupedY, QuadrupedZ };

struct ReachSpec {
  hj::TargetSet target;
  std::size_t grid_n = 101;
  /// Negative horizon, or nullopt for convergence mode.
  std::optional<double> horizon = -2.0;
  hj::GameMode game = hj::GameMode::ControlMinimizes;
  hj::SetMode set = hj::SetMode::Invariance;
  plants::QuadrupedReachConfig dynamics;
};

struct ClfBlock {
  std::string name;
  BlockModel model = BlockModel::Quadcopter;
  clf::ClfParams params;
  /// Fixed disturbance bound; when absent w_max comes from the reach spec.
  std::optional<double> w_max;
  std::optional<ReachSpec> reach;

  std::vector<std::size_t> state_indices() const;
  std::vector<std::size_t> input_indices() const;
};

struct Scenario {
  std::string name;
  PlantKind plant = PlantKind::Quadcopter;
  ControllerMode mode = ControllerMode::Robust;
  std::uint64_t seed = 0;
  plants::QuadcopterParams quadcopter;
  plants::Figure8Reference figure8;
  plants::QuadrupedParams quadruped;
  mpc::MpcConfig mpc;
  std::vector<ClfBlock> blocks;
  std::string monitor;
  plants::DisturbancePolicy disturbance;
  plants::SimulationOptions sim;
  roa::WmaxOptions wmax;

  const ClfBlock& block(const std::string& name) const;
};

/// INI text with `;` or `#` comment lines. Throws ConfigError.
Scenario parse_scenario(std::istream& is);
Scenario load_scenario(const std::string& path);

clf::LinearModel block_model(const Scenario& s, const ClfBlock& b);

struct BlockCertificate {
  std::string block;
  clf::SynthesisResult synthesis;
  clf::ClfCertificate certificate;
};

/// CLF LMI synthesis for every block. Throws Infeasible when a block has no
/// certificate.
std::vector<BlockCertificate> synthesize_blocks(const Scenario& s);

struct ReachOutcome {
  std::string block;
  hj::BrsResult brs;
  hj::Mask safe;
};

/// Throws InvalidArgument when the block has no reach spec.
ReachOutcome solve_reach(const ClfBlock& b, const plants::QuadrupedParams& params);

struct WmaxOutcome {
  std::string block;
  roa::WmaxResult result;
  /// Empty when the bound came from the config.
  std::optional<ReachOutcome> reach;
};

/// Sets cert.w_max from the fixed bound or from the HJ line search.
/// Throws NoSafeRoa.
WmaxOutcome certify_block(const Scenario& s, const ClfBlock& b, clf::ClfCertificate& cert);

struct RunResult {
  std::vector<BlockCertificate> certificates;
  std::vector<WmaxOutcome> bounds;
  plants::LyapunovMonitor monitor;
  plants::SimulationResult sim;
};

/// Full pipeline: synthesis, w_max for every block, closed-loop simulation.
RunResult run_scenario(const Scenario& s, ControllerMode mode);

/// Plain-text certificate:
///   robustroa-certificate 1
///   block <name>
///   lambda <λ>
///   mu <μ>
///   w_max <w | none>
///   roa_level <c>
///   K <rows> <cols>   followed by the rows
///   P <n> <n>         followed by the rows
void write_certificate(std::ostream& os, const std::string& block, const clf::ClfCertificate& c);
/// Throws ConfigError.
clf::ClfCertificate read_certificate(std::istream& is, std::string* block = nullptr);

/// Key-value metrics block printed by the CLI.
std::string format_metrics(const Scenario& s, ControllerMode mode, const RunResult& r);

struct ModeRun {
  ControllerMode mode;
  const RunResult* result;
};

/// Trajectory panel plus one error-vs-band panel per monitored state. The
/// band is ±sqrt(c·(P⁻¹)ᵢᵢ), the extent of the invariant ellipse along axis i.
std::string render_figure(const Scenario& s, const std::vector<ModeRun>& runs);

}  // namespace robustroa::harness
