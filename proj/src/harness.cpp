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

#include "robustroa/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "robustroa/error.hpp"
#include "robustroa/svg.hpp"

namespace robustroa::harness {

namespace pt = boost::property_tree;

namespace {

Error config_error(const std::string& what) { return Error(ErrorCode::ConfigError, what); }

const pt::ptree& section(const pt::ptree& root, const std::string& name) {
  const auto it = root.find(name);
  if (it == root.not_found()) throw config_error("missing section [" + name + "]");
  return it->second;
}

std::optional<std::string> text(const pt::ptree& sec, const std::string& key) {
  const auto v = sec.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
  if (!v) return std::nullopt;
  std::string s = *v;
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  return s;
}

std::string need_text(const pt::ptree& sec, const std::string& name, const std::string& key) {
  auto v = text(sec, key);
  if (!v) throw config_error("[" + name + "] missing key '" + key + "'");
  return *v;
}

std::vector<double> numbers(const std::string& s, const std::string& where) {
  std::istringstream is(s);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw config_error(where + ": '" + tok + "' is not a number");
    }
  }
  return out;
}

double number(const pt::ptree& sec, const std::string& name, const std::string& key) {
  const auto v = numbers(need_text(sec, name, key), "[" + name + "] " + key);
  if (v.size() != 1) throw config_error("[" + name + "] " + key + " expects one number");
  return v[0];
}

double number_or(const pt::ptree& sec, const std::string& name, const std::string& key, double fallback) {
  return text(sec, key) ? number(sec, name, key) : fallback;
}

std::vector<double> vec(const pt::ptree& sec, const std::string& name, const std::string& key, std::size_t n) {
  auto v = numbers(need_text(sec, name, key), "[" + name + "] " + key);
  if (n && v.size() != n)
    throw config_error("[" + name + "] " + key + " expects " + std::to_string(n) + " numbers");
  return v;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

template <class E>
E choose(const std::string& value, std::initializer_list<std::pair<const char*, E>> options, const std::string& where) {
  for (const auto& [k, v] : options)
    if (value == k) return v;
  throw config_error(where + ": unknown value '" + value + "'");
}

ReachSpec parse_reach(const pt::ptree& sec, const std::string& name, BlockModel model) {
  if (model == BlockModel::Quadcopter) throw config_error("[" + name + "] reachability needs a 2-state block");
  ReachSpec r;
  const auto center = text(sec, "center") ? vec(sec, name, "center", 2) : std::vector<double>{0.0, 0.0};
  const std::string kind = text(sec, "target").value_or("box");
  if (kind == "box") {
    const auto hw = vec(sec, name, "half_width", 2);
    r.target = hj::TargetSet::box({center[0], center[1]}, {hw[0], hw[1]});
  } else if (kind == "ellipse") {
    const auto p = vec(sec, name, "p", 4);
    try {
      r.target = hj::TargetSet::ellipse({center[0], center[1]}, linalg::DenseMatrix{{p[0], p[1]}, {p[2], p[3]}},
                                        number(sec, name, "level"));
    } catch (const Error& e) {
      throw config_error("[" + name + "] " + e.what());
    }
  } else {
    throw config_error("[" + name + "] target must be box or ellipse");
  }
  r.grid_n = static_cast<std::size_t>(number_or(sec, name, "grid", 101));
  if (r.grid_n < 3) throw config_error("[" + name + "] grid needs at least 3 nodes");
  const std::string hor = need_text(sec, name, "horizon");
  if (hor == "converge") {
    r.horizon.reset();
  } else {
    r.horizon = number(sec, name, "horizon");
    if (!(*r.horizon < 0.0)) throw config_error("[" + name + "] horizon must be negative or 'converge'");
  }
  r.game = choose<hj::GameMode>(text(sec, "game").value_or("control_minimizes"),
                                {{"control_minimizes", hj::GameMode::ControlMinimizes}, {"literal", hj::GameMode::Literal}},
                                "[" + name + "] game");
  r.set = choose<hj::SetMode>(text(sec, "set").value_or("invariance"),
                              {{"reach", hj::SetMode::Reach}, {"invariance", hj::SetMode::Invariance}}, "[" + name + "] set");
  r.dynamics.axis = model == BlockModel::QuadrupedY ? plants::QuadrupedAxis::Horizontal : plants::QuadrupedAxis::Vertical;
  r.dynamics.delta_m = number(sec, name, "delta_m");
  const auto force = vec(sec, name, "force", 2);
  r.dynamics.force_lo = force[0];
  r.dynamics.force_hi = force[1];
  if (text(sec, "external_force")) {
    const auto ext = vec(sec, name, "external_force", 2);
    r.dynamics.ext_force_lo = ext[0];
    r.dynamics.ext_force_hi = ext[1];
  }
  return r;
}

linalg::DenseMatrix diag_of(const std::vector<double>& v) { return linalg::DenseMatrix::diag(v); }

}  // namespace

const char* to_string(ControllerMode m) { return m == ControllerMode::Nominal ? "nominal" : "robust"; }

std::vector<std::size_t> ClfBlock::state_indices() const {
  switch (model) {
    case BlockModel::Quadcopter: return {0, 1, 2, 3, 4, 5};
    case BlockModel::QuadrupedY: return {0, 3};
    case BlockModel::QuadrupedZ: return {1, 4};
  }
  return {};
}

std::vector<std::size_t> ClfBlock::input_indices() const {
  switch (model) {
    case BlockModel::Quadcopter: return {0, 1};
    case BlockModel::QuadrupedY: return {0, 1};
    case BlockModel::QuadrupedZ: return {2, 3};
  }
  return {};
}

const ClfBlock& Scenario::block(const std::string& n) const {
  for (const auto& b : blocks)
    if (b.name == n) return b;
  throw config_error("no block named '" + n + "'");
}

Scenario parse_scenario(std::istream& is) {
  pt::ptree root;
  try {
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    throw config_error(e.what());
  }
  Scenario s;
  try {
    const auto& sc = section(root, "scenario");
    s.name = need_text(sc, "scenario", "name");
    s.plant = choose<PlantKind>(need_text(sc, "scenario", "plant"),
                                {{"quadcopter", PlantKind::Quadcopter}, {"quadruped", PlantKind::Quadruped}},
                                "[scenario] plant");
    s.mode = choose<ControllerMode>(text(sc, "mode").value_or("robust"),
                                    {{"nominal", ControllerMode::Nominal}, {"robust", ControllerMode::Robust}},
                                    "[scenario] mode");
    s.sim.duration = number(sc, "scenario", "duration");
    s.sim.dt = number_or(sc, "scenario", "dt", 0.001);
    s.seed = static_cast<std::uint64_t>(number_or(sc, "scenario", "seed", 0));
    s.monitor = need_text(sc, "scenario", "monitor");

    std::size_t nx = 6, nu = 2;
    if (s.plant == PlantKind::Quadcopter) {
      const auto& q = section(root, "quadcopter");
      s.quadcopter.m = number(q, "quadcopter", "mass");
      s.quadcopter.l = number(q, "quadcopter", "arm_length");
      s.quadcopter.i_xx = number(q, "quadcopter", "inertia");
      s.quadcopter.g = number(q, "quadcopter", "gravity");
      const auto& f = section(root, "figure8");
      s.figure8.timing.end_time = number(f, "figure8", "period");
      s.figure8.amplitude = number(f, "figure8", "amplitude");
    } else {
      nu = 4;
      const auto& q = section(root, "quadruped");
      auto& p = s.quadruped;
      p.m = number(q, "quadruped", "mass");
      p.i_xx = number(q, "quadruped", "inertia");
      p.g = number(q, "quadruped", "gravity");
      p.leg_len = number(q, "quadruped", "leg_length");
      p.friction_coeff = number(q, "quadruped", "friction");
      p.delta_m = number(q, "quadruped", "delta_m");
      p.step_time = number(q, "quadruped", "step_time");
      p.z_ref = number(q, "quadruped", "height");
      p.v_ref = number(q, "quadruped", "velocity");
      p.foot_offset = number_or(q, "quadruped", "foot_offset", p.foot_offset);
      p.pitch_kp = number_or(q, "quadruped", "pitch_kp", p.pitch_kp);
      p.pitch_kd = number_or(q, "quadruped", "pitch_kd", p.pitch_kd);
      p.horizontal_bias = choose<plants::HorizontalBias>(
          text(q, "horizontal_bias").value_or("mu"),
          {{"mu", plants::HorizontalBias::Mu}, {"mu_g", plants::HorizontalBias::MuG}, {"zero", plants::HorizontalBias::Zero}},
          "[quadruped] horizontal_bias");
    }

    const auto& m = section(root, "mpc");
    s.mpc.q = diag_of(vec(m, "mpc", "q", nx));
    s.mpc.r = diag_of(vec(m, "mpc", "r", nu));
    s.mpc.dt = number(m, "mpc", "dt");
    s.mpc.horizon = static_cast<int>(number(m, "mpc", "horizon"));
    if (text(m, "u_lo") || text(m, "u_hi"))
      s.mpc.u_bounds = mpc::Box{vec(m, "mpc", "u_lo", nu), vec(m, "mpc", "u_hi", nu)};
    if (text(m, "x_lo") || text(m, "x_hi"))
      s.mpc.x_bounds = mpc::Box{vec(m, "mpc", "x_lo", nx), vec(m, "mpc", "x_hi", nx)};

    for (const auto& name : words(need_text(sc, "scenario", "blocks"))) {
      const std::string sec_name = "clf_" + name;
      const auto& c = section(root, sec_name);
      ClfBlock b;
      b.name = name;
      b.model = choose<BlockModel>(need_text(c, sec_name, "model"),
                                   {{"quadcopter", BlockModel::Quadcopter},
                                    {"quadruped_y", BlockModel::QuadrupedY},
                                    {"quadruped_z", BlockModel::QuadrupedZ}},
                                   "[" + sec_name + "] model");
      if ((b.model == BlockModel::Quadcopter) != (s.plant == PlantKind::Quadcopter))
        throw config_error("[" + sec_name + "] model does not match the plant");
      const std::size_t bn = b.state_indices().size(), bm = b.input_indices().size();
      b.params.q = diag_of(vec(c, sec_name, "q", bn));
      b.params.r = diag_of(vec(c, sec_name, "r", bm));
      b.params.mu = number(c, sec_name, "mu");
      b.params.lambda = number(c, sec_name, "lambda");
      try {
        b.params.validate();
      } catch (const Error& e) {
        throw config_error("[" + sec_name + "] " + e.what());
      }
      if (text(c, "w_max")) b.w_max = number(c, sec_name, "w_max");
      const std::string reach_name = "reach_" + name;
      if (root.find(reach_name) != root.not_found()) b.reach = parse_reach(section(root, reach_name), reach_name, b.model);
      if (!b.w_max && !b.reach) throw config_error("[" + sec_name + "] needs w_max or a [" + reach_name + "] section");
      s.blocks.push_back(std::move(b));
    }
    s.block(s.monitor);

    const auto& d = section(root, "disturbance");
    s.disturbance.kind = choose<plants::DisturbanceKind>(
        need_text(d, "disturbance", "kind"),
        {{"constant", plants::DisturbanceKind::ConstantWorstCase},
         {"sinusoidal", plants::DisturbanceKind::Sinusoidal},
         {"uniform", plants::DisturbanceKind::UniformRandom}},
        "[disturbance] kind");
    s.disturbance.amplitude = vec(d, "disturbance", "amplitude", 2);
    s.disturbance.frequency = number_or(d, "disturbance", "frequency", s.disturbance.frequency);
    s.disturbance.onset = number_or(d, "disturbance", "onset", 0.0);
    s.disturbance.seed = s.seed;

    if (root.find("wmax") != root.not_found()) {
      const auto& w = section(root, "wmax");
      s.wmax.w_hi = number_or(w, "wmax", "w_hi", s.wmax.w_hi);
      s.wmax.tol = number_or(w, "wmax", "tol", s.wmax.tol);
      s.wmax.containment.samples = static_cast<std::size_t>(number_or(w, "wmax", "samples", 720));
    }
    s.mpc.validate(nx, nu);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw config_error(e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open " + path);
  return parse_scenario(in);
}

clf::LinearModel block_model(const Scenario& s, const ClfBlock& b) {
  switch (b.model) {
    case BlockModel::Quadcopter: return plants::quadcopter_linearize(s.quadcopter);
    case BlockModel::QuadrupedY: return plants::quadruped_linear_subsystems(s.quadruped).first;
    case BlockModel::QuadrupedZ: return plants::quadruped_linear_subsystems(s.quadruped).second;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown block model");
}

std::vector<BlockCertificate> synthesize_blocks(const Scenario& s) {
  std::vector<BlockCertificate> out;
  for (const auto& b : s.blocks) {
    auto syn = clf::synthesize(block_model(s, b), b.params);
    if (!syn.certificate)
      throw Error(ErrorCode::Infeasible, "block '" + b.name + "': " + lmi::to_string(syn.sdp.status));
    auto cert = *syn.certificate;
    out.push_back({b.name, std::move(syn), std::move(cert)});
  }
  return out;
}

ReachOutcome solve_reach(const ClfBlock& b, const plants::QuadrupedParams& params) {
  if (!b.reach) throw Error(ErrorCode::InvalidArgument, "block '" + b.name + "' has no reach spec");
  const auto& r = *b.reach;
  const auto dyn = plants::quadruped_error_dynamics(params, r.dynamics);
  const auto grid = hj::default_grid(r.target, r.grid_n);
  hj::BrsOptions opts;
  opts.game = r.game;
  opts.set = r.set;
  if (r.horizon) opts.horizon = *r.horizon;
  else opts.converge = true;
  auto brs = hj::solve_brs(grid, r.target, dyn, opts);
  auto safe = hj::safe_set(brs.value, r.target);
  return {b.name, std::move(brs), std::move(safe)};
}

WmaxOutcome certify_block(const Scenario& s, const ClfBlock& b, clf::ClfCertificate& cert) {
  WmaxOutcome out;
  out.block = b.name;
  if (b.w_max) {
    cert.set_w_max(*b.w_max);
    out.result.w_max = *b.w_max;
    out.result.level = cert.roa_level;
    return out;
  }
  out.reach = solve_reach(b, s.quadruped);
  out.result = roa::find_wmax(cert, out.reach->brs.value, b.reach->target, s.wmax);
  return out;
}

RunResult run_scenario(const Scenario& s, ControllerMode mode) {
  RunResult r;
  r.certificates = synthesize_blocks(s);
  for (std::size_t i = 0; i < s.blocks.size(); ++i)
    r.bounds.push_back(certify_block(s, s.blocks[i], r.certificates[i].certificate));

  std::unique_ptr<plants::Plant> plant;
  if (s.plant == PlantKind::Quadcopter) plant = std::make_unique<plants::QuadcopterPlant>(s.quadcopter, s.figure8);
  else plant = std::make_unique<plants::QuadrupedPlant>(s.quadruped);

  plants::ControllerSpec ctl;
  ctl.mpc = s.mpc;
  ctl.robust = mode == ControllerMode::Robust;
  for (std::size_t i = 0; i < s.blocks.size(); ++i)
    ctl.ancillary.push_back({r.certificates[i].certificate.k, s.blocks[i].state_indices(), s.blocks[i].input_indices()});

  for (std::size_t i = 0; i < s.blocks.size(); ++i) {
    if (s.blocks[i].name != s.monitor) continue;
    const auto& c = r.certificates[i].certificate;
    r.monitor = {c.p, s.blocks[i].state_indices(), c.roa_level};
  }
  r.sim = plants::simulate_closed_loop(*plant, ctl, s.disturbance, r.monitor, s.sim);
  return r;
}

void write_certificate(std::ostream& os, const std::string& block, const clf::ClfCertificate& c) {
  os << std::setprecision(17) << "robustroa-certificate 1\n"
     << "block " << block << '\n'
     << "lambda " << c.params.lambda << '\n'
     << "mu " << c.params.mu << '\n';
  if (c.w_max) os << "w_max " << *c.w_max << '\n';
  else os << "w_max none\n";
  os << "roa_level " << c.roa_level << '\n';
  auto mat = [&](const char* tag, const linalg::DenseMatrix& m) {
    os << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
      os << '\n';
    }
  };
  mat("K", c.k);
  mat("P", c.p);
  mat("Q", c.params.q);
  mat("R", c.params.r);
}

clf::ClfCertificate read_certificate(std::istream& is, std::string* block) {
  auto fail = [](const std::string& what) { return config_error("certificate: " + what); };
  std::string key, value;
  int version = 0;
  if (!(is >> key >> version) || key != "robustroa-certificate" || version != 1) throw fail("bad header");
  clf::ClfCertificate c;
  std::string name;
  if (!(is >> key >> name) || key != "block") throw fail("missing block");
  if (!(is >> key >> c.params.lambda) || key != "lambda") throw fail("missing lambda");
  if (!(is >> key >> c.params.mu) || key != "mu") throw fail("missing mu");
  if (!(is >> key >> value) || key != "w_max") throw fail("missing w_max");
  if (value != "none") {
    try {
      c.w_max = std::stod(value);
    } catch (const std::exception&) {
      throw fail("bad w_max");
    }
  }
  if (!(is >> key >> c.roa_level) || key != "roa_level") throw fail("missing roa_level");
  auto mat = [&](const char* tag) {
    std::size_t r = 0, cc = 0;
    if (!(is >> key >> r >> cc) || key != tag) throw fail(std::string("missing ") + tag);
    linalg::DenseMatrix m(r, cc);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < cc; ++j)
        if (!(is >> m(i, j))) throw fail(std::string("truncated ") + tag);
    return m;
  };
  c.k = mat("K");
  c.p = mat("P");
  c.params.q = mat("Q");
  c.params.r = mat("R");
  if (block) *block = name;
  return c;
}

std::string format_metrics(const Scenario& s, ControllerMode mode, const RunResult& r) {
  std::ostringstream os;
  os << std::setprecision(6);
  const auto& m = r.sim.metrics;
  const auto& names = r.sim.trajectory.state_names;
  os << "scenario: " << s.name << '\n' << "mode: " << to_string(mode) << '\n';
  for (const auto& b : r.bounds) {
    os << "block " << b.block << ": w_max=" << b.result.w_max << " roa_level=" << b.result.level;
    if (b.reach) os << " safe_cells=" << b.reach->safe.count() << " margin=" << b.result.margin;
    os << '\n';
  }
  os << "monitor: " << s.monitor << '\n'
     << "roa_level: " << r.monitor.level << '\n'
     << "max_E: "
     << (r.sim.trajectory.lyapunov.empty()
             ? 0.0
             : *std::max_element(r.sim.trajectory.lyapunov.begin(), r.sim.trajectory.lyapunov.end()))
     << '\n'
     << "invariant_exits: " << m.invariant_exits << '\n'
     << "entered: " << (m.entered ? "true" : "false") << '\n'
     << "diverged: " << (m.diverged ? "true" : "false") << '\n';
  if (m.diverged) os << "diverged_at: " << m.diverged_at << '\n';
  os << "mpc_regularized: " << (m.mpc_regularized ? "true" : "false") << '\n'
     << "state_violation: " << (m.state_violation ? "true" : "false") << '\n';
  os << "rms_error:";
  for (std::size_t i = 0; i < names.size(); ++i) os << ' ' << names[i] << '=' << m.rms_error[i];
  os << "\nmax_abs_error:";
  for (std::size_t i = 0; i < names.size(); ++i) os << ' ' << names[i] << '=' << m.max_abs_error[i];
  os << '\n';
  return os.str();
}

std::string render_figure(const Scenario& s, const std::vector<ModeRun>& runs) {
  if (runs.empty()) throw Error(ErrorCode::InvalidArgument, "render_figure: no runs");
  auto color = [](ControllerMode m) { return m == ControllerMode::Robust ? std::string("#000000") : std::string("#999999"); };
  const auto& first = runs.front().result->sim.trajectory;
  const auto& names = first.state_names;
  std::vector<svg::Plot> panels;

  auto column = [](const std::vector<plants::Vector>& rows, std::size_t i) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[i]);
    return out;
  };

  svg::Plot traj;
  if (s.plant == PlantKind::Quadcopter) {
    traj.title = s.name + ": figure-8 tracking";
    traj.x_label = "y [m]";
    traj.y_label = "z [m]";
    traj.series.push_back({"reference", column(first.references, 0), column(first.references, 1), "#1f77b4", true});
    for (const auto& r : runs) {
      const auto& t = r.result->sim.trajectory;
      traj.series.push_back({to_string(r.mode), column(t.states, 0), column(t.states, 1), color(r.mode), false});
    }
  } else {
    const std::size_t axis = s.block(s.monitor).state_indices()[s.block(s.monitor).model == BlockModel::QuadrupedY ? 1 : 0];
    traj.title = s.name + ": " + names[axis] + " tracking";
    traj.x_label = "t [s]";
    traj.y_label = names[axis];
    traj.series.push_back({"reference", first.times, column(first.references, axis), "#1f77b4", true});
    for (const auto& r : runs) {
      const auto& t = r.result->sim.trajectory;
      traj.series.push_back({to_string(r.mode), t.times, column(t.states, axis), color(r.mode), false});
    }
  }
  panels.push_back(std::move(traj));

  const auto& mon = runs.front().result->monitor;
  const auto pinv = linalg::inverse(mon.p);
  const std::size_t n_band = s.plant == PlantKind::Quadcopter ? 2 : mon.state_indices.size();
  for (std::size_t k = 0; k < n_band; ++k) {
    const std::size_t i = mon.state_indices[k];
    const double band = std::sqrt(mon.level * pinv(k, k));
    svg::Plot err;
    err.title = "error in " + names[i] + " with invariant band";
    err.x_label = "t [s]";
    err.y_label = "e_" + names[i];
    const double t_end = first.times.empty() ? 0.0 : first.times.back();
    err.series.push_back({"invariant band", {0.0, t_end}, {band, band}, "#d62728", true});
    err.series.push_back({"", {0.0, t_end}, {-band, -band}, "#d62728", true});
    for (const auto& r : runs) {
      const auto& t = r.result->sim.trajectory;
      std::vector<double> e(t.size());
      for (std::size_t j = 0; j < t.size(); ++j) e[j] = t.states[j][i] - t.references[j][i];
      err.series.push_back({to_string(r.mode), t.times, std::move(e), color(r.mode), false});
    }
    // Keep the band visible even when a run blows up.
    err.y_lo = -3.0 * band;
    err.y_hi = 3.0 * band;
    err.x_lo = 0.0;
    err.x_hi = t_end;
    panels.push_back(std::move(err));
  }
  return svg::render(panels);
}

}  // namespace robustroa::harness
