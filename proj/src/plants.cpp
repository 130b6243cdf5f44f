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

#include "robustroa/plants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "robustroa/error.hpp"

namespace robustroa::plants {

namespace {

void require_size(const Vector& v, std::size_t n, const char* what) {
  if (v.size() != n) throw Error(ErrorCode::DimensionMismatch, what);
}

bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Derivatives of h(τ(t)) from those of h in τ and of τ in t (Faà di Bruno,
/// up to fourth order).
Jet compose(const Jet& h, const std::array<double, 5>& tau) {
  const double t1 = tau[1], t2 = tau[2], t3 = tau[3], t4 = tau[4];
  return {
      h[0],
      h[1] * t1,
      h[2] * t1 * t1 + h[1] * t2,
      h[3] * t1 * t1 * t1 + 3.0 * h[2] * t1 * t2 + h[1] * t3,
      h[4] * t1 * t1 * t1 * t1 + 6.0 * h[3] * t1 * t1 * t2 +
          h[2] * (3.0 * t2 * t2 + 4.0 * t1 * t3) + h[1] * t4,
  };
}

}  // namespace

// --- quadcopter -------------------------------------------------------------

void QuadcopterParams::validate() const {
  if (!(m > 0 && l > 0 && i_xx > 0 && g > 0))
    throw Error(ErrorCode::InvalidArgument, "quadcopter parameters must be positive");
}

Vector quadcopter_f(const Vector& x, const Vector& u, const Vector& w, const QuadcopterParams& p) {
  require_size(x, 6, "quadcopter state");
  require_size(u, 2, "quadcopter input");
  require_size(w, 2, "quadcopter disturbance");
  const double phi = x[2];
  return {
      x[3],
      x[4],
      x[5],
      -u[0] * std::sin(phi) / p.m + w[0],
      u[0] * std::cos(phi) / p.m - p.g + w[1],
      0.5 * p.l * u[1] / p.i_xx,
  };
}

clf::LinearModel quadcopter_linearize(const QuadcopterParams& p) {
  clf::LinearModel lm{DenseMatrix(6, 6), DenseMatrix(6, 2), DenseMatrix(6, 2), DenseMatrix(6, 1)};
  lm.a(0, 3) = lm.a(1, 4) = lm.a(2, 5) = 1.0;
  lm.a(3, 2) = -p.g;
  lm.b(4, 0) = 1.0 / p.m;
  lm.b(5, 1) = 0.5 * p.l / p.i_xx;
  lm.b_w(3, 0) = lm.b_w(4, 1) = 1.0;
  lm.g(4, 0) = -p.g;
  return lm;
}

std::array<double, 6> QuinticTiming::coefficients() const {
  const double t = end_time;
  return {0.0, 0.0, 0.0, 10.0 / (t * t), -15.0 / (t * t * t), 6.0 / (t * t * t * t)};
}

std::array<double, 5> QuinticTiming::evaluate(double t) const {
  const auto c = coefficients();
  std::array<double, 5> out{};
  // Differentiate the polynomial term by term.
  for (int d = 0; d <= 4; ++d) {
    double acc = 0.0;
    for (int k = d; k <= 5; ++k) {
      double fall = 1.0;
      for (int j = 0; j < d; ++j) fall *= k - j;
      acc += c[k] * fall * std::pow(t, k - d);
    }
    out[d] = acc;
  }
  return out;
}

Figure8Sample Figure8Reference::evaluate(double t) const {
  if (t < 0.0 || t > timing.end_time)
    throw Error(ErrorCode::OutOfRange, "figure-8 time " + std::to_string(t));
  const auto tau = timing.evaluate(t);
  const double a = amplitude, s2 = std::sin(2 * tau[0]), c2 = std::cos(2 * tau[0]);
  const double s1 = std::sin(tau[0]), c1 = std::cos(tau[0]);
  const Jet hy{a * s2, 2 * a * c2, -4 * a * s2, -8 * a * c2, 16 * a * s2};
  const Jet hz{a * c1, -a * s1, -a * c1, a * s1, a * c1};
  return {compose(hy, tau), compose(hz, tau)};
}

FlatState quadcopter_flat_state(const Figure8Sample& s, const QuadcopterParams& p) {
  const double ay = -s.y[2], az = s.z[2] + p.g;
  const double day = -s.y[3], daz = s.z[3];
  const double dday = -s.y[4], ddaz = s.z[4];
  const double den = ay * ay + az * az;
  const double num = az * day - ay * daz;
  const double dnum = az * dday - ay * ddaz;
  const double dden = 2.0 * (ay * day + az * daz);
  const double phi = std::atan2(ay, az);
  const double phi_dot = num / den;
  const double phi_ddot = (dnum * den - num * dden) / (den * den);
  return {
      {s.y[0], s.z[0], phi, s.y[1], s.z[1], phi_dot},
      {p.m * std::sqrt(den), 2.0 * p.i_xx * phi_ddot / p.l},
  };
}

// --- quadruped --------------------------------------------------------------

double QuadrupedParams::bias_accel() const {
  switch (horizontal_bias) {
    case HorizontalBias::Mu: return friction_coeff;
    case HorizontalBias::MuG: return friction_coeff * g;
    case HorizontalBias::Zero: return 0.0;
  }
  return 0.0;
}

void QuadrupedParams::validate() const {
  if (!(m > 0)) throw Error(ErrorCode::InvalidArgument, "quadruped mass must be positive");
  if (!(delta_m >= 0)) throw Error(ErrorCode::InvalidArgument, "delta_m must be non-negative");
  if (!(i_xx > 0 && g > 0 && step_time > 0 && friction_coeff > 0))
    throw Error(ErrorCode::InvalidArgument, "quadruped parameters must be positive");
}

std::array<double, 2> StanceState::lever(const Vector& x, const std::array<double, 2>& foot) {
  return {x[0] - foot[0], x[1] - foot[1]};
}

Vector quadruped_f(const Vector& x, const StanceState& stance, const QuadrupedLoad& load,
                   const QuadrupedParams& p) {
  require_size(x, 6, "quadruped state");
  const double tol = 1e-9;
  for (const auto* f : {&stance.force_front, &stance.force_rear}) {
    if ((*f)[1] < -tol) throw Error(ErrorCode::ContactViolation, "negative vertical force");
    if (std::abs((*f)[0]) > p.friction_coeff * (*f)[1] + tol)
      throw Error(ErrorCode::ContactViolation, "friction cone violated");
  }
  const double mass = p.m + load.added_mass;
  const auto rf = StanceState::lever(x, stance.foot_front);
  const auto rr = StanceState::lever(x, stance.foot_rear);
  const auto& ff = stance.force_front;
  const auto& fr = stance.force_rear;
  const double torque = (rf[0] * ff[1] - rf[1] * ff[0]) + (rr[0] * fr[1] - rr[1] * fr[0]);
  return {
      x[3],
      x[4],
      x[5],
      (ff[0] + fr[0] + load.external_force_y) / mass + p.bias_accel(),
      (ff[1] + fr[1]) / mass - p.g,
      torque / p.i_xx,
  };
}

std::pair<clf::LinearModel, clf::LinearModel> quadruped_linear_subsystems(
    const QuadrupedParams& p) {
  auto make = [&](double g_entry) {
    clf::LinearModel lm{DenseMatrix(2, 2), DenseMatrix(2, 2), DenseMatrix(2, 1), DenseMatrix(2, 1)};
    lm.a(0, 1) = 1.0;
    lm.b(1, 0) = lm.b(1, 1) = 1.0 / p.m;
    lm.b_w(1, 0) = 1.0;
    lm.g(1, 0) = g_entry;
    return lm;
  };
  return {make(p.bias_accel()), make(-p.g)};
}

hj::AffineDynamics2 quadruped_error_dynamics(const QuadrupedParams& p, const QuadrupedReachConfig& cfg) {
  p.validate();
  if (!(cfg.delta_m >= 0.0)) throw Error(ErrorCode::InvalidArgument, "mass uncertainty must be non-negative");
  if (!(cfg.force_lo < cfg.force_hi)) throw Error(ErrorCode::InvalidArgument, "force bounds inverted");
  if (!(cfg.ext_force_lo <= cfg.ext_force_hi)) throw Error(ErrorCode::InvalidArgument, "external force bounds inverted");
  const double bias = cfg.axis == QuadrupedAxis::Vertical ? -p.g : p.bias_accel();
  const bool external = cfg.ext_force_lo != 0.0 || cfg.ext_force_hi != 0.0;
  hj::AffineDynamics2 dyn;
  dyn.u_lo = {cfg.force_lo};
  dyn.u_hi = {cfg.force_hi};
  if (external) {
    dyn.w_lo = {cfg.ext_force_lo};
    dyn.w_hi = {cfg.ext_force_hi};
  }
  std::vector<double> masses{p.m};
  if (cfg.delta_m > 0.0) masses.push_back(p.m + cfg.delta_m);
  for (double mass : masses) {
    dyn.scenarios.push_back([mass, bias, external](const hj::Point2& e) {
      hj::AffineTerms t;
      t.drift = {e[1], bias};
      t.g = {{0.0, 1.0 / mass}};
      if (external) t.d = {{0.0, 1.0 / mass}};
      return t;
    });
  }
  return dyn;
}

std::array<double, 2> project_to_friction_cone(std::array<double, 2> f, double mu) {
  f[1] = std::max(f[1], 0.0);
  f[0] = std::clamp(f[0], -mu * f[1], mu * f[1]);
  return f;
}

// --- shared -----------------------------------------------------------------

Vector robust_control(const Vector& u_bar, const Vector& x, const Vector& x_bar,
                      const DenseMatrix& k) {
  require_size(x, k.cols(), "robust_control state");
  require_size(x_bar, k.cols(), "robust_control reference");
  require_size(u_bar, k.rows(), "robust_control input");
  Vector e(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) e[i] = x[i] - x_bar[i];
  Vector u = k * e;
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += u_bar[i];
  return u;
}

Vector rk4_step(const StateDerivative& f, const Vector& x, const Vector& u, const Vector& w,
                double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "rk4 dt must be positive");
  const std::size_t n = x.size();
  auto axpy = [n](const Vector& base, const Vector& d, double h) {
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = base[i] + h * d[i];
    return out;
  };
  const Vector k1 = f(x, u, w);
  const Vector k2 = f(axpy(x, k1, 0.5 * dt), u, w);
  const Vector k3 = f(axpy(x, k2, 0.5 * dt), u, w);
  const Vector k4 = f(axpy(x, k3, dt), u, w);
  Vector next(n);
  for (std::size_t i = 0; i < n; ++i)
    next[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  if (!all_finite(next)) throw Error(ErrorCode::NonFinite, "rk4 produced a non-finite state");
  return next;
}

Vector DisturbancePolicy::sample(double t, std::mt19937_64& rng) const {
  Vector w(amplitude.size(), 0.0);
  if (t < onset) return w;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    switch (kind) {
      case DisturbanceKind::ConstantWorstCase: w[i] = amplitude[i]; break;
      case DisturbanceKind::Sinusoidal:
        w[i] = amplitude[i] * std::sin(2.0 * std::numbers::pi * frequency * (t - onset));
        break;
      case DisturbanceKind::UniformRandom: w[i] = amplitude[i] * unit(rng); break;
    }
  }
  return w;
}

double LyapunovMonitor::value(const Vector& x, const Vector& x_ref) const {
  Vector e(state_indices.size());
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = x[state_indices[i]] - x_ref[state_indices[i]];
  return linalg::dot(e, p * e);
}

// --- plants -----------------------------------------------------------------

QuadcopterPlant::QuadcopterPlant(QuadcopterParams params, Figure8Reference ref)
    : params_(params), ref_(ref) {
  params_.validate();
}

std::vector<std::string> QuadcopterPlant::state_names() const {
  return {"y", "z", "phi", "vy", "vz", "vphi"};
}

Vector QuadcopterPlant::initial_state() const { return reference(0.0).x; }

FlatState QuadcopterPlant::reference(double t) const {
  const double tc = std::clamp(t, 0.0, ref_.timing.end_time);
  return quadcopter_flat_state(ref_.evaluate(tc), params_);
}

mpc::DynamicsHandle QuadcopterPlant::controller_model() const {
  const QuadcopterParams p = params_;
  return {6, 2, [p](const Vector& x, const Vector& u) { return quadcopter_f(x, u, {0.0, 0.0}, p); }};
}

Vector QuadcopterPlant::dynamics(const Vector& x, const Vector& u, const Vector& w) const {
  return quadcopter_f(x, u, w, params_);
}

QuadrupedPlant::QuadrupedPlant(QuadrupedParams params) : params_(params) { params_.validate(); }

std::vector<std::string> QuadrupedPlant::state_names() const {
  return {"y", "z", "phi", "vy", "vz", "vphi"};
}

Vector QuadrupedPlant::initial_state() const { return reference(0.0).x; }

FlatState QuadrupedPlant::reference(double t) const {
  const auto& p = params_;
  const double fy = -0.5 * p.m * p.bias_accel();
  const double fz = 0.5 * p.m * p.g;
  return {{p.v_ref * t, p.z_ref, 0.0, p.v_ref, 0.0, 0.0}, {fy, fy, fz, fz}};
}

mpc::DynamicsHandle QuadrupedPlant::controller_model() const {
  const QuadrupedParams p = params_;
  const StanceState geometry = stance_;
  return {6, 4, [p, geometry](const Vector& x, const Vector& u) {
            StanceState s = geometry;
            s.force_front = {u[0], u[2]};
            s.force_rear = {u[1], u[3]};
            // The model is evaluated away from the cone during linearization.
            const double mass = p.m;
            const auto rf = StanceState::lever(x, s.foot_front);
            const auto rr = StanceState::lever(x, s.foot_rear);
            const double torque = (rf[0] * u[2] - rf[1] * u[0]) + (rr[0] * u[3] - rr[1] * u[1]);
            return Vector{x[3], x[4], x[5], (u[0] + u[1]) / mass + p.bias_accel(),
                          (u[2] + u[3]) / mass - p.g, torque / p.i_xx};
          }};
}

void QuadrupedPlant::begin_step(double t, const Vector& x) {
  const long phase = static_cast<long>(std::floor(t / params_.step_time + 1e-9));
  if (phase == phase_) return;
  phase_ = phase;
  stance_.active = (phase % 2 == 0) ? DiagonalPair::I : DiagonalPair::J;
  stance_.foot_front = {x[0] + params_.foot_offset, 0.0};
  stance_.foot_rear = {x[0] - params_.foot_offset, 0.0};
}

Vector QuadrupedPlant::actuate(const Vector& u_cmd, const Vector& x) const {
  // Keep the commanded horizontal and vertical totals; split the vertical
  // force between the stance feet so the pitch torque follows the PD law.
  const double torque = -params_.pitch_kp * x[2] - params_.pitch_kd * x[5];
  const double fy = u_cmd[0] + u_cmd[1];
  const double fz = u_cmd[2] + u_cmd[3];
  const auto rf = StanceState::lever(x, stance_.foot_front);
  const auto rr = StanceState::lever(x, stance_.foot_rear);
  const double fz_front = (torque + x[1] * fy - rr[0] * fz) / (rf[0] - rr[0]);
  const auto front = project_to_friction_cone({0.5 * fy, fz_front}, params_.friction_coeff);
  const auto rear = project_to_friction_cone({0.5 * fy, fz - fz_front}, params_.friction_coeff);
  return {front[0], rear[0], front[1], rear[1]};
}

Vector QuadrupedPlant::dynamics(const Vector& x, const Vector& u, const Vector& w) const {
  StanceState s = stance_;
  s.force_front = {u[0], u[2]};
  s.force_rear = {u[1], u[3]};
  const QuadrupedLoad load{std::clamp(w[0], 0.0, params_.delta_m), w[1]};
  return quadruped_f(x, s, load, params_);
}

// --- simulation -------------------------------------------------------------

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  const std::size_t n = states.empty() ? 0 : states.front().size();
  const std::size_t m = controls.empty() ? 0 : controls.front().size();
  const std::size_t p = disturbances.empty() ? 0 : disturbances.front().size();
  os << "t";
  for (std::size_t i = 0; i < n; ++i)
    os << ",x_" << (i < state_names.size() ? state_names[i] : std::to_string(i));
  for (std::size_t i = 0; i < n; ++i)
    os << ",xref_" << (i < state_names.size() ? state_names[i] : std::to_string(i));
  for (std::size_t i = 0; i < m; ++i) os << ",u" << i;
  for (std::size_t i = 0; i < p; ++i) os << ",w" << i;
  os << ",E,roa_level\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    os << times[k];
    for (double v : states[k]) os << ',' << v;
    for (double v : references[k]) os << ',' << v;
    for (double v : controls[k]) os << ',' << v;
    for (double v : disturbances[k]) os << ',' << v;
    os << ',' << lyapunov[k] << ',' << roa_level << '\n';
  }
  return os.str();
}

int count_invariant_exits(std::span<const double> lyapunov, double level) {
  int exits = 0;
  bool inside = false;
  bool entered = false;
  for (double e : lyapunov) {
    const bool now_inside = e <= level;
    if (now_inside) entered = true;
    if (entered && inside && !now_inside) ++exits;
    inside = now_inside;
  }
  return exits;
}

SimulationResult simulate_closed_loop(Plant& plant, const ControllerSpec& controller,
                                      const DisturbancePolicy& disturbance,
                                      const LyapunovMonitor& monitor,
                                      const SimulationOptions& options) {
  const std::size_t n = plant.num_states(), m = plant.num_inputs();
  const double dt_mpc = controller.mpc.dt;
  const double ratio_real = dt_mpc / options.dt;
  const long ratio = std::lround(ratio_real);
  if (!(options.dt > 0.0) || ratio < 1 || std::abs(ratio_real - static_cast<double>(ratio)) > 1e-9)
    throw Error(ErrorCode::InvalidArgument, "simulation dt must divide the MPC step");
  if (disturbance.amplitude.size() != plant.num_disturbances())
    throw Error(ErrorCode::DimensionMismatch, "disturbance channels");
  const std::size_t k = static_cast<std::size_t>(controller.mpc.horizon);
  const long steps = std::lround(options.duration / options.dt);

  SimulationResult out;
  auto& traj = out.trajectory;
  auto& met = out.metrics;
  traj.state_names = plant.state_names();
  traj.roa_level = monitor.level;

  std::mt19937_64 rng(disturbance.seed);
  const StateDerivative f = [&plant](const Vector& x, const Vector& u, const Vector& w) {
    return plant.dynamics(x, u, w);
  };

  Vector x = plant.initial_state();
  Vector du_mpc(m, 0.0);
  for (long step = 0; step <= steps; ++step) {
    const double t = static_cast<double>(step) * options.dt;
    plant.begin_step(t, x);
    const FlatState ref = plant.reference(t);

    if (step % ratio == 0) {
      std::vector<Vector> xr, ur;
      for (std::size_t i = 0; i <= k; ++i) {
        const FlatState ri = plant.reference(t + static_cast<double>(i) * dt_mpc);
        xr.push_back(ri.x);
        if (i < k) ur.push_back(ri.u);
      }
      const auto res = mpc::mpc_step(plant.controller_model(), x, xr, ur, controller.mpc);
      for (std::size_t c = 0; c < m; ++c) du_mpc[c] = res.u0[c] - ur[0][c];
      met.mpc_regularized = met.mpc_regularized || res.regularized;
      met.state_violation = met.state_violation || res.state_violation;
    }

    // The feedforward is held over the integration step; sampling it at the
    // midpoint keeps the hold error second order in dt.
    const double t_mid = std::min(t + 0.5 * options.dt, static_cast<double>(steps) * options.dt);
    Vector u_cmd = plant.reference(t_mid).u;
    for (std::size_t c = 0; c < m; ++c) u_cmd[c] += du_mpc[c];
    if (controller.robust) {
      for (const auto& blk : controller.ancillary) {
        for (std::size_t r = 0; r < blk.input_indices.size(); ++r) {
          double acc = 0.0;
          for (std::size_t c = 0; c < blk.state_indices.size(); ++c) {
            const std::size_t si = blk.state_indices[c];
            acc += blk.k(r, c) * (x[si] - ref.x[si]);
          }
          u_cmd[blk.input_indices[r]] += acc;
        }
      }
    }
    const Vector u = plant.actuate(u_cmd, x);
    const Vector w = disturbance.sample(t, rng);

    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.references.push_back(ref.x);
    traj.controls.push_back(u);
    traj.disturbances.push_back(w);
    traj.lyapunov.push_back(monitor.value(x, ref.x));

    if (step == steps) break;
    try {
      x = rk4_step(f, x, u, w, options.dt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFinite) throw;
      met.diverged = true;
    }
    if (met.diverged || linalg::norm_inf(x) > options.blowup) {
      met.diverged = true;
      met.diverged_at = t + options.dt;
      break;
    }
  }

  met.rms_error.assign(n, 0.0);
  met.max_abs_error.assign(n, 0.0);
  for (std::size_t s = 0; s < traj.size(); ++s)
    for (std::size_t i = 0; i < n; ++i) {
      const double e = traj.states[s][i] - traj.references[s][i];
      met.rms_error[i] += e * e;
      met.max_abs_error[i] = std::max(met.max_abs_error[i], std::abs(e));
    }
  for (double& v : met.rms_error) v = std::sqrt(v / static_cast<double>(std::max<std::size_t>(traj.size(), 1)));
  met.invariant_exits = count_invariant_exits(traj.lyapunov, monitor.level);
  met.entered = std::any_of(traj.lyapunov.begin(), traj.lyapunov.end(),
                            [&](double e) { return e <= monitor.level; });
  return out;
}

}  // namespace robustroa::plants
