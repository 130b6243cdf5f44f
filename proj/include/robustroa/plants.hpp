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

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "robustroa/clf.hpp"
#include "robustroa/hj.hpp"
#include "robustroa/matrix.hpp"
#include "robustroa/mpc.hpp"

namespace robustroa::plants {

using linalg::DenseMatrix;
using linalg::Vector;

// ---------------------------------------------------------------------------
// Planar quadcopter, state (y, z, φ, ẏ, ż, φ̇), input (u_s, u_d) where u_s is
// the thrust sum and u_d the thrust difference.

struct QuadcopterParams {
  double m = 1.0;
  double l = 0.2;
  double i_xx = 0.1;
  double g = 9.81;

  void validate() const;
};

Vector quadcopter_f(const Vector& x, const Vector& u, const Vector& w, const QuadcopterParams& p);

/// Small-angle model about hover; inputs are deviations (δu_s, δu_d).
clf::LinearModel quadcopter_linearize(const QuadcopterParams& p);

/// τ(t) = T·(10s³ - 15s⁴ + 6s⁵), s = t/T: zero velocity and acceleration at
/// both ends and τ(T) = T.
struct QuinticTiming {
  double end_time = 5.0;

  /// Polynomial coefficients in t, lowest degree first.
  std::array<double, 6> coefficients() const;
  /// τ and its first four derivatives.
  std::array<double, 5> evaluate(double t) const;
};

/// Position and its first four time derivatives along one axis.
using Jet = std::array<double, 5>;

struct Figure8Sample {
  Jet y;
  Jet z;
};

struct Figure8Reference {
  QuinticTiming timing;
  double amplitude = 0.5;

  /// y = A·sin(2τ), z = A·cos(τ). Throws OutOfRange outside [0, T].
  Figure8Sample evaluate(double t) const;
};

/// Full state and input along the figure 8 from differential flatness.
struct FlatState {
  Vector x;  // 6 states
  Vector u;  // (u_s, u_d), absolute
};
FlatState quadcopter_flat_state(const Figure8Sample& s, const QuadcopterParams& p);

// ---------------------------------------------------------------------------
// Planar quadruped as a point mass with pitch inertia, trotting on diagonal
// leg pairs. Input (Fy_front, Fy_rear, Fz_front, Fz_rear).

enum class HorizontalBias { Mu, MuG, Zero };

struct QuadrupedParams {
  double m = 12.454;
  double i_xx = 0.0565;
  double g = 9.81;
  double leg_len = 0.2;
  double friction_coeff = 0.6;
  double delta_m = 5.0;
  double step_time = 0.25;
  double z_ref = 0.32;
  double v_ref = 0.45;
  double foot_offset = 0.15;
  /// Stance-force allocation regulates pitch to zero with this PD law.
  double pitch_kp = 22.6;
  double pitch_kd = 2.26;
  HorizontalBias horizontal_bias = HorizontalBias::Mu;

  double bias_accel() const;
  void validate() const;
};

enum class DiagonalPair { I, J };

struct StanceState {
  DiagonalPair active = DiagonalPair::I;
  std::array<double, 2> foot_front{};  // world (y, z) of the active front foot
  std::array<double, 2> foot_rear{};
  std::array<double, 2> force_front{};  // (F_y, F_z)
  std::array<double, 2> force_rear{};

  /// Vector from a foot to the centre of mass.
  static std::array<double, 2> lever(const Vector& x, const std::array<double, 2>& foot);
};

/// Extra mass carried by the torso and a horizontal external force on the COM.
struct QuadrupedLoad {
  double added_mass = 0.0;
  double external_force_y = 0.0;
};

/// Throws ContactViolation for a negative vertical force or a friction-cone
/// violation.
Vector quadruped_f(const Vector& x, const StanceState& stance, const QuadrupedLoad& load,
                   const QuadrupedParams& p);

/// (y, ẏ) and (z, ż) subsystems with nominal mass.
std::pair<clf::LinearModel, clf::LinearModel> quadruped_linear_subsystems(
    const QuadrupedParams& p);

enum class QuadrupedAxis { Horizontal, Vertical };

/// Tracking-error dynamics of one translational channel for reachability:
/// ė₁ = e₂, ė₂ = (F + f_ext)/(m + θ) + G with θ ∈ {0, Δm} chosen by the
/// adversary, F the total stance force on that axis and G the bias (vertical:
/// -g, horizontal: the configured bias).
struct QuadrupedReachConfig {
  QuadrupedAxis axis = QuadrupedAxis::Vertical;
  double delta_m = 5.0;
  double force_lo = 0.0;
  double force_hi = 200.0;
  double ext_force_lo = 0.0;
  double ext_force_hi = 0.0;
};

/// Throws InvalidArgument.
hj::AffineDynamics2 quadruped_error_dynamics(const QuadrupedParams& p, const QuadrupedReachConfig& cfg);

/// Projects a leg force into the friction cone with non-negative normal force.
std::array<double, 2> project_to_friction_cone(std::array<double, 2> f, double mu);

// ---------------------------------------------------------------------------

/// u = ū + K(x - x̄)
Vector robust_control(const Vector& u_bar, const Vector& x, const Vector& x_bar,
                      const DenseMatrix& k);

using StateDerivative =
    std::function<Vector(const Vector& x, const Vector& u, const Vector& w)>;

/// Classical RK4 with u and w held over the step. Throws NonFinite.
Vector rk4_step(const StateDerivative& f, const Vector& x, const Vector& u, const Vector& w,
                double dt);

// ---------------------------------------------------------------------------
// Closed-loop simulation.

enum class DisturbanceKind { ConstantWorstCase, Sinusoidal, UniformRandom };

struct DisturbancePolicy {
  DisturbanceKind kind = DisturbanceKind::ConstantWorstCase;
  Vector amplitude;        // per channel; sign sets the constant direction
  double frequency = 0.5;  // Hz, sinusoidal only
  double onset = 0.0;      // s; zero before this time
  std::uint64_t seed = 0;

  /// Stateful for UniformRandom (one draw per call).
  Vector sample(double t, std::mt19937_64& rng) const;
};

/// Feedback K·(x - x̄) on a subset of states, written to a subset of inputs.
struct AncillaryBlock {
  DenseMatrix k;
  std::vector<std::size_t> state_indices;
  std::vector<std::size_t> input_indices;
};

/// E(e) = eᵀPe on a subset of the tracking error, with invariant level c.
struct LyapunovMonitor {
  linalg::SymMatrix p;
  std::vector<std::size_t> state_indices;
  double level = 0.0;

  double value(const Vector& x, const Vector& x_ref) const;
};

class Plant {
 public:
  virtual ~Plant() = default;
  virtual std::size_t num_states() const = 0;
  virtual std::size_t num_inputs() const = 0;
  virtual std::size_t num_disturbances() const = 0;
  virtual std::vector<std::string> state_names() const = 0;
  virtual Vector initial_state() const = 0;
  virtual FlatState reference(double t) const = 0;
  /// Disturbance-free model the MPC linearizes (may depend on gait phase).
  virtual mpc::DynamicsHandle controller_model() const = 0;
  /// Called once per simulation step before the controller runs.
  virtual void begin_step(double /*t*/, const Vector& /*x*/) {}
  /// Maps a commanded input to what the actuators deliver.
  virtual Vector actuate(const Vector& u_cmd, const Vector& /*x*/) const { return u_cmd; }
  virtual Vector dynamics(const Vector& x, const Vector& u, const Vector& w) const = 0;
};

class QuadcopterPlant : public Plant {
 public:
  QuadcopterPlant(QuadcopterParams params, Figure8Reference ref);
  std::size_t num_states() const override { return 6; }
  std::size_t num_inputs() const override { return 2; }
  std::size_t num_disturbances() const override { return 2; }
  std::vector<std::string> state_names() const override;
  Vector initial_state() const override;
  FlatState reference(double t) const override;
  mpc::DynamicsHandle controller_model() const override;
  Vector dynamics(const Vector& x, const Vector& u, const Vector& w) const override;

 private:
  QuadcopterParams params_;
  Figure8Reference ref_;
};

/// Disturbance channels: (added mass in [0, Δm], external horizontal force).
class QuadrupedPlant : public Plant {
 public:
  explicit QuadrupedPlant(QuadrupedParams params);
  std::size_t num_states() const override { return 6; }
  std::size_t num_inputs() const override { return 4; }
  std::size_t num_disturbances() const override { return 2; }
  std::vector<std::string> state_names() const override;
  Vector initial_state() const override;
  FlatState reference(double t) const override;
  mpc::DynamicsHandle controller_model() const override;
  void begin_step(double t, const Vector& x) override;
  Vector actuate(const Vector& u_cmd, const Vector& x) const override;
  Vector dynamics(const Vector& x, const Vector& u, const Vector& w) const override;

  const StanceState& stance() const noexcept { return stance_; }

 private:
  QuadrupedParams params_;
  StanceState stance_;
  long phase_ = -1;
};

struct ControllerSpec {
  mpc::MpcConfig mpc;
  bool robust = false;
  std::vector<AncillaryBlock> ancillary;
};

struct Trajectory {
  std::vector<std::string> state_names;
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> references;
  std::vector<Vector> controls;
  std::vector<Vector> disturbances;
  std::vector<double> lyapunov;
  double roa_level = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  /// Header `t, x..., xref..., u..., w..., E, roa_level`.
  std::string to_csv() const;
};

struct SimulationMetrics {
  Vector rms_error;      // per state
  Vector max_abs_error;  // per state
  int invariant_exits = 0;
  bool entered = false;
  bool diverged = false;
  double diverged_at = 0.0;
  bool mpc_regularized = false;
  bool state_violation = false;
};

/// Counts inside→outside transitions of E relative to the level, starting
/// from the first sample with E ≤ level.
int count_invariant_exits(std::span<const double> lyapunov, double level);

struct SimulationOptions {
  double duration = 5.0;
  double dt = 0.001;
  double blowup = 1e3;
};

struct SimulationResult {
  Trajectory trajectory;
  SimulationMetrics metrics;
};

SimulationResult simulate_closed_loop(Plant& plant, const ControllerSpec& controller,
                                      const DisturbancePolicy& disturbance,
                                      const LyapunovMonitor& monitor,
                                      const SimulationOptions& options);

}  // namespace robustroa::plants
