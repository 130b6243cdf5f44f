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

#include <cmath>
#include <random>

#include "robustroa/clf.hpp"
#include "robustroa/error.hpp"
#include "robustroa/plants.hpp"
#include "test_util.hpp"

using namespace robustroa;
using namespace robustroa::clf;
using linalg::DenseMatrix;
using linalg::Vector;

namespace {

ClfParams quadcopter_params() {
  return {DenseMatrix::diag(std::vector{1e-1, 1.0, 1.0, 1.0, 1.0, 1e-2}),
          DenseMatrix::diag(std::vector{1e-2, 1e-4}), 0.5, 0.1};
}

const SynthesisResult& quadcopter_synthesis() {
  static const SynthesisResult r = synthesize(plants::quadcopter_linearize({}), quadcopter_params());
  return r;
}

LinearModel scalar_model(double a) {
  return {DenseMatrix{{a}}, DenseMatrix{{1.0}}, DenseMatrix{{1.0}}, DenseMatrix{{0.0}}};
}

/// Symmetric square root via the eigen-decomposition.
DenseMatrix spd_power(const DenseMatrix& p, double power) {
  const auto eig = linalg::sym_eig(p);
  const std::size_t n = p.rows();
  DenseMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::pow(eig.eigenvalues[k], power);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += s * eig.eigenvectors(i, k) * eig.eigenvectors(j, k);
  }
  return out;
}

/// dE/dt along ė = (A+BK)e + B_w w.
double lyapunov_rate(const LinearModel& m, const ClfCertificate& c, const Vector& e, const Vector& w) {
  const Vector edot_a = (m.a + m.b * c.k) * e;
  const Vector edot_w = m.b_w * w;
  Vector edot(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) edot[i] = edot_a[i] + edot_w[i];
  return 2.0 * linalg::dot(c.p * e, edot);
}

}  // namespace

TEST_CASE("scalar block layout") {
  ClfParams par{DenseMatrix{{1.0}}, DenseMatrix{{1.0}}, 1.0, 1.0};
  const auto sdp = build_lemma2_lmi(scalar_model(1.0), par);
  REQUIRE(sdp.block_dim() == 4);
  REQUIRE(sdp.num_vars == 2);
  const double y = 0.7, l = -0.3;
  const auto f = sdp.evaluate({y, l});
  CHECK(f(0, 0) == doctest::Approx(2.0 * (y + l) + y).epsilon(1e-14));
  CHECK(f(0, 1) == doctest::Approx(y));
  CHECK(f(0, 2) == doctest::Approx(l));
  CHECK(f(0, 3) == doctest::Approx(1.0));
  CHECK(f(1, 1) == doctest::Approx(-1.0));
  CHECK(f(2, 2) == doctest::Approx(-1.0));
  CHECK(f(3, 3) == doctest::Approx(-1.0));
  CHECK(f(1, 2) == 0.0);
  CHECK(sdp.objective[0] == 1.0);
  CHECK(sdp.objective[1] == 0.0);
}

TEST_CASE("quadcopter block dimension") {
  const auto sdp = build_lemma2_lmi(plants::quadcopter_linearize({}), quadcopter_params());
  CHECK(sdp.block_dim() == 16);
  CHECK(sdp.num_vars == 21 + 12);
  CHECK(build_synthesis_lmi(plants::quadcopter_linearize({}), quadcopter_params()).block_dim() == 22);
}

TEST_CASE("closed-loop certificate on open-loop examples") {
  ClfCertificate c;
  c.k = DenseMatrix(1, 2);
  c.p = DenseMatrix::identity(2);
  c.params = {0.1 * DenseMatrix::identity(2), DenseMatrix{{1.0}}, 0.5, 1.0};
  LinearModel stable{-1.0 * DenseMatrix::identity(2), DenseMatrix(2, 1), DenseMatrix(2, 1), DenseMatrix(2, 1)};
  CHECK(verify_closed_loop(stable, c) == doctest::Approx(-2.0 + 0.5 + 0.1).epsilon(1e-12));
  LinearModel unstable = stable;
  unstable.a = DenseMatrix::identity(2);
  CHECK(verify_closed_loop(unstable, c) == doctest::Approx(2.0 + 0.5 + 0.1).epsilon(1e-12));
}

TEST_CASE("invariant level") {
  CHECK(roa_level(quadcopter_params(), 3.5) == doctest::Approx(2.45).epsilon(1e-12));
  ClfParams horiz{DenseMatrix::diag(std::vector{500.0, 10.0}), DenseMatrix::diag(std::vector{1.0, 1.0}), 0.3, 200.0};
  CHECK(std::abs(roa_level(horiz, 1.0) - 666.67) < 1e-2);
  ClfCertificate c;
  c.params = quadcopter_params();
  c.set_w_max(3.5);
  CHECK(c.w_max == 3.5);
  CHECK(c.roa_level == doctest::Approx(2.45));
  CHECK_THROWS_AS(roa_level(horiz, -1.0), Error);
}

TEST_CASE("quadcopter synthesis") {
  const auto& r = quadcopter_synthesis();
  REQUIRE(r.sdp.status == lmi::SdpStatus::Optimal);
  REQUIRE(r.certificate);
  CHECK(r.block_max_eig < -1e-8);
  CHECK(r.certificate_max_eig < 0.0);

  const auto model = plants::quadcopter_linearize({});
  const Lemma2Layout layout{6, 2, 2};
  const auto y = layout.unpack_y(r.sdp.x);
  const auto l = layout.unpack_l(r.sdp.x);
  CHECK(testing::max_abs_diff(r.certificate->k * y, l) < 1e-8);
  // Recheck the CLF block on its own.
  CHECK(linalg::max_eigenvalue(build_lemma2_lmi(model, quadcopter_params()).evaluate(r.sdp.x)) < -1e-8);

  // Hurwitz: the symmetric part of P^½(A+BK)P^-½ is negative definite.
  const auto& c = *r.certificate;
  const DenseMatrix acl = model.a + model.b * c.k;
  const DenseMatrix sim = spd_power(c.p, 0.5) * acl * spd_power(c.p, -0.5);
  CHECK(linalg::max_eigenvalue(linalg::symmetrize(sim)) < 0.0);
}

TEST_CASE("unit error maps to the first column of K") {
  const auto& c = *quadcopter_synthesis().certificate;
  const Vector u_bar{9.81, 0.0};
  const Vector x{1.0, 0, 0, 0, 0, 0};
  const Vector x_bar(6, 0.0);
  const Vector u = plants::robust_control(u_bar, x, x_bar, c.k);
  CHECK(u[0] - u_bar[0] == doctest::Approx(c.k(0, 0)));
  CHECK(u[1] - u_bar[1] == doctest::Approx(c.k(1, 0)));
}

TEST_CASE("Lyapunov decay on random samples") {
  const auto model = plants::quadcopter_linearize({});
  const auto& c = *quadcopter_synthesis().certificate;
  const auto& par = c.params;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), mag(-3.0, 1.0);
  int ok = 0;
  for (int s = 0; s < 100; ++s) {
    Vector e(6), w(2);
    const double scale = std::pow(10.0, mag(rng));
    for (double& v : e) v = scale * unit(rng);
    for (double& v : w) v = 3.5 * unit(rng);
    const double lhs = lyapunov_rate(model, c, e, w) + par.lambda * c.lyapunov(e) - par.mu * linalg::dot(w, w);
    ok += lhs < 0.0;
  }
  CHECK(ok == 100);
}

TEST_CASE("trajectories starting inside the invariant set stay inside") {
  const auto model = plants::quadcopter_linearize({});
  auto c = *quadcopter_synthesis().certificate;
  c.set_w_max(3.5);
  const double level = c.roa_level;
  const DenseMatrix lower = linalg::cholesky(c.p);
  const DenseMatrix acl = model.a + model.b * c.k;
  const plants::StateDerivative f = [&](const Vector& e, const Vector&, const Vector& w) {
    Vector d = acl * e;
    const Vector dw = model.b_w * w;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += dw[i];
    return d;
  };

  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  double worst = 0.0;
  for (int traj = 0; traj < 50; ++traj) {
    // e₀ = L⁻ᵀz with ‖z‖² = r·c lands on E(e₀) = r·c.
    Vector z(6);
    for (double& v : z) v = normal(rng);
    const double scale = std::sqrt(unit(rng) * level / linalg::dot(z, z));
    for (double& v : z) v *= scale;
    Vector e = linalg::solve(lower.transpose(), z);
    REQUIRE(c.lyapunov(e) <= level * (1.0 + 1e-12));
    Vector w(2);
    const double dt = 1e-3;
    for (int k = 0; k < 5000; ++k) {
      if (k % 100 == 0)
        for (double& v : w) v = coin(rng) ? 3.5 : -3.5;
      e = plants::rk4_step(f, e, {}, w, dt);
      worst = std::max(worst, c.lyapunov(e) / level);
    }
  }
  CHECK(worst <= 1.0 + 1e-6);
}

TEST_CASE("quadruped channel syntheses") {
  const auto [ly, lz] = plants::quadruped_linear_subsystems({});
  const auto rz = synthesize(lz, {DenseMatrix::diag(std::vector{1000.0, 1.0}),
                                  DenseMatrix::diag(std::vector{0.01, 0.01}), 0.8, 90.0});
  CHECK(rz.sdp.status == lmi::SdpStatus::Optimal);
  CHECK(rz.certificate_max_eig < 0.0);
  const auto ry = synthesize(ly, {DenseMatrix::diag(std::vector{500.0, 10.0}),
                                  DenseMatrix::diag(std::vector{1.0, 1.0}), 0.3, 200.0});
  CHECK(ry.sdp.status == lmi::SdpStatus::Optimal);
  CHECK(ry.certificate_max_eig < 0.0);
}

TEST_CASE("absurd decay rates are infeasible") {
  auto par = quadcopter_params();
  par.lambda = 1e6;
  const auto r = synthesize(plants::quadcopter_linearize({}), par);
  CHECK(r.sdp.status == lmi::SdpStatus::Infeasible);
  CHECK_FALSE(r.certificate);
}

TEST_CASE("the block alone admits an indefinite Y") {
  // Why synthesis adds -Y ≺ 0: at λ = 10 the block is strictly feasible
  // only with Y indefinite.
  auto par = quadcopter_params();
  par.lambda = 10.0;
  const auto model = plants::quadcopter_linearize({});
  const auto block = lmi::maximize(build_lemma2_lmi(model, par));
  REQUIRE(block.status == lmi::SdpStatus::Optimal);
  const auto y = Lemma2Layout{6, 2, 2}.unpack_y(block.x);
  CHECK(linalg::sym_eig(y).eigenvalues.front() < 0.0);
  CHECK(synthesize(model, par).sdp.status == lmi::SdpStatus::Infeasible);
}

TEST_CASE("parameter validation") {
  ClfParams bad{DenseMatrix{{1.0, 0.1}, {0.1, 1.0}}, DenseMatrix{{1.0}}, 1.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), Error);
  ClfParams neg{DenseMatrix{{1.0}}, DenseMatrix{{1.0}}, -1.0, 1.0};
  CHECK_THROWS_AS(neg.validate(), Error);
  ClfParams zero_mu{DenseMatrix{{1.0}}, DenseMatrix{{1.0}}, 1.0, 0.0};
  CHECK_THROWS_AS(zero_mu.validate(), Error);
}
