#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "flatmpc/controller_io.hpp"
#include "flatmpc/dare.hpp"
#include "flatmpc/qp.hpp"
#include "flatmpc/runtime.hpp"
#include "flatmpc/sim.hpp"
#include "flatmpc/synth.hpp"
#include "oracles.hpp"

using namespace flatmpc;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

std::array<AxisSpec, 3> table_specs(int Np) {
  ScenarioConfig cfg;
  cfg.Np = Np;
  return make_axis_specs(cfg);
}

double qp_first_input(const ParametricQP& pqp, const Vector2d& xi) {
  QPProblem prob;
  prob.H = pqp.H;
  prob.f = pqp.Ftheta * xi;
  prob.G = pqp.G;
  prob.w = pqp.w + pqp.S * xi;
  QPSolution sol = solve_qp(prob);
  REQUIRE(sol.status == QpStatus::optimal);
  return sol.z(0);
}

}  // namespace

TEST_CASE("condensing a one-step horizon gives the closed-form matrices") {
  AxisSpec spec = table_specs(1)[0];
  ParametricQP pqp = condense(spec);
  CHECK(pqp.horizon_vars() == 1);

  const MatrixXd& A = spec.sys.A;
  const Eigen::Vector2d B = spec.sys.B;
  double h_expected = spec.R + B.dot(spec.P * B);
  CHECK(pqp.H(0, 0) == doctest::Approx(h_expected).epsilon(1e-12));
  MatrixXd ftheta_expected = B.transpose() * spec.P * A;  // 1 x 2
  CHECK((pqp.Ftheta - ftheta_expected).norm() <= 1e-12);
  MatrixXd qc_expected = spec.Q + A.transpose() * spec.P * A;
  CHECK((pqp.Qc - qc_expected).norm() <= 1e-12);
}

TEST_CASE("condensed constraint layout") {
  AxisSpec spec = table_specs(5)[0];
  ParametricQP pqp = condense(spec);
  int m_xf = spec.Xf.rows();
  CHECK(pqp.G.rows() == 2 * 5 + 4 * 4 + m_xf);
  CHECK(pqp.param_H.rows() == 4);  // step-0 state box

  // input rows come first, step-major, +/- interleaved, with no state coupling
  for (int k = 0; k < 5; ++k) {
    CHECK(pqp.G(2 * k, k) == doctest::Approx(1.0));
    CHECK(pqp.G(2 * k + 1, k) == doctest::Approx(-1.0));
    CHECK(pqp.w(2 * k) == doctest::Approx(spec.vbar));
    CHECK(pqp.w(2 * k + 1) == doctest::Approx(spec.vbar));
    CHECK(pqp.S.row(2 * k).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("condensed cost equals the simulated horizon cost") {
  AxisSpec spec = table_specs(5)[0];
  ParametricQP pqp = condense(spec);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> us(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector2d xi(1.5 * us(rng), us(rng));
    VectorXd z(5);
    for (int i = 0; i < 5; ++i) z(i) = 0.8 * us(rng);
    double direct = oracles::stage_cost(spec.sys.A, spec.sys.B,
                                        spec.Q, MatrixXd::Constant(1, 1, spec.R),
                                        spec.P, 5, xi, z);
    double condensed = pqp.cost(xi, z);
    CHECK(condensed == doctest::Approx(direct).epsilon(1e-8));
  }
}

TEST_CASE("origin is a zero-cost fixed point") {
  AxisSpec spec = table_specs(5)[0];
  ParametricQP pqp = condense(spec);
  QPProblem prob;
  prob.H = pqp.H;
  prob.f = VectorXd::Zero(5);
  prob.G = pqp.G;
  prob.w = pqp.w;
  QPSolution sol = solve_qp(prob);
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK(sol.z.norm() <= 1e-9);
  CHECK(pqp.cost(Vector2d::Zero(), sol.z) <= 1e-12);
}

TEST_CASE("terminal ingredients reproduce the reference weighting") {
  auto sys = LinearSystem2D::double_integrator(0.1);
  Eigen::Matrix2d Q = Eigen::Vector2d(50.0, 5.0).asDiagonal();
  TerminalIngredients ti = terminal_ingredients(sys, Q, 10.0, 1.5, 1.0, 0.8154);

  CHECK(ti.P(0, 0) == doctest::Approx(524.37).epsilon(5e-3));
  CHECK(ti.P(0, 1) == doctest::Approx(223.75).epsilon(5e-3));
  CHECK(ti.P(1, 0) == doctest::Approx(223.75).epsilon(5e-3));
  CHECK(ti.P(1, 1) == doctest::Approx(225.97).epsilon(5e-3));
  CHECK(ti.K(0, 0) == doctest::Approx(2.00027953).epsilon(1e-6));
  CHECK(ti.K(0, 1) == doctest::Approx(2.0977776).epsilon(1e-6));
  CHECK(spectral_radius(sys.A - sys.B * ti.K) == doctest::Approx(0.89455).epsilon(1e-4));

  // the terminal set is invariant and admissible
  HPolytope X = HPolytope::box((VectorXd(2) << 1.5, 1.0).finished());
  MatrixXd Acl = sys.A - sys.B * ti.K;
  for (const auto& v : vertices(ti.Xf).vertices) {
    CHECK(X.contains(v, 1e-8));
    CHECK(std::abs((ti.K * v)(0)) <= 0.8154 + 1e-8);
    CHECK(ti.Xf.contains(Acl * v, 1e-8));
  }
}

TEST_CASE("vertical axis has the roomier terminal set") {
  auto specs = table_specs(30);
  Canon2D c1 = canonicalize_2d(specs[0].Xf.H, specs[0].Xf.h);
  Canon2D c3 = canonicalize_2d(specs[2].Xf.H, specs[2].Xf.h);
  REQUIRE(!c1.empty);
  REQUIRE(!c3.empty);
  CHECK(polygon_area(c3.verts) > polygon_area(c1.verts));
}

TEST_CASE("value function decreases inside the terminal set") {
  auto spec = table_specs(30)[0];
  auto sys = spec.sys;
  MatrixXd K = lqr_gain(sys.A, sys.B, spec.Q, MatrixXd::Constant(1, 1, spec.R), spec.P);
  MatrixXd Acl = sys.A - sys.B * K;

  std::mt19937 rng(32);
  std::uniform_real_distribution<double> ux(-1.5, 1.5), uv(-1.0, 1.0);
  int hits = 0;
  for (int i = 0; i < 20000 && hits < 1000; ++i) {
    Vector2d xi(ux(rng), uv(rng));
    if (!spec.Xf.contains(xi)) continue;
    ++hits;
    double v = -(K * xi)(0);
    Vector2d next = Acl * xi;
    CHECK(spec.Xf.contains(next, 1e-8));
    double decay = xi.dot(spec.P * xi) - next.dot(spec.P * next);
    double stage = xi.dot(spec.Q * xi) + spec.R * v * v;
    CHECK(decay >= stage - 1e-8);
  }
  CHECK(hits == 1000);
}

TEST_CASE("unconstrained horizon collapses to one region with the LQR law") {
  AxisSpec spec = table_specs(1)[0];
  spec.vbar = 1e6;
  spec.pbar = 1e6;
  spec.velbar = 1e6;
  spec.Xf = HPolytope::box((VectorXd(2) << 1e7, 1e7).finished());
  ParametricQP pqp = condense(spec);
  AxisController ctrl = enumerate_regions(pqp, HPolytope::box((VectorXd(2) << 1.0, 1.0).finished()));
  REQUIRE(ctrl.regions.size() == 1);
  const CriticalRegion& r = ctrl.regions[0];
  MatrixXd f_expected = -pqp.Ftheta / pqp.H(0, 0);
  CHECK((r.F - f_expected).norm() <= 1e-10);
  CHECK(r.mu.norm() <= 1e-12);
  CHECK(r.active_set.empty());
}

TEST_CASE("region counts for the stock configuration") {
  for (int np : {5, 30}) {
    ScenarioConfig cfg;
    cfg.Np = np;
    ControllerBundle bundle = synthesize(cfg);
    size_t n1 = bundle.axes[0].regions.size();
    size_t n2 = bundle.axes[1].regions.size();
    size_t n3 = bundle.axes[2].regions.size();
    CHECK(n1 == n2);
    CHECK(n3 >= 9);
    CHECK(n3 <= 13);
    if (np == 5) CHECK(n1 == 71);    // minimal partition of the feasible set
    if (np == 30) CHECK(n1 == 103);  // converged count, stable for Np >= 25
  }
}

TEST_CASE("identical axis specs synthesize identical controllers") {
  auto specs = table_specs(5);
  REQUIRE(specs[0].vbar == specs[1].vbar);
  AxisController a = enumerate_regions(condense(specs[0]), specs[0].state_box());
  AxisController b = enumerate_regions(condense(specs[1]), specs[1].state_box());
  REQUIRE(a.regions.size() == b.regions.size());
  for (size_t i = 0; i < a.regions.size(); ++i) {
    CHECK((a.regions[i].region.H - b.regions[i].region.H).norm() == 0.0);
    CHECK((a.regions[i].region.h - b.regions[i].region.h).norm() == 0.0);
    CHECK((a.regions[i].F - b.regions[i].F).norm() == 0.0);
    CHECK((a.regions[i].mu - b.regions[i].mu).norm() == 0.0);
    CHECK(a.regions[i].active_set == b.regions[i].active_set);
  }
}

TEST_CASE("piecewise law matches the quadratic program everywhere sampled") {
  auto specs = table_specs(5);
  std::mt19937 rng(33);
  for (int axis : {0, 2}) {
    const AxisSpec& spec = specs[static_cast<size_t>(axis)];
    ParametricQP pqp = condense(spec);
    AxisController ctrl = enumerate_regions(pqp, spec.state_box());
    std::uniform_real_distribution<double> ux(-spec.pbar, spec.pbar),
        uv(-spec.velbar, spec.velbar);
    int matched = 0;
    for (int i = 0; i < 20000 && matched < 2000; ++i) {
      Vector2d xi(ux(rng), uv(rng));
      int reg = locate(ctrl, xi);
      if (reg < 0) continue;
      ++matched;
      double v_pwa = evaluate(ctrl, xi);
      double v_qp = qp_first_input(pqp, xi);
      CHECK(std::abs(v_pwa - v_qp) <= 1e-6);
    }
    CHECK(matched >= 2000);
  }
}

TEST_CASE("each region is located at its own Chebyshev center") {
  auto spec = table_specs(5)[0];
  ParametricQP pqp = condense(spec);
  AxisController ctrl = enumerate_regions(pqp, spec.state_box());
  for (size_t l = 0; l < ctrl.regions.size(); ++l) {
    const CriticalRegion& r = ctrl.regions[l];
    CHECK(r.cheb_radius > 1e-8);
    for (int i = 0; i < r.region.rows(); ++i)
      CHECK(r.region.H.row(i).norm() == doctest::Approx(1.0).epsilon(1e-9));
    Vector2d c = r.cheb_center;
    CHECK(locate(ctrl, c) == static_cast<int>(l));
    double v_pwa = (r.F * c + r.mu)(0);
    CHECK(std::abs(v_pwa - qp_first_input(pqp, c)) <= 1e-6);
  }
}

TEST_CASE("region interiors do not overlap") {
  auto spec = table_specs(5)[0];
  AxisController ctrl = enumerate_regions(condense(spec), spec.state_box());
  std::mt19937 rng(34);
  std::uniform_real_distribution<double> ux(-1.5, 1.5), uv(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    Vector2d xi(ux(rng), uv(rng));
    int strict = 0;
    for (const auto& r : ctrl.regions)
      if (r.region.contains(xi, -1e-9)) ++strict;
    CHECK(strict <= 1);
  }
}

TEST_CASE("longer horizons only widen the covered set") {
  auto ctrl5 = enumerate_regions(condense(table_specs(5)[0]), table_specs(5)[0].state_box());
  auto ctrl30 = enumerate_regions(condense(table_specs(30)[0]), table_specs(30)[0].state_box());
  std::mt19937 rng(35);
  std::uniform_real_distribution<double> ux(-1.5, 1.5), uv(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    Vector2d xi(ux(rng), uv(rng));
    if (locate(ctrl5, xi) >= 0) CHECK(locate(ctrl30, xi) >= 0);
  }
}

TEST_CASE("tight region budget aborts synthesis") {
  auto spec = table_specs(5)[0];
  CHECK_THROWS_WITH_AS(enumerate_regions(condense(spec), spec.state_box(), 10),
                       doctest::Contains("region cap"), Error);
}

TEST_CASE("controller serialization round trip") {
  ScenarioConfig cfg;
  cfg.Np = 5;
  ControllerBundle bundle = synthesize(cfg);
  std::string bytes = serialize_controller(bundle);
  CHECK(serialize_controller(bundle) == bytes);  // deterministic

  ControllerBundle back = deserialize_controller(bytes);
  CHECK(serialize_controller(back) == bytes);
  for (int axis = 0; axis < 3; ++axis) {
    const AxisController& a = bundle.axes[static_cast<size_t>(axis)];
    const AxisController& b = back.axes[static_cast<size_t>(axis)];
    REQUIRE(a.regions.size() == b.regions.size());
    CHECK(a.spec.Np == b.spec.Np);
    CHECK(a.spec.vbar == b.spec.vbar);
    CHECK((a.spec.P - b.spec.P).norm() == 0.0);
    for (size_t l = 0; l < a.regions.size(); ++l) {
      CHECK((a.regions[l].F - b.regions[l].F).norm() == 0.0);
      CHECK((a.regions[l].mu - b.regions[l].mu).norm() == 0.0);
      CHECK((a.regions[l].region.H - b.regions[l].region.H).norm() == 0.0);
      CHECK(a.regions[l].active_set == b.regions[l].active_set);
    }
  }
}

TEST_CASE("corrupted controller payloads are rejected") {
  ScenarioConfig cfg;
  cfg.Np = 5;
  ControllerBundle bundle = synthesize(cfg);
  std::string bytes = serialize_controller(bundle);

  std::string truncated = bytes.substr(0, bytes.size() / 2);
  CHECK_THROWS_AS(deserialize_controller(truncated), Error);
  try {
    deserialize_controller(truncated);
  } catch (const Error& e) {
    CHECK(e.code() == "controller_corrupt");
  }

  std::string flipped = bytes;
  size_t pos = flipped.find("\"regions\"");
  REQUIRE(pos != std::string::npos);
  size_t digit = flipped.find_first_of("0123456789", pos + 12);
  REQUIRE(digit != std::string::npos);
  flipped[digit] = flipped[digit] == '9' ? '8' : '9';
  CHECK_THROWS_AS(deserialize_controller(flipped), Error);
}
