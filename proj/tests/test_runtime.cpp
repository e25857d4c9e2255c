#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "flatmpc/dare.hpp"
#include "flatmpc/runtime.hpp"
#include "flatmpc/sim.hpp"

using namespace flatmpc;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;

namespace {

ControllerBundle& bundle5() {
  static ControllerBundle b = [] {
    ScenarioConfig cfg;
    cfg.Np = 5;
    return synthesize(cfg);
  }();
  return b;
}

ControllerBundle& bundle30() {
  static ControllerBundle b = [] {
    ScenarioConfig cfg;
    cfg.Np = 30;
    return synthesize(cfg);
  }();
  return b;
}

}  // namespace

TEST_CASE("origin is covered and maps to zero correction") {
  for (const AxisController& ctrl : bundle5().axes) {
    int reg = locate(ctrl, Vector2d::Zero());
    REQUIRE(reg >= 0);
    CHECK(std::abs(evaluate(ctrl, Vector2d::Zero())) <= 1e-9);
  }
}

TEST_CASE("states outside the box are uncovered") {
  const AxisController& ctrl = bundle5().axes[0];
  CHECK(locate(ctrl, Vector2d(1.6, 0.0)) == -1);
  CHECK(locate(ctrl, Vector2d(0.0, -1.1)) == -1);
  CHECK_THROWS_AS(evaluate(ctrl, Vector2d(2.0, 2.0)), Error);
  try {
    evaluate(ctrl, Vector2d(2.0, 2.0));
  } catch (const Error& e) {
    CHECK(e.code() == "infeasible_state");
  }
}

TEST_CASE("near the origin the law is the unconstrained optimum") {
  const AxisController& ctrl = bundle5().axes[0];
  const AxisSpec& spec = ctrl.spec;
  MatrixXd K = lqr_gain(spec.sys.A, spec.sys.B, spec.Q,
                        MatrixXd::Constant(1, 1, spec.R), spec.P);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-0.02, 0.02);
  for (int i = 0; i < 200; ++i) {
    Vector2d xi(u(rng), u(rng));
    double v = evaluate(ctrl, xi);
    CHECK(v == doctest::Approx(-(K * xi)(0)).epsilon(1e-8));
  }
}

TEST_CASE("the stitched law is continuous across facets") {
  const AxisController& ctrl = bundle5().axes[0];
  int checked = 0;
  for (const CriticalRegion& r : ctrl.regions) {
    Canon2D canon = canonicalize_2d(r.region.H, r.region.h);
    if (canon.empty || !canon.bounded) continue;
    for (size_t i = 0; i < canon.verts.size(); ++i) {
      Vector2d mid = 0.5 * (canon.verts[i] + canon.verts[(i + 1) % canon.verts.size()]);
      Vector2d n = canon.poly.H.row(static_cast<int>(i)).transpose();
      int reg_in = locate(ctrl, mid - 1e-7 * n);
      int reg_out = locate(ctrl, mid + 1e-7 * n);
      if (reg_in < 0 || reg_out < 0 || reg_in == reg_out) continue;
      ++checked;
      auto law_at_mid = [&](int reg) {
        const CriticalRegion& cr = ctrl.regions[static_cast<size_t>(reg)];
        return (cr.F * mid + cr.mu)(0);
      };
      CHECK(std::abs(law_at_mid(reg_in) - law_at_mid(reg_out)) <= 1e-6);
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("regulation control step at the origin commands hover") {
  std::array<Vector2d, 3> state = {Vector2d::Zero(), Vector2d::Zero(), Vector2d::Zero()};
  StepResult res = control_step(bundle5(), state, 0.0, 9.81, nullptr, 0);
  CHECK(res.v.norm() <= 1e-9);
  CHECK(res.u.T == doctest::Approx(9.81));
  CHECK(res.u.phi == doctest::Approx(0.0));
  CHECK(res.u.theta == doctest::Approx(0.0));
  for (int reg : res.region) CHECK(reg >= 0);
}

TEST_CASE("control step from the stock initial state stays admissible") {
  ScenarioConfig cfg;
  StepResult res = control_step(bundle30(), cfg.xi0, cfg.psi, cfg.vc.g, nullptr, 0);
  for (int axis = 0; axis < 3; ++axis) {
    CHECK(std::abs(res.v(axis)) <= bundle30().axes[static_cast<size_t>(axis)].spec.vbar + 1e-9);
    CHECK(res.region[static_cast<size_t>(axis)] >= 0);
  }
  CHECK(in_u(res.u, cfg.vc, 1e-9));
  CHECK(res.eval_time_s >= 0.0);
}

TEST_CASE("control steps are deterministic") {
  ScenarioConfig cfg;
  StepResult a = control_step(bundle30(), cfg.xi0, 0.3, cfg.vc.g, nullptr, 0);
  StepResult b = control_step(bundle30(), cfg.xi0, 0.3, cfg.vc.g, nullptr, 0);
  CHECK(a.v == b.v);
  CHECK(a.u.T == b.u.T);
  CHECK(a.u.phi == b.u.phi);
  CHECK(a.u.theta == b.u.theta);
  CHECK(a.region == b.region);
}

TEST_CASE("tracking a consistent reference passes it through at zero error") {
  ScenarioConfig cfg;
  cfg.Np = 5;
  cfg.reference.kind = ReferenceSpec::Kind::circle;
  cfg.reference.radius = 0.5;
  cfg.reference.rate = 0.5;
  cfg.reference.altitude = 1.0;
  TrackingReference ref = make_reference(cfg);
  REQUIRE_NOTHROW(ref.validate(LinearSystem2D::double_integrator(cfg.ts)));

  ControllerBundle bundle = synthesize(cfg);
  for (int k : {0, 7, 101, 400}) {
    StepResult res = control_step(bundle, ref.state_at(k), 0.0, cfg.vc.g, &ref, k);
    Vector3d v_ref = ref.input_at(k);
    CHECK((res.v - v_ref).norm() <= 1e-9);
    bool sing = false;
    PhysicalInput expect = flat_to_physical(v_ref, 0.0, cfg.vc.g, &sing);
    CHECK(res.u.T == doctest::Approx(expect.T).epsilon(1e-12));
    CHECK(res.u.phi == doctest::Approx(expect.phi).epsilon(1e-12));
    CHECK(res.u.theta == doctest::Approx(expect.theta).epsilon(1e-12));
  }
}

TEST_CASE("inconsistent references are rejected") {
  auto sys = LinearSystem2D::double_integrator(0.1);
  TrackingReference ref;
  std::array<Vector2d, 3> x0 = {Vector2d(0, 0), Vector2d(0, 0), Vector2d(0, 0)};
  std::array<Vector2d, 3> x1 = {Vector2d(0.5, 0), Vector2d(0, 0), Vector2d(0, 0)};
  ref.xi_ref = {x0, x1};
  ref.v_ref = {Vector3d::Zero()};  // zero input cannot move the state
  CHECK_THROWS_AS(ref.validate(sys), Error);
  try {
    ref.validate(sys);
  } catch (const Error& e) {
    CHECK(e.code() == "reference_inconsistent");
  }

  // repaired input satisfies the recursion
  ref.xi_ref[1][0] = sys.A * x0[0];
  CHECK_NOTHROW(ref.validate(sys));
}
