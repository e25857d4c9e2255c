#pragma once

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "flatmpc/controller_io.hpp"
#include "flatmpc/flat_model.hpp"
#include "flatmpc/implicit.hpp"
#include "flatmpc/runtime.hpp"
#include "flatmpc/synth.hpp"

namespace flatmpc {

enum class ControllerKind { explicit_decoupled, implicit_decoupled, implicit_coupled };

struct ReferenceSpec {
  enum class Kind { setpoint, circle, waypoint_square };
  Kind kind = Kind::setpoint;
  Eigen::Vector3d target = Eigen::Vector3d::Zero();  // setpoint
  double radius = 0.0;                               // circle (m)
  double rate = 0.0;                                 // circle (rad/s)
  double altitude = 0.0;                             // circle / square (m)
  double side = 0.0;                                 // square (m)
  double period = 0.0;                               // square, full lap (s)

  bool tracking() const { return kind == Kind::circle; }
};

struct ScenarioConfig {
  VcParams vc{1.45 * 9.81, 0.1745, 9.81};
  Eigen::Matrix2d Q = (Eigen::Matrix2d() << 50.0, 0.0, 0.0, 5.0).finished();
  double R = 10.0;
  int Np = 30;
  double ts = 0.1;
  Eigen::Vector3d pbar = Eigen::Vector3d(1.5, 1.5, 1.5);
  Eigen::Vector3d velbar = Eigen::Vector3d(1.0, 1.0, 1.5);
  Eigen::Vector3d vbar = Eigen::Vector3d::Zero();  // resolved input half-widths
  bool vbar_auto = true;                           // resolve from max_inscribed_box
  int l1 = 16, l2 = 4;                             // polytopic input set resolution
  std::array<Eigen::Vector2d, 3> xi0 = {Eigen::Vector2d(1.25, -0.8), Eigen::Vector2d(0.0, 0.2),
                                        Eigen::Vector2d(0.5, 0.2)};
  double duration = 60.0;
  ControllerKind kind = ControllerKind::explicit_decoupled;
  ReferenceSpec reference;
  double psi = 0.0;
  int n_drones = 1;
  int seed = 1;
  int region_budget = 100000;

  int steps() const;       // duration / ts, validated integral
  void validate() const;   // throws "bad_config" on violations
  Eigen::Vector3d resolved_vbar() const;  // nominal input box (auto or explicit)
};

// Per-axis synthesis specs implied by the config. In tracking mode the input
// box shrinks so the law's correction plus the reference input stays inside
// the polytopic input set.
std::array<AxisSpec, 3> make_axis_specs(const ScenarioConfig& cfg);

// Full explicit synthesis for all three axes.
ControllerBundle synthesize(const ScenarioConfig& cfg);

// Reference signals. Circle references are generated through the steady-state
// response of the sampled double integrator, so the plant recursion holds to
// machine precision sample by sample.
TrackingReference make_reference(const ScenarioConfig& cfg);

struct TraceRow {
  double t = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  PhysicalInput u;
  std::array<int, 3> reg = {-1, -1, -1};
  double eval_us = 0.0;
  bool feasible = true;
};

struct RunSummary {
  double rms_m = 0.0;
  double mean_eval_us = 0.0;
  double max_eval_us = 0.0;
  std::array<int, 3> region_counts = {0, 0, 0};
  int viol_input_box = 0;   // v (or the tracking correction) outside its box
  int viol_input_set = 0;   // u outside the thrust/attitude set
  int viol_state_box = 0;   // position/velocity outside the state constraints
  int viol_vc = 0;          // total flat input outside the exact set
  bool completed = true;
};

struct SimTrace {
  std::vector<TraceRow> rows;
  RunSummary summary;
};

// One discrete plant step under the physical input.
std::array<Eigen::Vector2d, 3> step_plant(const LinearSystem2D& sys,
                                          const std::array<Eigen::Vector2d, 3>& state,
                                          const PhysicalInput& u, double psi, double g);

// Controllers prepared once per scenario; run() borrows them.
struct Controllers {
  ControllerKind kind = ControllerKind::explicit_decoupled;
  ControllerBundle bundle;                       // explicit
  std::vector<ImpcAxis> impc_axes;               // implicit decoupled
  std::unique_ptr<CoupledImpc> impc_coupled;     // implicit coupled
};

Controllers prepare_controllers(const ScenarioConfig& cfg);
Controllers prepare_controllers(const ScenarioConfig& cfg, ControllerBundle bundle);

// Closed loop of control and plant for duration/ts steps (one extra row
// records the final state with its control). linear_plant bypasses the
// physical transform and drives the integrators with v directly.
SimTrace run(const ScenarioConfig& cfg, const Controllers& ctrls, bool linear_plant = false);

struct BenchReport {
  double rms_explicit = 0.0;
  double rms_implicit_decoupled = 0.0;
  double rms_implicit_coupled = 0.0;
  double mean_explicit_us = 0.0, max_explicit_us = 0.0;
  double mean_decoupled_us = 0.0, max_decoupled_us = 0.0;
  double mean_coupled_us = 0.0, max_coupled_us = 0.0;
  double time_ratio = 0.0;  // coupled mean over explicit mean
  double max_control_gap = 0.0;  // explicit vs decoupled implicit, same run
  std::array<int, 3> region_counts = {0, 0, 0};
  size_t controller_bytes = 0;
  std::vector<std::pair<int, double>> drone_sweep;  // drones -> mean total eval us/step
  bool completed_explicit = true;
  bool completed_decoupled = true;
  bool completed_coupled = true;

  bool all_completed() const {
    return completed_explicit && completed_decoupled && completed_coupled;
  }
};

BenchReport benchmark(const ScenarioConfig& cfg);

void write_trace_csv(const std::string& path, const SimTrace& trace);
void write_summary_json(const std::string& path, const SimTrace& trace);

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

}  // namespace flatmpc
