#include "flatmpc/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <random>

#include <json.hpp>

namespace flatmpc {

int ScenarioConfig::steps() const {
  const double k = duration / ts;
  const int ki = static_cast<int>(std::llround(k));
  if (ki < 0 || std::abs(ki * ts - duration) > 1e-9 * std::max(1.0, duration))
    throw Error("bad_config", "duration must be a whole number of sampling periods");
  return ki;
}

Eigen::Vector3d ScenarioConfig::resolved_vbar() const {
  if (vbar_auto) return max_inscribed_box(vc).vbar;
  return vbar;
}

void ScenarioConfig::validate() const {
  vc.validate();
  if (!(ts > 0.0)) throw Error("bad_config", "ts must be positive");
  if (Np < 1) throw Error("bad_config", "horizon must be at least 1");
  if (!(R > 0.0) || !(Q(0, 0) > 0.0) || !(Q(1, 1) > 0.0))
    throw Error("bad_config", "weights must be positive");
  if ((pbar.array() <= 0.0).any() || (velbar.array() <= 0.0).any())
    throw Error("bad_config", "state bounds must be positive");
  if (l1 < 3 || l2 < 1) throw Error("bad_config", "need l1 >= 3 and l2 >= 1");
  if (n_drones < 1) throw Error("bad_config", "n_drones must be at least 1");
  if (region_budget < 1) throw Error("bad_config", "region_budget must be positive");
  if (!vbar_auto) {
    if ((vbar.array() <= 0.0).any()) throw Error("bad_config", "input box must be positive");
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1})
          if (!vc_contains(Eigen::Vector3d(sx * vbar(0), sy * vbar(1), sz * vbar(2)), vc, 1e-6))
            throw Error("bad_config", "input box corner leaves the flat input set");
  }
  if (reference.kind == ReferenceSpec::Kind::circle) {
    if (reference.radius < 0.0 || reference.rate < 0.0)
      throw Error("bad_config", "circle radius and rate must be nonnegative");
  }
  if (reference.kind == ReferenceSpec::Kind::waypoint_square) {
    if (!(reference.side > 0.0) || !(reference.period > 0.0))
      throw Error("bad_config", "square side and period must be positive");
  }
  steps();
}

namespace {

std::array<AxisSpec, 3> specs_with_box(const ScenarioConfig& cfg, const Eigen::Vector3d& vbar_use) {
  const LinearSystem2D sys = LinearSystem2D::double_integrator(cfg.ts);
  std::array<AxisSpec, 3> specs;
  for (int i = 0; i < 3; ++i) {
    AxisSpec& s = specs[static_cast<size_t>(i)];
    s.sys = sys;
    s.Q = cfg.Q;
    s.R = cfg.R;
    s.Np = cfg.Np;
    s.vbar = vbar_use(i);
    s.pbar = cfg.pbar(i);
    s.velbar = cfg.velbar(i);
    // Axes with identical data share identical ingredients; recompute only
    // when something differs.
    bool reused = false;
    for (int j = 0; j < i; ++j) {
      const AxisSpec& t = specs[static_cast<size_t>(j)];
      if (t.vbar == s.vbar && t.pbar == s.pbar && t.velbar == s.velbar) {
        s.P = t.P;
        s.Xf = t.Xf;
        reused = true;
        break;
      }
    }
    if (!reused) {
      const TerminalIngredients ti =
          terminal_ingredients(sys, cfg.Q, cfg.R, s.pbar, s.velbar, s.vbar);
      s.P = ti.P;
      s.Xf = ti.Xf;
    }
  }
  return specs;
}

Eigen::Vector3d reference_position(const ScenarioConfig& cfg, const TrackingReference* ref,
                                   int k) {
  if (cfg.reference.kind == ReferenceSpec::Kind::setpoint) return cfg.reference.target;
  if (cfg.reference.kind == ReferenceSpec::Kind::circle) {
    const auto& xs = ref->state_at(k);
    return {xs[0](0), xs[1](0), xs[2](0)};
  }
  const double leg_time = cfg.reference.period / 4.0;
  const int leg = static_cast<int>(std::floor(k * cfg.ts / leg_time)) % 4;
  const double s = cfg.reference.side / 2.0;
  const double cx[4] = {s, -s, -s, s};
  const double cy[4] = {s, s, -s, -s};
  return {cx[leg], cy[leg], cfg.reference.altitude};
}

}  // namespace

std::array<AxisSpec, 3> make_axis_specs(const ScenarioConfig& cfg) {
  Eigen::Vector3d vbar_use = cfg.resolved_vbar();
  if (cfg.reference.tracking()) {
    const TrackingReference ref = make_reference(cfg);
    const HPolytope vc_poly = normalize_rows(build_vc_polytope(cfg.vc, cfg.l1, cfg.l2));
    const HPolytope delta = pontryagin_diff(vc_poly, ref.vc_ref_bound);
    InscribedBox nominal;
    nominal.vbar = vbar_use;
    vbar_use = scaled_tracking_box(delta, nominal).vbar;
  }
  return specs_with_box(cfg, vbar_use);
}

ControllerBundle synthesize(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::array<AxisSpec, 3> specs = make_axis_specs(cfg);
  ControllerBundle bundle;
  for (int i = 0; i < 3; ++i) {
    const AxisSpec& s = specs[static_cast<size_t>(i)];
    bool reused = false;
    for (int j = 0; j < i; ++j) {
      const AxisSpec& t = specs[static_cast<size_t>(j)];
      if (t.vbar == s.vbar && t.pbar == s.pbar && t.velbar == s.velbar) {
        bundle.axes[static_cast<size_t>(i)] = bundle.axes[static_cast<size_t>(j)];
        bundle.axes[static_cast<size_t>(i)].spec = s;
        reused = true;
        break;
      }
    }
    if (reused) continue;
    try {
      AxisController ctrl = enumerate_regions(condense(s), s.state_box(), cfg.region_budget);
      ctrl.spec = s;
      bundle.axes[static_cast<size_t>(i)] = std::move(ctrl);
    } catch (const Error& e) {
      throw Error(e.code(), "axis " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return bundle;
}

TrackingReference make_reference(const ScenarioConfig& cfg) {
  const int K = cfg.steps();
  const LinearSystem2D sys = LinearSystem2D::double_integrator(cfg.ts);
  TrackingReference ref;

  if (cfg.reference.kind == ReferenceSpec::Kind::waypoint_square)
    throw Error("bad_config", "square references run as scheduled setpoints, not tracking");

  Eigen::Vector3d target = cfg.reference.target;
  bool constant = cfg.reference.kind == ReferenceSpec::Kind::setpoint;
  if (cfg.reference.kind == ReferenceSpec::Kind::circle) {
    const double theta = cfg.reference.rate * cfg.ts;
    if (cfg.reference.radius == 0.0 || std::abs(std::sin(0.5 * theta)) < 1e-12) {
      constant = true;
      target = {cfg.reference.radius, 0.0, cfg.reference.altitude};
    }
  }

  if (constant) {
    std::array<Eigen::Vector2d, 3> xs = {Eigen::Vector2d(target(0), 0.0),
                                         Eigen::Vector2d(target(1), 0.0),
                                         Eigen::Vector2d(target(2), 0.0)};
    ref.xi_ref.assign(static_cast<size_t>(K) + 1, xs);
    ref.v_ref.assign(static_cast<size_t>(K), Eigen::Vector3d::Zero());
    ref.vc_ref_bound.vertices.push_back(Eigen::Vector3d::Zero());
    ref.validate(sys);
    return ref;
  }

  // Steady-state sinusoidal response: with v_k = Re(a z0^k) the state
  // Re(w z0^k), w = (z0 I - A)^-1 B a, satisfies the recursion identically.
  // a is chosen so the position component of w equals the radius.
  using cplx = std::complex<double>;
  const double theta = cfg.reference.rate * cfg.ts;
  const cplx z0 = std::polar(1.0, theta);
  Eigen::Matrix2cd M = z0 * Eigen::Matrix2cd::Identity() - sys.A.cast<cplx>();
  const Eigen::Vector2cd wb = M.inverse() * sys.B.cast<cplx>();
  const cplx a = cfg.reference.radius / wb(0);
  const Eigen::Vector2cd w = wb * a;

  std::array<Eigen::Vector2d, 3> xs = {Eigen::Vector2d(w(0).real(), w(1).real()),
                                       Eigen::Vector2d((-cplx(0, 1) * w(0)).real(),
                                                       (-cplx(0, 1) * w(1)).real()),
                                       Eigen::Vector2d(cfg.reference.altitude, 0.0)};
  ref.xi_ref.push_back(xs);
  for (int k = 0; k < K; ++k) {
    const cplx zk = std::polar(1.0, theta * k);
    const Eigen::Vector3d v((a * zk).real(), (-cplx(0, 1) * a * zk).real(), 0.0);
    ref.v_ref.push_back(v);
    for (int i = 0; i < 3; ++i)
      xs[static_cast<size_t>(i)] =
          sys.A * xs[static_cast<size_t>(i)] + sys.B * v(i);
    ref.xi_ref.push_back(xs);
  }
  for (const auto& v : ref.v_ref) {
    bool dup = false;
    for (const auto& g : ref.vc_ref_bound.vertices)
      if ((g - v).norm() <= 1e-12) {
        dup = true;
        break;
      }
    if (!dup) ref.vc_ref_bound.vertices.push_back(v);
  }
  ref.validate(sys);
  return ref;
}

std::array<Eigen::Vector2d, 3> step_plant(const LinearSystem2D& sys,
                                          const std::array<Eigen::Vector2d, 3>& state,
                                          const PhysicalInput& u, double psi, double g) {
  const Eigen::Vector3d a = plant_accel(u, psi, g);
  std::array<Eigen::Vector2d, 3> next;
  for (int i = 0; i < 3; ++i)
    next[static_cast<size_t>(i)] = sys.A * state[static_cast<size_t>(i)] + sys.B * a(i);
  return next;
}

Controllers prepare_controllers(const ScenarioConfig& cfg) {
  if (cfg.kind == ControllerKind::explicit_decoupled)
    return prepare_controllers(cfg, synthesize(cfg));
  return prepare_controllers(cfg, ControllerBundle{});
}

Controllers prepare_controllers(const ScenarioConfig& cfg, ControllerBundle bundle) {
  cfg.validate();
  Controllers out;
  out.kind = cfg.kind;
  switch (cfg.kind) {
    case ControllerKind::explicit_decoupled:
      out.bundle = std::move(bundle);
      break;
    case ControllerKind::implicit_decoupled: {
      for (const AxisSpec& s : make_axis_specs(cfg)) out.impc_axes.emplace_back(s);
      break;
    }
    case ControllerKind::implicit_coupled: {
      HPolytope poly = normalize_rows(build_vc_polytope(cfg.vc, cfg.l1, cfg.l2));
      if (cfg.reference.tracking()) {
        const TrackingReference ref = make_reference(cfg);
        poly = remove_redundant(pontryagin_diff(poly, ref.vc_ref_bound));
      }
      const CoupledSpec cs = build_coupled_spec(specs_with_box(cfg, cfg.resolved_vbar()), poly);
      out.impc_coupled = std::make_unique<CoupledImpc>(cs);
      break;
    }
  }
  return out;
}

SimTrace run(const ScenarioConfig& cfg, const Controllers& ctrls, bool linear_plant) {
  cfg.validate();
  if (ctrls.kind != cfg.kind) throw Error("bad_config", "controller kind does not match config");
  const LinearSystem2D sys = LinearSystem2D::double_integrator(cfg.ts);
  const int K = cfg.steps();
  const bool tracking = cfg.reference.tracking();

  TrackingReference ref_storage;
  const TrackingReference* ref = nullptr;
  if (tracking) {
    ref_storage = make_reference(cfg);
    ref = &ref_storage;
  }

  // Audit data: the box the correction must respect. The coupled kind is
  // bounded by the polytope instead and audited against it directly.
  Eigen::Vector3d audit_box = Eigen::Vector3d::Zero();
  if (cfg.kind == ControllerKind::explicit_decoupled) {
    for (int i = 0; i < 3; ++i) audit_box(i) = ctrls.bundle.axes[static_cast<size_t>(i)].spec.vbar;
  } else if (cfg.kind == ControllerKind::implicit_decoupled) {
    const std::array<AxisSpec, 3> sp = make_axis_specs(cfg);
    for (int i = 0; i < 3; ++i) audit_box(i) = sp[static_cast<size_t>(i)].vbar;
  }

  SimTrace trace;
  trace.summary.region_counts = {0, 0, 0};
  if (cfg.kind == ControllerKind::explicit_decoupled)
    for (int i = 0; i < 3; ++i)
      trace.summary.region_counts[static_cast<size_t>(i)] =
          static_cast<int>(ctrls.bundle.axes[static_cast<size_t>(i)].regions.size());

  std::array<Eigen::Vector2d, 3> state = cfg.xi0;

  auto shifted = [&](const std::array<Eigen::Vector2d, 3>& st, int k) {
    std::array<Eigen::Vector2d, 3> xi = st;
    if (tracking) {
      for (int i = 0; i < 3; ++i) xi[static_cast<size_t>(i)] -= ref->state_at(k)[static_cast<size_t>(i)];
    } else {
      const Eigen::Vector3d pr = reference_position(cfg, ref, k);
      for (int i = 0; i < 3; ++i) xi[static_cast<size_t>(i)](0) -= pr(i);
    }
    return xi;
  };

  // One discarded warm-up evaluation so timing reflects warm caches.
  try {
    const auto xi = shifted(state, 0);
    switch (cfg.kind) {
      case ControllerKind::explicit_decoupled:
        if (tracking) {
          control_step(ctrls.bundle, state, cfg.psi, cfg.vc.g, ref, 0);
        } else {
          control_step(ctrls.bundle, xi, cfg.psi, cfg.vc.g, nullptr, 0);
        }
        break;
      case ControllerKind::implicit_decoupled:
        for (int i = 0; i < 3; ++i) ctrls.impc_axes[static_cast<size_t>(i)].solve(xi[static_cast<size_t>(i)]);
        break;
      case ControllerKind::implicit_coupled: {
        Eigen::VectorXd zeta(6);
        for (int i = 0; i < 3; ++i) zeta.segment<2>(2 * i) = xi[static_cast<size_t>(i)];
        ctrls.impc_coupled->solve(zeta);
        break;
      }
    }
  } catch (const Error&) {
  }

  double eval_sum = 0.0;
  int eval_count = 0;

  for (int k = 0; k <= K; ++k) {
    TraceRow row;
    row.t = k * cfg.ts;
    for (int i = 0; i < 3; ++i) {
      row.p(i) = state[static_cast<size_t>(i)](0);
      row.vel(i) = state[static_cast<size_t>(i)](1);
    }

    bool feasible = true;
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    PhysicalInput u;
    double eval_s = 0.0;
    const auto xi = shifted(state, k);

    try {
      switch (cfg.kind) {
        case ControllerKind::explicit_decoupled: {
          StepResult res;
          if (tracking) {
            res = control_step(ctrls.bundle, state, cfg.psi, cfg.vc.g, ref, k);
          } else {
            res = control_step(ctrls.bundle, xi, cfg.psi, cfg.vc.g, nullptr, k);
          }
          v = res.v;
          u = res.u;
          row.reg = res.region;
          eval_s = res.eval_time_s;
          break;
        }
        case ControllerKind::implicit_decoupled: {
          for (int i = 0; i < 3; ++i) {
            const ImpcAxis::Result r =
                ctrls.impc_axes[static_cast<size_t>(i)].solve(xi[static_cast<size_t>(i)]);
            eval_s += r.solve_time_s;
            if (r.status == QpStatus::infeasible) {
              feasible = false;
              break;
            }
            v(i) = r.v;
          }
          if (feasible) {
            if (tracking) v += ref->input_at(k);
            u = flat_to_physical(v, cfg.psi, cfg.vc.g);
          }
          break;
        }
        case ControllerKind::implicit_coupled: {
          Eigen::VectorXd zeta(6);
          for (int i = 0; i < 3; ++i) zeta.segment<2>(2 * i) = xi[static_cast<size_t>(i)];
          const CoupledImpc::Result r = ctrls.impc_coupled->solve(zeta);
          eval_s = r.solve_time_s;
          if (r.status == QpStatus::infeasible) {
            feasible = false;
          } else {
            v = r.v;
            if (tracking) v += ref->input_at(k);
            u = flat_to_physical(v, cfg.psi, cfg.vc.g);
          }
          break;
        }
      }
    } catch (const Error& e) {
      if (e.code() == "infeasible_state" || e.code() == "outside_flat_domain") {
        feasible = false;
      } else {
        throw;
      }
    }

    row.feasible = feasible;
    if (!feasible) {
      trace.rows.push_back(row);
      trace.summary.completed = false;
      break;
    }

    row.v = v;
    row.u = u;
    row.eval_us = eval_s * 1e6;
    eval_sum += row.eval_us;
    ++eval_count;
    trace.summary.max_eval_us = std::max(trace.summary.max_eval_us, row.eval_us);

    // Constraint audit against the formulation the controller solved.
    const Eigen::Vector3d correction = tracking ? Eigen::Vector3d(v - ref->input_at(k)) : v;
    if (cfg.kind == ControllerKind::implicit_coupled) {
      const HPolytope& poly = ctrls.impc_coupled->spec().Vc_poly;
      Eigen::VectorXd c3 = correction;
      if (!poly.contains(c3, 1e-7)) ++trace.summary.viol_input_box;
    } else {
      for (int i = 0; i < 3; ++i)
        if (std::abs(correction(i)) > audit_box(i) + 1e-9) {
          ++trace.summary.viol_input_box;
          break;
        }
    }
    if (!vc_contains(v, cfg.vc, 1e-7)) ++trace.summary.viol_vc;
    if (!in_u(u, cfg.vc, 1e-7)) ++trace.summary.viol_input_set;
    for (int i = 0; i < 3; ++i) {
      if (std::abs(xi[static_cast<size_t>(i)](0)) > cfg.pbar(i) + 1e-7 ||
          std::abs(xi[static_cast<size_t>(i)](1)) > cfg.velbar(i) + 1e-7) {
        ++trace.summary.viol_state_box;
        break;
      }
    }

    trace.rows.push_back(row);
    if (k == K) break;

    if (linear_plant) {
      for (int i = 0; i < 3; ++i)
        state[static_cast<size_t>(i)] = sys.A * state[static_cast<size_t>(i)] + sys.B * v(i);
    } else {
      state = step_plant(sys, state, u, cfg.psi, cfg.vc.g);
    }
  }

  double se = 0.0;
  for (size_t k = 0; k < trace.rows.size(); ++k) {
    const Eigen::Vector3d pr = reference_position(cfg, ref, static_cast<int>(k));
    se += (trace.rows[k].p - pr).squaredNorm();
  }
  trace.summary.rms_m = trace.rows.empty() ? 0.0 : std::sqrt(se / static_cast<double>(trace.rows.size()));
  trace.summary.mean_eval_us = eval_count > 0 ? eval_sum / eval_count : 0.0;
  return trace;
}

BenchReport benchmark(const ScenarioConfig& cfg) {
  BenchReport rep;

  ScenarioConfig ce = cfg;
  ce.kind = ControllerKind::explicit_decoupled;
  ScenarioConfig cd = cfg;
  cd.kind = ControllerKind::implicit_decoupled;
  ScenarioConfig cc = cfg;
  cc.kind = ControllerKind::implicit_coupled;

  const ControllerBundle bundle = synthesize(ce);
  const Controllers ctrl_e = prepare_controllers(ce, bundle);
  const Controllers ctrl_d = prepare_controllers(cd);
  const Controllers ctrl_c = prepare_controllers(cc);

  const SimTrace te = run(ce, ctrl_e);
  const SimTrace td = run(cd, ctrl_d);
  const SimTrace tc = run(cc, ctrl_c);

  rep.rms_explicit = te.summary.rms_m;
  rep.rms_implicit_decoupled = td.summary.rms_m;
  rep.rms_implicit_coupled = tc.summary.rms_m;
  rep.mean_explicit_us = te.summary.mean_eval_us;
  rep.max_explicit_us = te.summary.max_eval_us;
  rep.mean_decoupled_us = td.summary.mean_eval_us;
  rep.max_decoupled_us = td.summary.max_eval_us;
  rep.mean_coupled_us = tc.summary.mean_eval_us;
  rep.max_coupled_us = tc.summary.max_eval_us;
  rep.time_ratio = rep.mean_explicit_us > 0.0 ? rep.mean_coupled_us / rep.mean_explicit_us : 0.0;
  rep.region_counts = te.summary.region_counts;
  rep.controller_bytes = serialize_controller(bundle).size();
  rep.completed_explicit = te.summary.completed;
  rep.completed_decoupled = td.summary.completed;
  rep.completed_coupled = tc.summary.completed;

  // Law agreement audited on the explicit run's own visited states.
  TrackingReference ref_storage;
  const TrackingReference* ref = nullptr;
  if (cfg.reference.tracking()) {
    ref_storage = make_reference(ce);
    ref = &ref_storage;
  }
  for (size_t k = 0; k < te.rows.size(); ++k) {
    if (!te.rows[k].feasible) break;
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector2d xi(te.rows[k].p(i), te.rows[k].vel(i));
      if (ref) {
        xi -= ref->state_at(static_cast<int>(k))[static_cast<size_t>(i)];
      } else {
        xi(0) -= reference_position(ce, nullptr, static_cast<int>(k))(i);
      }
      const ImpcAxis::Result r = ctrl_d.impc_axes[static_cast<size_t>(i)].solve(xi);
      if (r.status == QpStatus::infeasible) continue;
      const double ve = te.rows[k].v(i) - (ref ? ref->input_at(static_cast<int>(k))(i) : 0.0);
      rep.max_control_gap = std::max(rep.max_control_gap, std::abs(ve - r.v));
    }
  }

  // Sequential multi-drone sweep over perturbed starts, explicit controller.
  // Regulation runs in setpoint-shifted coordinates; the dynamics are
  // shift-invariant so the closed loop is unchanged.
  std::array<Eigen::Vector2d, 3> base = ce.xi0;
  if (!ce.reference.tracking()) {
    const Eigen::Vector3d pr = ce.reference.kind == ReferenceSpec::Kind::setpoint
                                   ? ce.reference.target
                                   : Eigen::Vector3d::Zero();
    for (int i = 0; i < 3; ++i) base[static_cast<size_t>(i)](0) -= pr(i);
  }
  std::mt19937 rng(static_cast<unsigned>(cfg.seed));
  std::uniform_real_distribution<double> unif(-0.05, 0.05);
  const int K = ce.steps();
  for (int n : {1, 2, 4, 8}) {
    std::vector<std::array<Eigen::Vector2d, 3>> states(static_cast<size_t>(n), base);
    for (int d = 1; d < n; ++d)
      for (int i = 0; i < 3; ++i) {
        states[static_cast<size_t>(d)][static_cast<size_t>(i)](0) += unif(rng);
        states[static_cast<size_t>(d)][static_cast<size_t>(i)](1) += unif(rng);
      }
    const LinearSystem2D sys = LinearSystem2D::double_integrator(ce.ts);
    double total_us = 0.0;
    int steps_done = 0;
    for (int k = 0; k < K; ++k) {
      double step_us = 0.0;
      for (auto& st : states) {
        const StepResult res = control_step(ctrl_e.bundle, st, ce.psi, ce.vc.g,
                                            ce.reference.tracking() ? ref : nullptr, k);
        step_us += res.eval_time_s * 1e6;
        st = step_plant(sys, st, res.u, ce.psi, ce.vc.g);
      }
      total_us += step_us;
      ++steps_done;
    }
    rep.drone_sweep.emplace_back(n, steps_done > 0 ? total_us / steps_done : 0.0);
  }
  return rep;
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc()) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
  return std::string(buf, res.ptr);
}

void write_trace_csv(const std::string& path, const SimTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io_error", "cannot open " + path + " for writing");
  out << "t,x,y,z,vx,vy,vz,v1,v2,v3,T,phi,theta,reg1,reg2,reg3,eval_time_us,feasible\n";
  for (const TraceRow& r : trace.rows) {
    out << format_double(r.t);
    for (int i = 0; i < 3; ++i) out << ',' << format_double(r.p(i));
    for (int i = 0; i < 3; ++i) out << ',' << format_double(r.vel(i));
    for (int i = 0; i < 3; ++i) out << ',' << format_double(r.v(i));
    out << ',' << format_double(r.u.T) << ',' << format_double(r.u.phi) << ','
        << format_double(r.u.theta);
    for (int i = 0; i < 3; ++i) out << ',' << r.reg[static_cast<size_t>(i)];
    out << ',' << format_double(r.eval_us) << ',' << (r.feasible ? 1 : 0) << '\n';
  }
  if (!out) throw Error("io_error", "failed writing " + path);
}

void write_summary_json(const std::string& path, const SimTrace& trace) {
  nlohmann::json doc;
  doc["rms_m"] = trace.summary.rms_m;
  doc["max_eval_us"] = trace.summary.max_eval_us;
  doc["mean_eval_us"] = trace.summary.mean_eval_us;
  doc["regions"] = trace.summary.region_counts;
  doc["violations"] = {{"input_box", trace.summary.viol_input_box},
                       {"input_set", trace.summary.viol_input_set},
                       {"state_box", trace.summary.viol_state_box},
                       {"vc", trace.summary.viol_vc},
                       {"completed", trace.summary.completed}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io_error", "cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw Error("io_error", "failed writing " + path);
}

}  // namespace flatmpc
