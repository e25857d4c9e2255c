#include "flatmpc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace flatmpc {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error("bad_config", where + " must be a JSON object");
  for (const auto& it : obj.items())
    if (!allowed.count(it.key()))
      throw Error("bad_config", "unknown key \"" + it.key() + "\" in " + where);
}

double get_num(const json& j, const std::string& where) {
  if (!j.is_number()) throw Error("bad_config", where + " must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw Error("bad_config", where + " must be an integer");
  return j.get<int>();
}

Eigen::Vector3d get_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3)
    throw Error("bad_config", where + " must be an array of 3 numbers");
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) v(i) = get_num(j[static_cast<size_t>(i)], where);
  return v;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("bad_config", std::string("config is not valid JSON: ") + e.what());
  }

  ScenarioConfig cfg;
  check_keys(doc,
             {"vc", "weights", "horizon", "ts", "bounds", "input_box", "vc_poly",
              "initial_state", "duration", "controller", "reference", "psi", "n_drones",
              "seed", "region_budget"},
             "config");

  if (doc.contains("vc")) {
    const json& v = doc["vc"];
    check_keys(v, {"t_max", "eps_max", "g"}, "vc");
    if (v.contains("t_max")) cfg.vc.T_max = get_num(v["t_max"], "vc.t_max");
    if (v.contains("eps_max")) cfg.vc.eps_max = get_num(v["eps_max"], "vc.eps_max");
    if (v.contains("g")) cfg.vc.g = get_num(v["g"], "vc.g");
  }
  if (doc.contains("weights")) {
    const json& w = doc["weights"];
    check_keys(w, {"q", "r"}, "weights");
    if (w.contains("q")) {
      if (!w["q"].is_array() || w["q"].size() != 2)
        throw Error("bad_config", "weights.q must be an array of 2 numbers");
      cfg.Q.setZero();
      cfg.Q(0, 0) = get_num(w["q"][0], "weights.q[0]");
      cfg.Q(1, 1) = get_num(w["q"][1], "weights.q[1]");
    }
    if (w.contains("r")) cfg.R = get_num(w["r"], "weights.r");
  }
  if (doc.contains("horizon")) cfg.Np = get_int(doc["horizon"], "horizon");
  if (doc.contains("ts")) cfg.ts = get_num(doc["ts"], "ts");
  if (doc.contains("bounds")) {
    const json& b = doc["bounds"];
    check_keys(b, {"pbar", "velbar"}, "bounds");
    if (b.contains("pbar")) cfg.pbar = get_vec3(b["pbar"], "bounds.pbar");
    if (b.contains("velbar")) cfg.velbar = get_vec3(b["velbar"], "bounds.velbar");
  }
  if (doc.contains("input_box")) {
    const json& ib = doc["input_box"];
    if (ib.is_string() && ib.get<std::string>() == "auto") {
      cfg.vbar_auto = true;
    } else if (ib.is_array()) {
      cfg.vbar_auto = false;
      cfg.vbar = get_vec3(ib, "input_box");
    } else {
      throw Error("bad_config", "input_box must be \"auto\" or an array of 3 numbers");
    }
  }
  if (doc.contains("vc_poly")) {
    const json& vp = doc["vc_poly"];
    check_keys(vp, {"l1", "l2"}, "vc_poly");
    if (vp.contains("l1")) cfg.l1 = get_int(vp["l1"], "vc_poly.l1");
    if (vp.contains("l2")) cfg.l2 = get_int(vp["l2"], "vc_poly.l2");
  }
  if (doc.contains("initial_state")) {
    const json& x0 = doc["initial_state"];
    if (!x0.is_array() || x0.size() != 3)
      throw Error("bad_config", "initial_state must be 3 pairs [position, velocity]");
    for (int i = 0; i < 3; ++i) {
      const json& p = x0[static_cast<size_t>(i)];
      if (!p.is_array() || p.size() != 2)
        throw Error("bad_config", "initial_state must be 3 pairs [position, velocity]");
      cfg.xi0[static_cast<size_t>(i)] =
          Eigen::Vector2d(get_num(p[0], "initial_state"), get_num(p[1], "initial_state"));
    }
  }
  if (doc.contains("duration")) cfg.duration = get_num(doc["duration"], "duration");
  if (doc.contains("controller")) {
    const std::string k = doc["controller"].is_string() ? doc["controller"].get<std::string>() : "";
    if (k == "explicit_decoupled") {
      cfg.kind = ControllerKind::explicit_decoupled;
    } else if (k == "implicit_decoupled") {
      cfg.kind = ControllerKind::implicit_decoupled;
    } else if (k == "implicit_coupled") {
      cfg.kind = ControllerKind::implicit_coupled;
    } else {
      throw Error("bad_config", "controller must be explicit_decoupled, implicit_decoupled "
                                "or implicit_coupled");
    }
  }
  if (doc.contains("reference")) {
    const json& r = doc["reference"];
    if (!r.is_object() || !r.contains("kind") || !r["kind"].is_string())
      throw Error("bad_config", "reference needs a string \"kind\"");
    const std::string kind = r["kind"].get<std::string>();
    if (kind == "setpoint") {
      check_keys(r, {"kind", "target"}, "reference");
      cfg.reference.kind = ReferenceSpec::Kind::setpoint;
      if (r.contains("target")) cfg.reference.target = get_vec3(r["target"], "reference.target");
    } else if (kind == "circle") {
      check_keys(r, {"kind", "radius", "rate", "altitude"}, "reference");
      cfg.reference.kind = ReferenceSpec::Kind::circle;
      if (r.contains("radius")) cfg.reference.radius = get_num(r["radius"], "reference.radius");
      if (r.contains("rate")) cfg.reference.rate = get_num(r["rate"], "reference.rate");
      if (r.contains("altitude"))
        cfg.reference.altitude = get_num(r["altitude"], "reference.altitude");
    } else if (kind == "square") {
      check_keys(r, {"kind", "side", "period", "altitude"}, "reference");
      cfg.reference.kind = ReferenceSpec::Kind::waypoint_square;
      if (r.contains("side")) cfg.reference.side = get_num(r["side"], "reference.side");
      if (r.contains("period")) cfg.reference.period = get_num(r["period"], "reference.period");
      if (r.contains("altitude"))
        cfg.reference.altitude = get_num(r["altitude"], "reference.altitude");
    } else {
      throw Error("bad_config", "reference.kind must be setpoint, circle or square");
    }
  }
  if (doc.contains("psi")) cfg.psi = get_num(doc["psi"], "psi");
  if (doc.contains("n_drones")) cfg.n_drones = get_int(doc["n_drones"], "n_drones");
  if (doc.contains("seed")) cfg.seed = get_int(doc["seed"], "seed");
  if (doc.contains("region_budget")) cfg.region_budget = get_int(doc["region_budget"], "region_budget");

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("bad_config", "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace flatmpc
