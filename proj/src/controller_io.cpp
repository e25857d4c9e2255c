#include "flatmpc/controller_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace flatmpc {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw Error("controller_corrupt", "malformed matrix");
  const int r = static_cast<int>(j.size());
  const int c = static_cast<int>(j[0].size());
  Eigen::MatrixXd M(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(j[static_cast<size_t>(i)].size()) != c)
      throw Error("controller_corrupt", "ragged matrix");
    for (int k = 0; k < c; ++k) M(i, k) = j[static_cast<size_t>(i)][static_cast<size_t>(k)].get<double>();
  }
  return M;
}

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw Error("controller_corrupt", "malformed vector");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

json bundle_to_json(const ControllerBundle& bundle) {
  const AxisSpec& s0 = bundle.axes[0].spec;
  json doc;
  doc["schema_version"] = 1;
  doc["spec"] = {{"ts", s0.sys.ts},
                 {"np", s0.Np},
                 {"q", matrix_to_json(s0.Q)},
                 {"r", s0.R},
                 {"p", matrix_to_json(s0.P)}};
  doc["tolerances"] = {{"point_location", 1e-9}, {"facet", 1e-9}, {"law_check", 1e-6}};
  json axes = json::array();
  for (const AxisController& ax : bundle.axes) {
    json a;
    a["vbar"] = ax.spec.vbar;
    a["pbar"] = ax.spec.pbar;
    a["velbar"] = ax.spec.velbar;
    a["xf"] = {{"H", matrix_to_json(ax.spec.Xf.H)}, {"h", vector_to_json(ax.spec.Xf.h)}};
    json regions = json::array();
    for (const CriticalRegion& cr : ax.regions) {
      regions.push_back({{"H", matrix_to_json(cr.region.H)},
                         {"h", vector_to_json(cr.region.h)},
                         {"F", matrix_to_json(cr.F)},
                         {"mu", vector_to_json(cr.mu)},
                         {"active_set", cr.active_set}});
    }
    a["regions"] = std::move(regions);
    axes.push_back(std::move(a));
  }
  doc["axes"] = std::move(axes);
  return doc;
}

}  // namespace

uint64_t fnv1a64(std::string_view data) {
  uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string serialize_controller(const ControllerBundle& bundle) {
  json doc = bundle_to_json(bundle);
  const uint64_t sum = fnv1a64(doc.dump());
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(sum));
  doc["checksum"] = hex;
  return doc.dump();
}

ControllerBundle deserialize_controller(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception&) {
    throw Error("controller_corrupt", "controller file is not valid JSON");
  }
  try {
    if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer())
      throw Error("controller_corrupt", "missing schema version");
    if (doc["schema_version"].get<int>() != 1)
      throw Error("controller_version", "unsupported controller schema version");
    if (!doc.contains("checksum") || !doc["checksum"].is_string())
      throw Error("controller_corrupt", "missing checksum");
    const std::string stored = doc["checksum"].get<std::string>();
    doc.erase("checksum");
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(doc.dump())));
    if (stored != hex) throw Error("controller_corrupt", "checksum mismatch");

    ControllerBundle bundle;
    const json& spec = doc.at("spec");
    const double ts = spec.at("ts").get<double>();
    const int np = spec.at("np").get<int>();
    const Eigen::MatrixXd Q = matrix_from_json(spec.at("q"));
    const double R = spec.at("r").get<double>();
    const Eigen::MatrixXd P = matrix_from_json(spec.at("p"));
    const json& axes = doc.at("axes");
    if (!axes.is_array() || axes.size() != 3)
      throw Error("controller_corrupt", "expected three axes");
    for (int i = 0; i < 3; ++i) {
      const json& a = axes[static_cast<size_t>(i)];
      AxisController& ax = bundle.axes[static_cast<size_t>(i)];
      ax.spec.sys = LinearSystem2D::double_integrator(ts);
      ax.spec.Q = Q;
      ax.spec.R = R;
      ax.spec.P = P;
      ax.spec.Np = np;
      ax.spec.vbar = a.at("vbar").get<double>();
      ax.spec.pbar = a.at("pbar").get<double>();
      ax.spec.velbar = a.at("velbar").get<double>();
      ax.spec.Xf.H = matrix_from_json(a.at("xf").at("H"));
      ax.spec.Xf.h = vector_from_json(a.at("xf").at("h"));
      for (const json& rj : a.at("regions")) {
        CriticalRegion cr;
        cr.region.H = matrix_from_json(rj.at("H"));
        cr.region.h = vector_from_json(rj.at("h"));
        cr.F = matrix_from_json(rj.at("F"));
        cr.mu = vector_from_json(rj.at("mu"));
        cr.active_set = rj.at("active_set").get<std::vector<int>>();
        if (cr.region.H.rows() != cr.region.h.size() || cr.region.H.cols() != 2 ||
            cr.F.rows() != np || cr.F.cols() != 2 || cr.mu.size() != np)
          throw Error("controller_corrupt", "region shape mismatch");
        ax.regions.push_back(std::move(cr));
      }
      if (ax.regions.empty()) throw Error("controller_corrupt", "axis without regions");
    }
    return bundle;
  } catch (const json::exception&) {
    throw Error("controller_corrupt", "controller file missing required fields");
  }
}

void save_controller(const std::string& path, const ControllerBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io_error", "cannot open " + path + " for writing");
  const std::string bytes = serialize_controller(bundle);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("io_error", "failed writing " + path);
}

ControllerBundle load_controller(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_controller(ss.str());
}

}  // namespace flatmpc
