#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "flatmpc/config.hpp"
#include "flatmpc/controller_io.hpp"
#include "flatmpc/sim.hpp"

namespace {

using flatmpc::Error;

// Exit ladder: 2 config, 3 synthesis/controller, 4 controller-config
// mismatch, 5 infeasible run, 6 comparison sub-run failure.
int map_exit(const Error& e, int fallback) {
  const std::string& c = e.code();
  if (c == "bad_config" || c == "bad_vc_params" || c == "bad_horizon" ||
      c == "bad_sampling_time")
    return 2;
  if (c == "controller_corrupt" || c == "controller_version" || c == "io_error") return 3;
  return fallback;
}

int fail(const Error& e, int fallback) {
  std::cerr << "error: " << e.what() << " [" << e.code() << "]\n";
  return map_exit(e, fallback);
}

flatmpc::ScenarioConfig read_config(const std::string& path) {
  if (path.empty()) return flatmpc::ScenarioConfig{};
  return flatmpc::load_config(path);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string file_checksum_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return nlohmann::json::parse(bytes).value("checksum", std::string{});
  } catch (const nlohmann::json::exception&) {
    return {};
  }
}

int cmd_synth(const std::string& config_path, const std::string& out_path) {
  flatmpc::ScenarioConfig cfg;
  try {
    cfg = read_config(config_path);
  } catch (const Error& e) {
    return fail(e, 2);
  }
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const flatmpc::ControllerBundle bundle = flatmpc::synthesize(cfg);
    const double offline_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string bytes = flatmpc::serialize_controller(bundle);
    std::ofstream out(out_path, std::ios::binary);
    if (!out || !(out << bytes)) throw Error("io_error", "cannot write " + out_path);
    out.close();

    std::cout << "synthesized " << out_path << " at " << utc_now() << "\n";
    for (int i = 0; i < 3; ++i)
      std::cout << "  axis " << i + 1 << ": " << bundle.axes[static_cast<size_t>(i)].regions.size()
                << " regions (Np=" << bundle.axes[static_cast<size_t>(i)].spec.Np << ")\n";
    std::cout << "  offline time: " << flatmpc::format_double(offline_s) << " s\n";
    std::cout << "  size: " << bytes.size() << " bytes\n";
    return 0;
  } catch (const Error& e) {
    return fail(e, 3);
  }
}

// The controller file must have been synthesized for the same axis problems
// the config implies; anything less makes the trace meaningless.
void check_consistency(const flatmpc::ControllerBundle& bundle, const flatmpc::ScenarioConfig& cfg) {
  if (cfg.kind != flatmpc::ControllerKind::explicit_decoupled)
    throw Error("bad_config", "config selects an implicit controller but a controller file was given");
  const std::array<flatmpc::AxisSpec, 3> want = flatmpc::make_axis_specs(cfg);
  const double tol = 1e-9;
  for (size_t i = 0; i < 3; ++i) {
    const flatmpc::AxisSpec& a = bundle.axes[i].spec;
    const flatmpc::AxisSpec& b = want[i];
    const std::string axis = "axis " + std::to_string(i + 1) + ": controller/config mismatch in ";
    if (a.Np != b.Np) throw Error("bad_config", axis + "horizon");
    if (std::abs(a.sys.ts - b.sys.ts) > tol) throw Error("bad_config", axis + "sampling time");
    if ((a.Q - b.Q).cwiseAbs().maxCoeff() > tol || std::abs(a.R - b.R) > tol)
      throw Error("bad_config", axis + "weights");
    if (std::abs(a.vbar - b.vbar) > tol) throw Error("bad_config", axis + "input bound");
    if (std::abs(a.pbar - b.pbar) > tol || std::abs(a.velbar - b.velbar) > tol)
      throw Error("bad_config", axis + "state bounds");
  }
}

int cmd_simulate(const std::string& controller_path, const std::string& config_path,
                 const std::string& out_path, std::string summary_path) {
  flatmpc::ScenarioConfig cfg;
  try {
    cfg = read_config(config_path);
  } catch (const Error& e) {
    return fail(e, 2);
  }
  flatmpc::ControllerBundle bundle;
  try {
    bundle = flatmpc::load_controller(controller_path);
  } catch (const Error& e) {
    return fail(e, 3);
  }
  try {
    check_consistency(bundle, cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << " [" << e.code() << "]\n";
    return 4;
  }
  try {
    const flatmpc::Controllers ctrls = flatmpc::prepare_controllers(cfg, std::move(bundle));
    const flatmpc::SimTrace trace = flatmpc::run(cfg, ctrls);
    flatmpc::write_trace_csv(out_path, trace);
    if (summary_path.empty()) {
      summary_path = out_path;
      const size_t dot = summary_path.rfind(".csv");
      if (dot != std::string::npos && dot == summary_path.size() - 4) summary_path.resize(dot);
      summary_path += "_summary.json";
    }
    flatmpc::write_summary_json(summary_path, trace);
    std::cout << "trace: " << out_path << "\nsummary: " << summary_path << "\n";
    std::cout << "rms_m: " << flatmpc::format_double(trace.summary.rms_m) << "\n";
    if (!trace.summary.completed) {
      std::cerr << "error: run hit infeasibility; trace truncated [infeasible_state]\n";
      return 5;
    }
    return 0;
  } catch (const Error& e) {
    return fail(e, 2);
  }
}

int cmd_compare(const std::string& config_path, const std::string& out_path) {
  flatmpc::ScenarioConfig cfg;
  try {
    cfg = read_config(config_path);
  } catch (const Error& e) {
    return fail(e, 2);
  }
  try {
    const flatmpc::BenchReport rep = flatmpc::benchmark(cfg);

    const double kRatioMin = 5.0;
    const double kGapMax = 1e-6;
    const bool ratio_pass = rep.time_ratio >= kRatioMin;
    const bool gap_pass = rep.max_control_gap <= kGapMax;
    double four_drone_us = 0.0;
    for (const auto& [n, us] : rep.drone_sweep)
      if (n == 4) four_drone_us = us;
    const bool fleet_pass = four_drone_us > 0.0 && four_drone_us < rep.mean_coupled_us;

    nlohmann::json doc = {
        {"rms_m",
         {{"explicit", rep.rms_explicit},
          {"implicit_decoupled", rep.rms_implicit_decoupled},
          {"implicit_coupled", rep.rms_implicit_coupled}}},
        {"eval_us",
         {{"explicit", {{"mean", rep.mean_explicit_us}, {"max", rep.max_explicit_us}}},
          {"implicit_decoupled", {{"mean", rep.mean_decoupled_us}, {"max", rep.max_decoupled_us}}},
          {"implicit_coupled", {{"mean", rep.mean_coupled_us}, {"max", rep.max_coupled_us}}}}},
        {"time_ratio", rep.time_ratio},
        {"max_control_gap", rep.max_control_gap},
        {"region_counts", rep.region_counts},
        {"controller_bytes", rep.controller_bytes},
        {"completed",
         {{"explicit", rep.completed_explicit},
          {"implicit_decoupled", rep.completed_decoupled},
          {"implicit_coupled", rep.completed_coupled}}},
        {"thresholds", {{"time_ratio_min", kRatioMin}, {"control_gap_max", kGapMax}}},
        {"pass",
         {{"time_ratio", ratio_pass},
          {"control_gap", gap_pass},
          {"four_drone_explicit_vs_one_coupled", fleet_pass},
          {"all", ratio_pass && gap_pass && fleet_pass && rep.all_completed()}}}};
    doc["drone_sweep"] = nlohmann::json::array();
    for (const auto& [n, us] : rep.drone_sweep)
      doc["drone_sweep"].push_back({{"drones", n}, {"mean_step_us", us}});

    std::ofstream out(out_path, std::ios::binary);
    if (!out || !(out << doc.dump(2) << "\n")) throw Error("io_error", "cannot write " + out_path);
    std::cout << "report: " << out_path << "\n";
    std::cout << "time ratio (coupled/explicit): " << flatmpc::format_double(rep.time_ratio)
              << "\n";
    std::cout << "rms_m explicit/coupled: " << flatmpc::format_double(rep.rms_explicit) << " / "
              << flatmpc::format_double(rep.rms_implicit_coupled) << "\n";
    if (!rep.all_completed()) {
      std::cerr << "error: a comparison sub-run hit infeasibility [infeasible_state]\n";
      return 6;
    }
    return 0;
  } catch (const Error& e) {
    return fail(e, 6);
  }
}

int cmd_inspect(const std::string& controller_path) {
  try {
    const flatmpc::ControllerBundle bundle = flatmpc::load_controller(controller_path);
    std::ifstream in(controller_path, std::ios::binary | std::ios::ate);
    const auto size = in ? static_cast<long long>(in.tellg()) : 0;

    std::cout << "controller: " << controller_path << "\n";
    std::cout << "size: " << size << " bytes\n";
    std::cout << "checksum: " << file_checksum_field(controller_path) << "\n";
    for (size_t i = 0; i < 3; ++i) {
      const flatmpc::AxisSpec& s = bundle.axes[i].spec;
      std::cout << "axis " << i + 1 << ": " << bundle.axes[i].regions.size()
                << " regions, Np=" << s.Np << ", ts=" << flatmpc::format_double(s.sys.ts)
                << ", |v|<=" << flatmpc::format_double(s.vbar)
                << ", |p|<=" << flatmpc::format_double(s.pbar)
                << ", |vel|<=" << flatmpc::format_double(s.velbar) << "\n";
    }
    return 0;
  } catch (const Error& e) {
    return fail(e, 3);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit MPC for quadcopter position control in the flat output space"};
  app.require_subcommand(1);

  std::string config_path, out_path, controller_path, summary_path;

  CLI::App* synth = app.add_subcommand("synth", "Synthesize an explicit controller");
  synth->add_option("--config", config_path, "Scenario JSON (defaults when omitted)");
  synth->add_option("--out", out_path, "Controller output path")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "Run the closed loop with a stored controller");
  simulate->add_option("--controller", controller_path, "Controller JSON")->required();
  simulate->add_option("--config", config_path, "Scenario JSON (defaults when omitted)");
  simulate->add_option("--out", out_path, "Trace CSV path")->required();
  simulate->add_option("--summary", summary_path, "Summary JSON path (default: derived from --out)");

  CLI::App* compare = app.add_subcommand("compare", "Benchmark explicit vs implicit controllers");
  compare->add_option("--config", config_path, "Scenario JSON (defaults when omitted)");
  compare->add_option("--out", out_path, "Report JSON path")->required();

  CLI::App* inspect = app.add_subcommand("inspect", "Print a stored controller's layout");
  inspect->add_option("--controller", controller_path, "Controller JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (app.got_subcommand(synth)) return cmd_synth(config_path, out_path);
  if (app.got_subcommand(simulate))
    return cmd_simulate(controller_path, config_path, out_path, summary_path);
  if (app.got_subcommand(compare)) return cmd_compare(config_path, out_path);
  if (app.got_subcommand(inspect)) return cmd_inspect(controller_path);
  return 2;
}
