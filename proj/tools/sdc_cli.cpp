// sdc: command-line front end.
//
//   sdc distance  --vr 100 --vf 100 --unit kmh --mode pbv
//   sdc sdc       --M 10 --N 2 --V 100 [--per-lane-packing]
//   sdc sweep     --out sweep.csv [--e-tau 0.95:1:0.01 ...]
//   sdc simulate  --config scenario.json [--trace-out trace.csv] [--summary-out summary.json]
//   sdc monitor   --trace trace.csv [--formula "G[0,T](BER -> !Y)"] [--strict]
//
// Exit codes: 0 ok / safe / satisfied, 1 violated, 2 usage or input error.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdc/scenario_json.hpp"
#include "sdc/sdc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolated = 1;
constexpr int kExitError = 2;

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct FleetFlags {
  double brake = 9.0;
  double acc = 3.0;
  double length = sdc::kDefaultVehicleLength;

  void add(CLI::App* cmd) {
    cmd->add_option("--brake", brake, "full-brake deceleration magnitude [m/s^2]")->capture_default_str();
    cmd->add_option("--acc", acc, "maximum acceleration [m/s^2]")->capture_default_str();
    cmd->add_option("--L", length, "vehicle length [m]")->capture_default_str();
  }

  sdc::VehicleParams params(double speed, double tau0) const { return {length, brake, acc, speed, tau0}; }
};

struct CooperativeFlags {
  double e_L = 1.0;
  double e_V = 1.0;
  double e_brake = 1.0;
  double e_tau = 1.0;
  double eta = 0.0;
  std::string latency;
  std::string regime = "conservative";

  void add(CLI::App* cmd) {
    cmd->add_option("--e-L", e_L, "length deviation ratio")->capture_default_str();
    cmd->add_option("--e-V", e_V, "front speed deviation ratio")->capture_default_str();
    cmd->add_option("--e-brake", e_brake, "brake deviation ratio")->capture_default_str();
    cmd->add_option("--e-tau", e_tau, "response time deviation ratio")->capture_default_str();
    auto* eta_opt = cmd->add_option("--eta", eta, "V2V latency [s]")->capture_default_str();
    cmd->add_option("--latency", latency, "latency preset: dsrc, 5g, 4g")->excludes(eta_opt);
    cmd->add_option("--regime", regime, "deviation regime: conservative, good-perception, unchecked")
        ->capture_default_str();
  }

  sdc::DeviationSet deviations() const { return {e_L, e_V, e_brake, e_tau}; }
  double latency_s() const { return latency.empty() ? eta : sdc::latency_preset(latency).lo; }
  sdc::DeviationRegime parsed_regime() const { return sdc::parse_regime(regime); }
};

double to_mps(double v, const std::string& unit) {
  if (unit == "kmh") return sdc::units::kmh_to_mps(v);
  if (unit == "mps") return v;
  throw sdc::InvalidParameter("unknown unit '" + unit + "' (expected kmh or mps)");
}

// ---------------------------------------------------------------- distance

struct DistanceCmd {
  double vr = 0.0;
  double vf = 0.0;
  std::string unit = "mps";
  double tau0 = 0.5;
  std::string mode = "pbv";
  FleetFlags fleet;
  CooperativeFlags coop;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("distance", "safe longitudinal distance for one vehicle pair");
    cmd->add_option("--vr", vr, "rear vehicle speed")->required();
    cmd->add_option("--vf", vf, "front vehicle speed")->required();
    cmd->add_option("--unit", unit, "speed unit: kmh or mps")->capture_default_str();
    cmd->add_option("--tau0", tau0, "machine response time [s]")->capture_default_str();
    cmd->add_option("--mode", mode, "pbv, cbv or both")->capture_default_str();
    fleet.add(cmd);
    coop.add(cmd);
  }

  int run() const {
    const double v_rear = to_mps(vr, unit);
    const double v_front = to_mps(vf, unit);
    const sdc::VehicleParams rear = fleet.params(v_rear, tau0);
    const sdc::VehicleParams front = fleet.params(v_front, tau0);
    std::cout << "vr_mps=" << num(v_rear) << " vf_mps=" << num(v_front) << " a_max_brake=" << num(fleet.brake, 3)
              << " a_max_acc=" << num(fleet.acc, 3) << " tau0_s=" << num(tau0, 3) << " L_m=" << num(fleet.length, 3)
              << '\n';
    if (mode != "pbv" && mode != "cbv" && mode != "both") {
      throw sdc::InvalidParameter("unknown mode '" + mode + "' (expected pbv, cbv or both)");
    }
    if (mode == "pbv" || mode == "both") {
      std::cout << "D_pbv_m=" << num(sdc::safe_longitudinal_distance(rear, front, tau0)) << '\n';
    }
    if (mode == "cbv" || mode == "both") {
      const auto dev = coop.deviations();
      std::cout << "e_L=" << num(dev.e_L, 4) << " e_V=" << num(dev.e_V_f, 4) << " e_brake=" << num(dev.e_brake, 4)
                << " e_tau=" << num(dev.e_tau, 4) << " eta_s=" << num(coop.latency_s()) << '\n';
      std::cout << "D_cbv_m="
                << num(sdc::corrected_safe_distance(rear, front, dev, coop.latency_s(), coop.parsed_regime())) << '\n';
    }
    return kExitOk;
  }
};

// ---------------------------------------------------------------- sdc

struct RoadFlags {
  sdc::RoadSpec road;

  void add(CLI::App* cmd, bool with_speed = true) {
    cmd->add_option("--M", road.length_km, "road length [km]")->capture_default_str();
    cmd->add_option("--N", road.lanes, "lane count")->capture_default_str();
    if (with_speed) cmd->add_option("--V", road.speed_floor_kmh, "speed floor [km/h]")->capture_default_str();
  }
};

struct SdcCmd {
  FleetFlags fleet;
  CooperativeFlags coop;
  RoadFlags road;
  double tau0_pbv = 0.5;
  double tau0_cbv = 0.4;
  bool per_lane = false;
  bool as_json = false;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("sdc", "safe driving capacity SDC(M, N, V) for PBV and CBV roads");
    fleet.add(cmd);
    coop.add(cmd);
    road.add(cmd);
    cmd->add_option("--tau0-pbv", tau0_pbv, "PBV machine response time [s]")->capture_default_str();
    cmd->add_option("--tau0-cbv", tau0_cbv, "CBV machine response time [s]")->capture_default_str();
    cmd->add_flag("--per-lane-packing", per_lane, "pack each lane separately: N*(floor((M-L)/D)+1)");
    cmd->add_flag("--json", as_json, "print the report as JSON");
  }

  int run() const {
    sdc::CapacityInputs in;
    in.fleet = fleet.params(0.0, tau0_pbv);
    in.tau0_pbv = tau0_pbv;
    in.tau0_cbv = tau0_cbv;
    in.road = road.road;
    in.dev = coop.deviations();
    in.eta = coop.latency_s();
    in.regime = coop.parsed_regime();
    in.packing = sdc::Packing::Aggregate;
    const sdc::CapacityReport agg = sdc::capacity_report(in);
    in.packing = sdc::Packing::PerLane;
    const sdc::CapacityReport lane = sdc::capacity_report(in);
    const sdc::CapacityReport& chosen = per_lane ? lane : agg;

    if (as_json) {
      nlohmann::json j = {{"M_km", in.road.length_km},
                          {"N", in.road.lanes},
                          {"V_kmh", in.road.speed_floor_kmh},
                          {"L_m", fleet.length},
                          {"L_cbv_m", chosen.vehicle_length_cbv},
                          {"a_max_brake", fleet.brake},
                          {"a_max_acc", fleet.acc},
                          {"tau0_pbv_s", tau0_pbv},
                          {"tau0_cbv_s", tau0_cbv},
                          {"e_L", in.dev.e_L},
                          {"e_V", in.dev.e_V_f},
                          {"e_brake", in.dev.e_brake},
                          {"e_tau", in.dev.e_tau},
                          {"eta_s", in.eta},
                          {"packing", per_lane ? "per-lane" : "aggregate"},
                          {"D_pbv_m", chosen.expected_distance_pbv},
                          {"D_cbv_m", chosen.expected_distance_cbv},
                          {"SDC_pbv", chosen.sdc_pbv},
                          {"SDC_cbv", chosen.sdc_cbv}};
      if (per_lane) {
        j["SDC_pbv_aggregate"] = agg.sdc_pbv;
        j["SDC_cbv_aggregate"] = agg.sdc_cbv;
      }
      std::cout << j.dump(2) << '\n';
      return kExitOk;
    }
    std::cout << "SDC(" << num(in.road.length_km, 3) << "," << in.road.lanes << "," << num(in.road.speed_floor_kmh, 3)
              << ") L_m=" << num(fleet.length, 3) << " L_cbv_m=" << num(chosen.vehicle_length_cbv, 4)
              << " a_max_brake=" << num(fleet.brake, 3) << " a_max_acc=" << num(fleet.acc, 3)
              << " tau0_pbv_s=" << num(tau0_pbv, 3) << " tau0_cbv_s=" << num(tau0_cbv, 3) << '\n';
    std::cout << "e_L=" << num(in.dev.e_L, 4) << " e_V=" << num(in.dev.e_V_f, 4) << " e_brake=" << num(in.dev.e_brake, 4)
              << " e_tau=" << num(in.dev.e_tau, 4) << " eta_s=" << num(in.eta) << '\n';
    std::cout << "packing=" << (per_lane ? "per-lane" : "aggregate") << '\n';
    std::cout << "D_pbv_m=" << num(chosen.expected_distance_pbv) << " D_cbv_m=" << num(chosen.expected_distance_cbv)
              << '\n';
    std::cout << "SDC_pbv=" << chosen.sdc_pbv << " SDC_cbv=" << chosen.sdc_cbv << '\n';
    if (per_lane) {
      std::cout << "SDC_pbv_aggregate=" << agg.sdc_pbv << " SDC_cbv_aggregate=" << agg.sdc_cbv << '\n';
    }
    return kExitOk;
  }
};

// ---------------------------------------------------------------- sweep

double parse_number(const std::string& text) {
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument(text);
  return v;
}

// Axis syntax: comma-separated items, each a number or first:last:step.
std::vector<double> parse_axis(const std::vector<std::string>& items, const char* name) {
  std::vector<double> out;
  for (const std::string& raw : items) {
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      try {
        const auto c1 = item.find(':');
        if (c1 == std::string::npos) {
          out.push_back(parse_number(item));
          continue;
        }
        const auto c2 = item.find(':', c1 + 1);
        if (c2 == std::string::npos) throw std::invalid_argument(item);
        const double first = parse_number(item.substr(0, c1));
        const double last = parse_number(item.substr(c1 + 1, c2 - c1 - 1));
        const double step = parse_number(item.substr(c2 + 1));
        if (!(step > 0.0) || last < first) throw std::invalid_argument(item);
        const auto count = static_cast<std::size_t>(std::floor((last - first) / step + 1e-9)) + 1;
        for (double v : sdc::linear_axis(first, step, count)) out.push_back(v);
      } catch (const std::exception&) {
        throw CLI::ValidationError(name, "invalid axis item '" + item + "'");
      }
    }
  }
  if (out.empty()) throw CLI::ValidationError(name, "axis is empty");
  return out;
}

std::vector<sdc::LatencyValue> parse_eta_axis(const std::vector<std::string>& items) {
  std::vector<sdc::LatencyValue> out;
  for (const std::string& raw : items) {
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      const std::string lower = [&] {
        std::string l = item;
        for (auto& c : l) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return l;
      }();
      if (lower == "dsrc" || lower == "5g" || lower == "4g") {
        const auto m = sdc::latency_preset(lower);
        out.push_back({m.lo, m.technology});
      } else {
        for (double v : parse_axis({item}, "--eta")) out.push_back({v, ""});
      }
    }
  }
  if (out.empty()) throw CLI::ValidationError("--eta", "axis is empty");
  return out;
}

struct SweepCmd {
  FleetFlags fleet;
  RoadFlags road;
  double tau0_pbv = 0.5;
  double tau0_cbv = 0.4;
  std::vector<std::string> e_tau, e_brake, e_V, e_L, eta, speed;
  std::string out;
  bool per_lane = false;
  CLI::App* cmd = nullptr;

  void add(CLI::App& app) {
    cmd = app.add_subcommand("sweep", "grid sweep over deviations, latency and speed; writes CSV");
    fleet.add(cmd);
    road.add(cmd, false);
    cmd->add_option("--tau0-pbv", tau0_pbv, "PBV machine response time [s]")->capture_default_str();
    cmd->add_option("--tau0-cbv", tau0_cbv, "CBV machine response time [s]")->capture_default_str();
    cmd->add_option("--e-tau", e_tau, "e_tau axis (default 0.95:1:0.01)");
    cmd->add_option("--e-brake", e_brake, "e_brake axis (default 0.95:1:0.01)");
    cmd->add_option("--e-V", e_V, "e_V axis (default 1:1.05:0.01)");
    cmd->add_option("--e-L", e_L, "e_L axis (default 1)");
    cmd->add_option("--eta", eta, "latency axis: seconds or presets (default 5g,dsrc,4g,0.1)");
    cmd->add_option("--speed", speed, "speed axis [km/h] (default 100)");
    cmd->add_option("--out", out, "output CSV path")->required();
    cmd->add_flag("--per-lane-packing", per_lane, "pack each lane separately");
  }

  int run() const {
    sdc::SweepGrid grid = sdc::inaccuracy_study_grid();
    if (cmd->count("--e-tau")) grid.e_tau = parse_axis(e_tau, "--e-tau");
    if (cmd->count("--e-brake")) grid.e_brake = parse_axis(e_brake, "--e-brake");
    if (cmd->count("--e-V")) grid.e_V = parse_axis(e_V, "--e-V");
    if (cmd->count("--e-L")) grid.e_L = parse_axis(e_L, "--e-L");
    if (cmd->count("--eta")) grid.eta = parse_eta_axis(eta);
    if (cmd->count("--speed")) grid.speed_kmh = parse_axis(speed, "--speed");

    const auto report = sdc::check_theorem1(grid, fleet.params(0.0, tau0_pbv), tau0_pbv, tau0_cbv, road.road,
                                            per_lane ? sdc::Packing::PerLane : sdc::Packing::Aggregate);
    std::ofstream file(out);
    if (!file) throw sdc::InvalidInput("cannot open '" + out + "' for writing");
    sdc::io::write_sweep_csv(file, report.rows);
    file.close();
    if (!file) throw sdc::InvalidInput("failed writing '" + out + "'");

    std::cout << "rows=" << report.rows.size() << " rejected=" << report.rejected.size()
              << " violations=" << report.violations.size() << " L_m=" << num(fleet.length, 3) << '\n';
    if (!report.rows.empty()) {
      const auto [lo, hi] = std::minmax_element(report.rows.begin(), report.rows.end(),
                                                [](const auto& a, const auto& b) { return a.sdc_cbv < b.sdc_cbv; });
      std::cout << "SDC_cbv_min=" << lo->sdc_cbv << " SDC_cbv_max=" << hi->sdc_cbv
                << " SDC_cbv_spread=" << (hi->sdc_cbv - lo->sdc_cbv) << '\n';
    }
    constexpr std::size_t kListLimit = 10;
    for (std::size_t i = 0; i < report.rejected.size() && i < kListLimit; ++i) {
      const auto& r = report.rejected[i];
      std::cerr << "rejected e_tau=" << num(r.point.e_tau, 4) << " e_brake=" << num(r.point.e_brake, 4)
                << " e_V=" << num(r.point.e_V, 4) << " e_L=" << num(r.point.e_L, 4) << " eta_s=" << num(r.point.eta.seconds)
                << ": " << r.reason << '\n';
    }
    if (report.rejected.size() > kListLimit) {
      std::cerr << "... " << report.rejected.size() - kListLimit << " more rejected points\n";
    }
    for (const auto& v : report.violations) {
      std::cerr << "violation e_tau=" << num(v.point.e_tau, 4) << " e_brake=" << num(v.point.e_brake, 4)
                << " e_V=" << num(v.point.e_V, 4) << " eta_s=" << num(v.point.eta.seconds) << " SDC_pbv=" << v.sdc_pbv
                << " SDC_cbv=" << v.sdc_cbv << '\n';
    }
    if (!report.rejected.empty()) return kExitError;
    return report.holds() ? kExitOk : kExitViolated;
  }
};

// ---------------------------------------------------------------- simulate

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sdc::InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SimulateCmd {
  std::string config;
  std::string trace_out;
  std::string summary_out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate", "run a sudden-brake scenario from a JSON config");
    cmd->add_option("--config", config, "scenario JSON")->required();
    cmd->add_option("--trace-out", trace_out, "write the trace CSV here");
    cmd->add_option("--summary-out", summary_out, "write the summary JSON here");
  }

  int run() const {
    const auto cfg = sdc::config::parse_scenario(read_file(config));
    const auto result = sdc::sim::run_scenario(cfg);
    if (!trace_out.empty()) {
      std::ofstream f(trace_out, std::ios::binary);
      if (!f) throw sdc::InvalidInput("cannot open '" + trace_out + "' for writing");
      sdc::io::write_trace_csv(f, result.traces);
    }
    const auto summary = sdc::config::summary_json(result, cfg);
    if (!summary_out.empty()) {
      std::ofstream f(summary_out, std::ios::binary);
      if (!f) throw sdc::InvalidInput("cannot open '" + summary_out + "' for writing");
      f << summary.dump(2) << '\n';
    }
    const bool safe = summary["road_safe"].get<bool>();
    std::cout << "mode=" << summary["mode"].get<std::string>() << " L_m=" << num(result.vehicle_length, 3)
              << " dt_s=" << num(result.dt) << " steps=" << result.horizon_steps() << '\n';
    std::cout << "SDT=" << summary["sdt"].get<std::size_t>() << " vehicles=" << result.traces.size()
              << " collisions=" << result.collisions.size() << " road_safe=" << (safe ? "true" : "false") << '\n';
    for (const auto& v : result.vehicles) {
      if (!v.responsible) continue;
      std::cout << "responsible " << v.id;
      for (const auto& why : v.blame) std::cout << " [" << why << "]";
      std::cout << '\n';
    }
    return safe ? kExitOk : kExitViolated;
  }
};

// ---------------------------------------------------------------- monitor

struct MonitorCmd {
  std::string trace;
  std::string formula;
  bool strict = false;
  std::size_t at = 0;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("monitor", "check traces against the safety definition or a formula");
    cmd->add_option("--trace", trace, "trace CSV")->required();
    cmd->add_option("--formula", formula, "bounded LTL formula, e.g. \"G[0,T](BER -> !Y)\"");
    cmd->add_flag("--strict", strict, "out-of-range window indices do not exist (default: clamp to last state)");
    cmd->add_option("--at", at, "evaluation step index")->capture_default_str();
  }

  int run() const {
    std::ifstream in(trace);
    if (!in) throw sdc::InvalidInput("cannot open '" + trace + "'");
    const auto traces = sdc::io::read_trace_csv(in);
    if (formula.empty()) {
      const std::size_t safe = sdc::ltl::sdt(traces);
      std::cout << "SDT=" << safe << " vehicles=" << traces.size()
                << " road_safe=" << (safe == traces.size() ? "true" : "false") << '\n';
      for (const auto& t : traces) {
        if (!sdc::ltl::vehicle_safe(t)) std::cout << "unsafe " << t.vehicle_id << '\n';
      }
      return safe == traces.size() ? kExitOk : kExitViolated;
    }
    const auto f = sdc::ltl::parse_formula(formula);
    const auto mode = strict ? sdc::ltl::BoundaryMode::Strict : sdc::ltl::BoundaryMode::ClampToEnd;
    bool all = true;
    std::cout << "formula " << sdc::ltl::to_string(f) << '\n';
    for (const auto& t : traces) {
      const bool ok = sdc::ltl::evaluate(t, at, f, mode);
      all = all && ok;
      std::cout << t.vehicle_id << ' ' << (ok ? "satisfied" : "violated") << '\n';
    }
    return all ? kExitOk : kExitViolated;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe longitudinal distance, safe driving capacity and trace monitoring"};
  app.require_subcommand(1);
  DistanceCmd distance;
  SdcCmd sdc_cmd;
  SweepCmd sweep;
  SimulateCmd simulate;
  MonitorCmd monitor;
  distance.add(app);
  sdc_cmd.add(app);
  sweep.add(app);
  simulate.add(app);
  monitor.add(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }
  try {
    if (app.got_subcommand("distance")) return distance.run();
    if (app.got_subcommand("sdc")) return sdc_cmd.run();
    if (app.got_subcommand("sweep")) return sweep.run();
    if (app.got_subcommand("simulate")) return simulate.run();
    if (app.got_subcommand("monitor")) return monitor.run();
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const sdc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
