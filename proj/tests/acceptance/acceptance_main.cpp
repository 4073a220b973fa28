// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "sdc/scenario_json.hpp"
#include "sdc/sdc.hpp"
#include "support/euler_oracle.hpp"
#include "support/reference_ltl.hpp"

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SDC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sdc_acceptance";
  fs::create_directories(dir);
  return dir / name;
}

sdc::VehicleParams highway(double tau0 = 0.5) { return {5.0, 9.0, 3.0, sdc::units::kmh_to_mps(100.0), tau0}; }

testsupport::Car as_car(const sdc::VehicleParams& p) { return {p.length_m, p.a_max_brake, p.a_max_acc, p.speed}; }

// ---------------------------------------------------------------------------

Verdict closed_form_example() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto c = highway();
  const double d = sdc::safe_longitudinal_distance(c, c, 0.5);
  const double lib_oracle = sdc::min_safe_gap_oracle(c, c, 0.5, 1e-3);
  const double euler = testsupport::euler_critical_gap(as_car(c), as_car(c), 0.5, 1e-3);
  const double elapsed = seconds_since(t0);
  v.require(std::round(d * 100.0) / 100.0 == 24.02, "D = " + fmt("%.6f", d));
  v.require(std::abs(lib_oracle - d) <= 0.03, "oracle = " + fmt("%.6f", lib_oracle));
  v.require(std::abs(euler - d) <= 0.03, "euler oracle = " + fmt("%.6f", euler));
  v.require(elapsed < 1.0, "runtime " + fmt("%.3f s", elapsed));
  v.detail = v.pass ? "D=" + fmt("%.4f", d) + " oracle=" + fmt("%.4f", lib_oracle) + " euler=" + fmt("%.4f", euler) +
                          " (" + fmt("%.3f s", elapsed) + ")"
                    : v.detail;
  return v;
}

Verdict randomized_oracle() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> speed(0.0, 40.0), tau(0.0, 2.0), brake(4.0, 11.0), acc(0.5, 5.0),
      len(3.0, 12.0);
  constexpr double dt = 1e-3;
  double worst = 0.0;
  const int draws = 1000;
  for (int i = 0; i < draws; ++i) {
    const double L = len(rng), t = tau(rng), b = brake(rng);
    const sdc::VehicleParams r{L, b, acc(rng), speed(rng), t};
    const sdc::VehicleParams f{L, b, acc(rng), speed(rng), t};
    const double d = sdc::safe_longitudinal_distance(r, f, t);
    const double tol = std::max(1e-2, r.speed * dt);
    const double e1 = std::abs(sdc::min_safe_gap_oracle(r, f, t, dt) - d);
    const double e2 = std::abs(testsupport::euler_critical_gap(as_car(r), as_car(f), t, dt) - d);
    worst = std::max({worst, e1 / tol, e2 / tol});
    v.require(e1 <= tol && e2 <= tol, "draw " + std::to_string(i) + " error " + fmt("%.4f m", std::max(e1, e2)));
  }
  const double elapsed = seconds_since(t0);
  v.require(elapsed < 60.0, "runtime " + fmt("%.1f s", elapsed));
  if (v.pass) v.detail = std::to_string(draws) + " draws, worst error/tolerance " + fmt("%.3f", worst) + " (" +
                         fmt("%.1f s", elapsed) + ")";
  return v;
}

Verdict trivial_branch() {
  Verdict v;
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> speed(0.0, 45.0), tau(0.0, 1.5), brake(4.0, 11.0), acc(0.5, 5.0),
      len(3.0, 12.0);
  int hits = 0;
  while (hits < 1000) {
    const double L = len(rng), t = tau(rng), b = brake(rng);
    const sdc::VehicleParams r{L, b, acc(rng), speed(rng), t};
    const sdc::VehicleParams f{L, b, acc(rng), speed(rng), t};
    if (sdc::time_to_stop_front(f) < sdc::time_to_stop_rear(r, t)) continue;
    ++hits;
    const double d = sdc::safe_longitudinal_distance(r, f, t);
    v.require(d == L, "returned " + fmt("%.17g", d));
  }
  if (v.pass) v.detail = std::to_string(hits) + " draws with T_f >= T_r return exactly L";
  return v;
}

Verdict cooperative_bound() {
  Verdict v;
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> speed(0.0, 40.0), lower(0.5, 1.0), upper(1.0, 1.5), unit(0.0, 1.0);
  const int draws = 5000;
  double closest = -1e300;
  for (int i = 0; i < draws; ++i) {
    const double tau_pbv = 0.1 + unit(rng);
    const double tau0 = tau_pbv * unit(rng);
    const sdc::DeviationSet dev{lower(rng), upper(rng), lower(rng), lower(rng)};
    const double eta = (tau_pbv - dev.e_tau * tau0) * unit(rng);
    const double vr = speed(rng), vf = speed(rng);
    const sdc::VehicleParams rc{5.0, 9.0, 3.0, vr, tau0}, fc{5.0, 9.0, 3.0, vf, tau0};
    const sdc::VehicleParams rp{5.0, 9.0, 3.0, vr, tau_pbv}, fp{5.0, 9.0, 3.0, vf, tau_pbv};
    const double corrected = sdc::corrected_safe_distance(rc, fc, dev, eta);
    const double plain = sdc::safe_longitudinal_distance(rp, fp, tau_pbv);
    closest = std::max(closest, corrected - plain);
    v.require(corrected <= plain + 1e-9, "draw " + std::to_string(i) + ": " + fmt("%.6f", corrected) + " > " +
                                             fmt("%.6f", plain));
  }
  const auto c = highway(0.4);
  const double collapse = sdc::corrected_safe_distance(c, c, sdc::DeviationSet::unit(), 0.1);
  const double reference = sdc::safe_longitudinal_distance(highway(), highway(), 0.5);
  v.require(std::abs(collapse - reference) <= 1e-9, "unit collapse differs by " + fmt("%.3e", collapse - reference));
  if (v.pass) v.detail = std::to_string(draws) + " draws, max(D_corrected - D_safe) = " + fmt("%.4f m", closest) +
                         ", unit collapse |diff| = " + fmt("%.1e", std::abs(collapse - reference));
  return v;
}

Verdict capacity_sweep(sdc::Theorem1Report& report) {
  Verdict v;
  const auto t0 = Clock::now();
  report = sdc::check_theorem1(sdc::inaccuracy_study_grid(), {5.0, 9.0, 3.0, 0.0, 0.5}, 0.5, 0.4, sdc::RoadSpec{});
  const double elapsed = seconds_since(t0);
  v.require(report.rejected.empty(), std::to_string(report.rejected.size()) + " points rejected");
  v.require(report.rows.size() == 864, std::to_string(report.rows.size()) + " rows");
  v.require(report.holds(), std::to_string(report.violations.size()) + " rows with SDC_cbv < SDC_pbv");
  sdc::CapacityInputs in;
  in.fleet = {5.0, 9.0, 3.0, 0.0, 0.5};
  const auto base = sdc::capacity_report(in);
  v.require(base.sdc_pbv == 833, "SDC_pbv at the default point = " + std::to_string(base.sdc_pbv));
  v.require(elapsed < 10.0, "runtime " + fmt("%.2f s", elapsed));
  if (v.pass) v.detail = std::to_string(report.rows.size()) + " rows, SDC_cbv >= SDC_pbv on all, SDC_pbv = 833 (" +
                         fmt("%.3f s", elapsed) + ")";
  return v;
}

// Groups rows that differ only in the coordinate `key` leaves out, orders each
// group by the varying coordinate and checks adjacent pairs.
template <typename Key, typename Coord>
bool monotone_along(const std::vector<sdc::SweepRow>& rows, Key key, Coord coord, int d_sign, std::string& why) {
  std::map<std::tuple<double, double, double>, std::vector<const sdc::SweepRow*>> groups;
  for (const auto& r : rows) groups[key(r)].push_back(&r);
  for (auto& [_, g] : groups) {
    std::sort(g.begin(), g.end(), [&](auto* a, auto* b) { return coord(*a) < coord(*b); });
    for (std::size_t i = 1; i < g.size(); ++i) {
      const double dd = g[i]->d_cbv - g[i - 1]->d_cbv;
      const auto ds = g[i]->sdc_cbv - g[i - 1]->sdc_cbv;
      if (d_sign * dd < -1e-9 || (d_sign > 0 ? ds > 0 : ds < 0)) {
        why = "at coordinate " + fmt("%.4f", coord(*g[i]));
        return false;
      }
    }
  }
  return true;
}

Verdict qualitative_trends(const sdc::Theorem1Report& report) {
  Verdict v;
  const fs::path csv = scratch("sweep.csv");
  {
    std::ofstream out(csv);
    sdc::io::write_sweep_csv(out, report.rows);
  }
  std::ifstream in(csv);
  const auto rows = sdc::io::read_sweep_csv(in);
  v.require(rows.size() == report.rows.size(), "CSV round trip lost rows");

  using R = sdc::SweepRow;
  auto phi_tau = [](const R& r) { return std::abs(1.0 - r.point.e_tau); };
  auto phi_brake = [](const R& r) { return std::abs(1.0 - r.point.e_brake); };
  auto phi_v = [](const R& r) { return std::abs(1.0 - r.point.e_V); };
  auto eta = [](const R& r) { return r.point.eta.seconds; };
  std::string why;
  // Larger inaccuracy means the conservative estimate overstated the danger:
  // correcting it shrinks D and grows SDC. Larger latency does the opposite.
  v.require(monotone_along(rows, [](const R& r) { return std::tuple{r.point.e_brake, r.point.e_V, r.point.eta.seconds}; },
                           phi_tau, -1, why), "e_tau axis " + why);
  v.require(monotone_along(rows, [](const R& r) { return std::tuple{r.point.e_tau, r.point.e_V, r.point.eta.seconds}; },
                           phi_brake, -1, why), "e_brake axis " + why);
  v.require(monotone_along(rows, [](const R& r) { return std::tuple{r.point.e_tau, r.point.e_brake, r.point.eta.seconds}; },
                           phi_v, -1, why), "e_V axis " + why);
  v.require(monotone_along(rows, [](const R& r) { return std::tuple{r.point.e_tau, r.point.e_brake, r.point.e_V}; },
                           eta, +1, why), "eta axis " + why);
  for (const auto& r : rows) v.require(r.sdc_pbv == rows.front().sdc_pbv, "SDC_pbv varies across the grid");
  const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(),
                                            [](const R& a, const R& b) { return a.sdc_cbv < b.sdc_cbv; });
  if (v.pass) {
    v.detail = "D_cbv falls and SDC_cbv rises as each inaccuracy grows, D_cbv rises and SDC_cbv falls with latency; "
               "SDC_cbv spread " + std::to_string(lo->sdc_cbv) + ".." + std::to_string(hi->sdc_cbv) + " (+" +
               fmt("%.0f%%", 100.0 * (hi->sdc_cbv - lo->sdc_cbv) / lo->sdc_cbv) + ")";
  }
  return v;
}

Verdict ltl_equivalence() {
  Verdict v;
  std::mt19937_64 rng(1007);
  std::uniform_int_distribution<int> depth(1, 4);
  std::uniform_int_distribution<std::size_t> bound(0, 25);
  const int pairs = 20000;
  for (int i = 0; i < pairs && v.pass; ++i) {
    const auto t = testsupport::random_trace(rng, 20);
    const auto f = testsupport::random_formula(rng, depth(rng));
    v.require(f.depth() <= 4, "generator exceeded depth 4");
    for (auto mode : {sdc::ltl::BoundaryMode::ClampToEnd, sdc::ltl::BoundaryMode::Strict}) {
      const auto fast = sdc::ltl::satisfaction(t, f, mode);
      for (std::size_t k = 0; k < t.size(); ++k) {
        v.require(fast[k] == testsupport::reference_eval(t, k, f, mode),
                  "verdict mismatch for " + sdc::ltl::to_string(f));
      }
      const std::size_t a = bound(rng), b = a + bound(rng);
      const auto g = sdc::ltl::Formula::globally(a, b, f);
      const auto dual = sdc::ltl::Formula::negate(
          sdc::ltl::Formula::finally(a, b, sdc::ltl::Formula::negate(f)));
      v.require(sdc::ltl::satisfaction(t, g, mode) == sdc::ltl::satisfaction(t, dual, mode),
                "G/F duality fails for " + sdc::ltl::to_string(f));
    }
  }
  if (v.pass) v.detail = std::to_string(pairs) + " pairs in both boundary modes, verdicts and duality identical";
  return v;
}

Verdict safety_closure() {
  Verdict v;
  const fs::path base_path = fs::path(SDC_SCENARIO_DIR) / "acceptance_two_lane.json";
  const std::string text = slurp(base_path);
  const auto cfg = sdc::config::parse_scenario(text);
  const auto result = sdc::sim::run_scenario(cfg);
  v.require(result.collisions.empty(), "collision at the safe distance");
  v.require(sdc::ltl::sdt(result.traces) == result.traces.size(), "SDT below the vehicle count");
  v.require(run_cli("simulate --config " + base_path.string()) == 0, "CLI exit code is not 0");

  int flips = 0;
  nlohmann::json root = nlohmann::json::parse(text);
  for (std::size_t l = 0; l < root["lanes"].size(); ++l) {
    for (std::size_t k = 1; k < root["lanes"][l].size(); ++k) {
      nlohmann::json shrunk = root;
      shrunk["lanes"][l][k]["gap_factor"] = 0.9;
      const std::string id = "L" + std::to_string(l) + "V" + std::to_string(k);
      const auto c = sdc::config::scenario_from_json(shrunk);
      const auto r = sdc::sim::run_scenario(c);
      const bool collided = !r.collisions.empty();
      const bool blamed = collided && r.collisions.front().rear_id == id && r.collisions.front().rear_responsible;
      v.require(collided && blamed, "shrinking the gap of " + id + " did not yield a blamed rear collision");
      const fs::path p = scratch("shrunk_" + id + ".json");
      std::ofstream(p) << shrunk.dump(2);
      v.require(run_cli("simulate --config " + p.string()) == 1, "CLI exit code for shrunk " + id + " is not 1");
      ++flips;
    }
  }
  if (v.pass) v.detail = "SDT " + std::to_string(result.traces.size()) + "/" + std::to_string(result.traces.size()) +
                         ", exit 0; each of " + std::to_string(flips) + " gaps at 90% collides with the rear blamed";
  return v;
}

Verdict determinism() {
  Verdict v;
  int scenarios = 0;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(SDC_SCENARIO_DIR)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const fs::path a = scratch(f.stem().string() + "_a.csv"), b = scratch(f.stem().string() + "_b.csv");
    run_cli("simulate --config " + f.string() + " --trace-out " + a.string());
    run_cli("simulate --config " + f.string() + " --trace-out " + b.string());
    const std::string ta = slurp(a), tb = slurp(b);
    v.require(!ta.empty() && ta == tb, f.filename().string() + " traces differ between runs");
    ++scenarios;
  }
  v.require(scenarios > 0, "no scenarios found");
  if (v.pass) v.detail = std::to_string(scenarios) + " scenarios, repeated runs byte-identical";
  return v;
}

}  // namespace

int main() {
  sdc::Theorem1Report sweep;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"closed form vs oracle at 100 km/h", closed_form_example},
      {"randomized oracle equivalence", randomized_oracle},
      {"trivial branch returns L", trivial_branch},
      {"cooperative distance never exceeds perception distance", cooperative_bound},
      {"cooperative capacity sweep", [&] { return capacity_sweep(sweep); }},
      {"qualitative sweep trends", [&] { return qualitative_trends(sweep); }},
      {"LTL evaluator equivalence", ltl_equivalence},
      {"end-to-end safety closure", safety_closure},
      {"determinism", determinism},
  };
  int failures = 0;
  int n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  criterion %d: %s -- %s\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str());
    failures += v.pass ? 0 : 1;
  }
  std::printf("%d/%d criteria passed\n", n - failures, n);
  return failures == 0 ? 0 : 1;
}
