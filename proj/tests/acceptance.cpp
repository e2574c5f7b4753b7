// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "swarmsim/cli.hpp"
#include "swarmsim/control.hpp"
#include "swarmsim/crlb.hpp"
#include "swarmsim/estimator.hpp"
#include "swarmsim/measurement.hpp"
#include "swarmsim/scenario_io.hpp"
#include "swarmsim/sim.hpp"
#include "test_util.hpp"

using namespace swarmsim;
using namespace swarmsim::testing;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = SWARMSIM_SCENARIO_DIR;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g(double v) { return fmt("%.4g", v); }

Scenario load(const std::string& name) { return load_scenario(kScenarios + "/" + name); }

// Runs shared between criteria 4 and 6.
struct NavigateRuns {
  std::vector<std::string> names;
  std::vector<MonteCarloResult> results;
  std::vector<Scenario> scenarios;
};

NavigateRuns& navigate_runs() {
  static NavigateRuns runs = [] {
    NavigateRuns r;
    for (const char* name :
         {"navigate_los.json", "navigate_nlos.json", "navigate_bearing_los.json", "navigate_bearing_nlos.json"}) {
      r.names.emplace_back(name);
      r.scenarios.push_back(load(name));
      r.results.push_back(monte_carlo(r.scenarios.back(), 100, 1));
    }
    return r;
  }();
  return runs;
}

Scenario kappa_at_truth(Scenario s) {
  s.options.kappa_geometry = KappaGeometry::Truth;
  s.options.baseline_per_slot = true;
  return s;
}

std::string final_rmse_text(const MonteCarloResult& r) {
  if (r.series.n_trials == 0) return "undefined (all trials singular)";
  std::string t = g(r.series.final_value()) + " m";
  if (r.singular > 0) t += " [" + std::to_string(r.singular) + " singular]";
  return t;
}

Verdict criterion1() {
  NoiseParams n;
  n.path_loss_exponent = 2.0;
  n.shadowing_std_db = 3.4;
  const double s0 = ranging_sigma_ref(n, true);
  return {std::abs(s0 - 0.39) <= 0.005, "sigma_0r = " + fmt("%.5f", s0)};
}

Verdict criterion2() {
  bool ok = true;
  std::string detail;
  for (auto mode : {SensingMode::Ranging, SensingMode::Bearing}) {
    Scenario s = circle_scenario(3, 45.0, mode);
    s.noise.model_aware = false;
    const Eigen::MatrixXd fim = assemble_fim(s.initial_state, s).matrix;
    const Eigen::MatrixXd emp = empirical_score_covariance(s, 100000, 2024);
    const double err = rel_frobenius(emp, fim);
    ok = ok && err < 0.05;
    detail += (detail.empty() ? "" : ", ") + to_string(mode) + " rel err " + fmt("%.4f", err);
  }
  return {ok, detail};
}

Verdict criterion3() {
  std::vector<std::size_t> ns;
  for (std::size_t n = 3; n <= 12; ++n) ns.push_back(n);
  Scenario templ = circle_scenario(3, 45.0);
  templ.noise.bearing_std_rad = 10.0 * M_PI / 180.0;
  const auto rows = localization_sweep(templ, ns, 45.0);
  bool decreasing = true;
  bool xi_below = true;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k >= 3 && !(rows[k].rmse < rows[k - 3].rmse)) decreasing = false;
    if (k % 3 == 1 && !(rows[k].rmse <= rows[k - 1].rmse)) xi_below = false;
  }
  const auto& first = rows.front();
  const auto& last = rows[rows.size() - 3];
  return {decreasing && xi_below, std::string("strictly decreasing ") + (decreasing ? "yes" : "no") +
                                      ", xi=1 <= xi=0 " + (xi_below ? "yes" : "no") + ", ranging xi=0 " +
                                      g(first.rmse) + " -> " + g(last.rmse) + " m"};
}

Verdict criterion4() {
  const auto& runs = navigate_runs();
  const auto& r = runs.results;
  const bool headline = r[0].series.n_trials > 0 && r[0].series.final_value() < 2.0;
  auto not_better = [](const MonteCarloResult& nlos, const MonteCarloResult& los) {
    return nlos.series.n_trials > 0 && los.series.n_trials > 0 && nlos.series.final_value() >= los.series.final_value();
  };
  const bool nlos_ok = not_better(r[1], r[0]) && not_better(r[3], r[2]);
  double seconds = 0;
  for (const auto& x : r) seconds += x.wall_seconds;
  const auto variant = monte_carlo(kappa_at_truth(runs.scenarios[0]), 100, 1);
  return {headline && nlos_ok && seconds < 120.0,
          "ranging LOS " + final_rmse_text(r[0]) + ", NLOS " + final_rmse_text(r[1]) + "; bearing LOS " +
              final_rmse_text(r[2]) + ", NLOS " + final_rmse_text(r[3]) + "; " + fmt("%.1f", seconds) +
              " s; info: kappa at truth with per-slot baseline gives " + final_rmse_text(variant)};
}

struct SweepOutcome {
  bool monotone = true;
  std::string text;
};

SweepOutcome monotone_sweep(const Scenario& base, const std::vector<double>& levels,
                            const std::function<void(Scenario&, double)>& set, const char* unit) {
  SweepOutcome out;
  double prev = -1.0;
  for (double level : levels) {
    Scenario s = base;
    set(s, level);
    const auto r = monte_carlo(s, 50, 1);
    out.text += (out.text.empty() ? "" : ", ") + g(level) + unit + ": " + final_rmse_text(r);
    if (r.series.n_trials == 0) {
      out.monotone = false;
      continue;
    }
    if (r.series.final_value() < prev) out.monotone = false;
    prev = r.series.final_value();
  }
  return out;
}

Verdict criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> shadowing{0.5, 1.5, 2.5, 3.5, 4.5, 5.5};
  const std::vector<double> bearing{5.0, 10.0, 20.0, 30.0};
  auto set_sh = [](Scenario& s, double v) { s.noise.shadowing_std_db = v; };
  auto set_b = [](Scenario& s, double v) { s.noise.bearing_std_rad = v * M_PI / 180.0; };
  const Scenario ranging = load("navigate_los.json");
  const Scenario bear = load("navigate_bearing_los.json");
  const auto a = monotone_sweep(ranging, shadowing, set_sh, " dB");
  const auto b = monotone_sweep(bear, bearing, set_b, " deg");
  const auto va = monotone_sweep(kappa_at_truth(ranging), shadowing, set_sh, " dB");
  const auto vb = monotone_sweep(kappa_at_truth(bear), bearing, set_b, " deg");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {a.monotone && b.monotone && seconds < 600.0,
          "ranging {" + a.text + "}; bearing {" + b.text + "}; " + fmt("%.1f", seconds) +
              " s; info: kappa at truth with per-slot baseline is " + (va.monotone && vb.monotone ? "" : "not ") +
              "monotone: ranging {" + va.text + "}; bearing {" + vb.text + "}"};
}

Verdict criterion6() {
  const auto& runs = navigate_runs();
  AuditReport all;
  for (const auto& r : runs.results) all.merge(r.audit);
  const double floor = runs.scenarios[0].motion.safety_distance - runs.scenarios[0].motion.step();
  return {all.segment_intersections == 0 && all.min_inter_uav_distance >= floor,
          std::to_string(all.states_checked) + " states, " + std::to_string(all.segment_intersections) +
              " intersections, min inter-UAV " + fmt("%.4f", all.min_inter_uav_distance) + " m (floor " + g(floor) +
              "), min clearance " + fmt("%.4f", all.min_obstacle_clearance) + " m"};
}

Verdict criterion7() {
  Rng rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> dim_pick(1, 8);
  double worst_p = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int dim = t % 2 ? 2 : 2 * dim_pick(rng);
    const int cols = std::uniform_int_distribution<int>(1, dim + 2)(rng);
    Eigen::MatrixXd n(dim, cols);
    for (int c = 0; c < cols; ++c) {
      for (int r = 0; r < dim; ++r) n(r, c) = gauss(rng);
      if (c > 0 && t % 5 == 0) n.col(c) = -3.0 * n.col(c - 1);
    }
    const Eigen::MatrixXd p = projection_matrix(n);
    worst_p = std::max({worst_p, (p - p.transpose()).norm(), (p * p - p).norm(), (p * n).norm() / n.norm()});
  }
  double worst_inv = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto size = static_cast<Eigen::Index>(2 * (1 + t % 11));
    const Eigen::MatrixXd j = random_spd(size, rng);
    const CrlbMatrix k = invert_fim({j, static_cast<std::size_t>(size / 2)});
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(size, size);
    worst_inv = std::max(worst_inv, (k.matrix * j - eye).norm() / std::sqrt(static_cast<double>(size)));
  }
  const Scenario s = circle_scenario(9, 45.0);
  const CrlbMatrix kappa = crlb_for_slot(s.initial_state, s);
  const auto frame = to_baseline_frame(s.initial_state);
  const Eigen::Index dim = kappa.matrix.rows();
  const std::size_t nu = static_cast<std::size_t>(dim / 2);
  const int draws = 100000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 0; k < draws; ++k) {
    const auto est = sample_estimates(s.initial_state, kappa, Baseline{frame[0].x}, 1, rng);
    Eigen::VectorXd w(dim);
    for (std::size_t m = 0; m < nu; ++m) {
      w(static_cast<Eigen::Index>(m)) = est.estimated_uavs[1 + m].x - frame[1 + m].x;
      w(static_cast<Eigen::Index>(nu + m)) = est.estimated_uavs[1 + m].y - frame[1 + m].y;
    }
    mean += w;
    second.noalias() += w * w.transpose();
  }
  mean /= draws;
  const Eigen::MatrixXd cov = (second - draws * mean * mean.transpose()) / (draws - 1);
  const double cov_err = rel_frobenius(cov, kappa.matrix);
  return {worst_p <= 1e-9 && worst_inv <= 1e-8 && cov_err < 0.03,
          "projector worst " + fmt("%.2e", worst_p) + ", inverse residual worst " + fmt("%.2e", worst_inv) +
              ", sample covariance rel err " + fmt("%.4f", cov_err)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "swarmsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Verdict criterion8() {
  const fs::path root = fs::temp_directory_path() / "swarmsim_acceptance";
  fs::remove_all(root);
  bool ok = true;
  std::size_t files = 0;
  std::vector<fs::path> runs{root / "a", root / "b", root / "c"};
  const std::vector<std::string> jobs{"1", "1", "2"};
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const std::string out = runs[k].string();
    ok = ok && cli({"navigate", "--scenario", kScenarios + "/navigate_nlos.json", "--trials", "100", "--seed", "3",
                    "--traces", "3", "--jobs", jobs[k], "--out", out}) == 0;
    ok = ok && cli({"localize", "--scenario", kScenarios + "/circle9_localize.json", "--out", out}) == 0;
    ok = ok && cli({"sweep", "--scenario", kScenarios + "/circle9_localize.json", "--n", "3..12", "--out", out}) == 0;
  }
  for (const auto& entry : fs::directory_iterator(runs[0])) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const auto ref = slurp(entry.path());
    for (std::size_t k = 1; k < runs.size(); ++k) ok = ok && ref == slurp(runs[k] / entry.path().filename());
  }
  fs::remove_all(root);
  return {ok && files >= 6, std::to_string(files) + " CSV files compared across 3 runs (jobs 1, 1, 2)"};
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("criterion %zu: %s  %s\n", k + 1, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
