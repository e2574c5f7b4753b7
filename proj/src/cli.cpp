#include "swarmsim/cli.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "swarmsim/output.hpp"
#include "swarmsim/scenario_io.hpp"
#include "swarmsim/sim.hpp"

namespace swarmsim::cli {

namespace fs = std::filesystem;

std::vector<std::size_t> parse_n_values(const std::string& spec) {
  std::vector<std::size_t> out;
  auto to_n = [&spec](const std::string& s) -> std::size_t {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (s.empty() || !std::isdigit(static_cast<unsigned char>(s[0])) || pos != s.size()) throw InvalidArgument("bad N list '" + spec + "'");
    return v;
  };
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const std::string item = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const std::size_t lo = to_n(item.substr(0, dots));
      const std::size_t hi = to_n(item.substr(dots + 2));
      if (lo > hi) throw InvalidArgument("bad N range '" + item + "'");
      for (std::size_t n = lo; n <= hi; ++n) out.push_back(n);
    } else {
      out.push_back(to_n(item));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

namespace {

struct Parser {
  CLI::App app{"Joint anchor-free localization and formation navigation simulator for UAV swarms", "swarmsim"};
  RunConfig cfg;
  std::string n_spec;
  std::uint64_t seed = 0;
  CLI::App* localize = nullptr;
  CLI::App* navigate = nullptr;
  CLI::App* sweep = nullptr;
  CLI::App* audit = nullptr;
  CLI::Option* seed_opt[4] = {};

  Parser() {
    app.require_subcommand(1);
    app.footer("Environment: SWARMSIM_SEED is used as the seed when --seed is not given.");

    auto common = [this](CLI::App* sub, int idx, bool scenario_required) {
      auto* s = sub->add_option("--scenario", cfg.scenario_path, "Scenario JSON file");
      if (scenario_required) s->required();
      s->check(CLI::ExistingFile);
      seed_opt[idx] = sub->add_option("--seed", seed, "Base random seed (default: $SWARMSIM_SEED or 1)");
      sub->add_option("--out", cfg.output_dir, "Output directory (created if missing)")->capture_default_str();
      sub->add_option("--set", cfg.overrides, "Scenario override key.path=value (repeatable)")
          ->allow_extra_args(false)
          ->take_all();
    };

    localize = app.add_subcommand("localize", "CRLB error ellipses and network RMSE at the initial geometry");
    common(localize, 0, true);
    localize->add_flag("--ellipse-sqrt", cfg.ellipse_sqrt,
                       "Use square roots of the eigenvalues as ellipse axis lengths");

    navigate = app.add_subcommand("navigate", "Monte Carlo formation navigation: RMSE series, traces, audit");
    common(navigate, 1, true);
    navigate->add_option("--trials", cfg.trials, "Number of Monte Carlo trials")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    navigate->add_option("--jobs", cfg.jobs, "Worker threads for the trials")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    navigate->add_option("--traces", cfg.trace_files, "Number of leading trials written as trace_<m>.csv")
        ->capture_default_str();

    sweep = app.add_subcommand("sweep", "Network CRLB RMSE versus number of UAVs on a circle");
    common(sweep, 2, true);
    sweep->add_option("--n", n_spec, "UAV counts, e.g. 3..12 or 3,6,9")->required();
    sweep->add_option("--radius", cfg.radius, "Circle radius in meters")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    audit = app.add_subcommand("audit", "Re-audit a trace CSV against a scenario's constraints");
    common(audit, 3, true);
    audit->add_option("--trace", cfg.trace_path, "Trace CSV written by navigate")
        ->required()
        ->check(CLI::ExistingFile);
  }
};

std::uint64_t env_seed() {
  const char* v = std::getenv("SWARMSIM_SEED");
  if (v == nullptr || *v == '\0') return 1;
  try {
    std::size_t pos = 0;
    const auto s = std::stoull(v, &pos);
    if (pos == std::string(v).size()) return s;
  } catch (const std::exception&) {
  }
  throw InvalidArgument(std::string("SWARMSIM_SEED is not an unsigned integer: ") + v);
}

void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidArgument("cannot create output directory " + dir.string());
  const fs::path probe = dir / ".swarmsim_write_test";
  {
    std::ofstream f(probe);
    if (!f) throw InvalidArgument("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

int run_localize(const RunConfig& cfg, const Scenario& s, std::ostream& out) {
  const CrlbMatrix kappa = crlb_for_slot(s.initial_state, s);
  const auto frame = to_baseline_frame(s.initial_state);
  const auto axes = cfg.ellipse_sqrt ? EllipseAxes::SqrtEigenvalue : EllipseAxes::Eigenvalue;
  std::vector<EllipseRow> rows;
  for (std::size_t m = 0; m < kappa.n_unknown; ++m) {
    const std::size_t uav = s.n_known + m;  // 0-based
    rows.push_back({uav + 1, error_ellipse(per_uav_block(kappa, m), frame[uav], axes)});
  }
  write_ellipses_csv(cfg.output_dir / "ellipses.csv", rows);
  const double rmse = network_rmse(kappa);
  write_json(cfg.output_dir / "localization.json",
             {{"scenario", s.id},
              {"sensing_mode", to_string(s.sensing_mode)},
              {"model_aware", s.noise.model_aware},
              {"n_unknown", kappa.n_unknown},
              {"ellipse_axes", cfg.ellipse_sqrt ? "sqrt_eigenvalue" : "eigenvalue"},
              {"network_rmse_m", rmse}});
  out << "network RMSE (CRLB): " << format_double(rmse) << " m over " << kappa.n_unknown << " unknown UAVs\n";
  return 0;
}

int run_navigate(const RunConfig& cfg, const Scenario& s, std::ostream& out) {
  MonteCarloOptions opts;
  opts.jobs = cfg.jobs;
  opts.keep_traces = std::min(cfg.trace_files, cfg.trials);
  const auto res = monte_carlo(s, cfg.trials, cfg.seed, opts);

  write_rmse_series_csv(cfg.output_dir / "rmse_series.csv", res.series);
  for (std::size_t m = 0; m < res.traces.size(); ++m) {
    write_trace_csv(cfg.output_dir / ("trace_" + std::to_string(m) + ".csv"), res.traces[m]);
  }
  nlohmann::json audit = audit_to_json(res.audit);
  audit["trials"] = cfg.trials;
  write_json(cfg.output_dir / "audit.json", audit);
  write_json(cfg.output_dir / "summary.json",
             {{"terminations",
               {{"converged", res.converged}, {"max_slots", res.max_slots}, {"singular_fim", res.singular}}},
              {"trials", cfg.trials},
              {"trials_in_rmse", res.series.n_trials},
              {"final_rmse_m", res.series.final_value()},
              {"slots", res.series.values.size()},
              {"runtime_s", res.wall_seconds},
              {"jobs", cfg.jobs},
              {"seed", cfg.seed},
              {"scenario", scenario_to_json(s)}});
  out << "final RMSE " << format_double(res.series.final_value()) << " m after " << res.series.values.size()
      << " slots (" << res.converged << " converged, " << res.max_slots << " max_slots, " << res.singular
      << " singular)\n";
  out << "audit: min inter-UAV distance " << format_double(res.audit.min_inter_uav_distance)
      << " m, segment intersections " << res.audit.segment_intersections << '\n';
  return 0;
}

int run_sweep(const RunConfig& cfg, const Scenario& s, std::ostream& out) {
  const auto rows = localization_sweep(s, cfg.n_values, cfg.radius);
  write_sweep_csv(cfg.output_dir / "sweep.csv", rows);
  out << "wrote " << rows.size() << " sweep rows\n";
  return 0;
}

int run_audit(const RunConfig& cfg, const Scenario& s, std::ostream& out) {
  const auto states = read_trace_positions(cfg.trace_path);
  for (const auto& st : states) {
    if (st.size() != s.n_uavs) throw InvalidArgument("trace UAV count does not match the scenario");
  }
  AuditReport rep = audit_positions(states, s);
  if (!states.empty()) {
    const SwarmState last{{}, states.back(), 0};
    const auto frame = to_baseline_frame(last);
    for (std::size_t i = 0; i < frame.size(); ++i) {
      rep.final_max_goal_distance = std::max(rep.final_max_goal_distance, (frame[i] - s.desired[i]).norm());
    }
  }
  nlohmann::json doc = audit_to_json(rep);
  doc["trace"] = cfg.trace_path.string();
  write_json(cfg.output_dir / "audit.json", doc);
  out << "audit: " << (rep.clean() ? "clean" : "violations found") << ", min inter-UAV distance "
      << format_double(rep.min_inter_uav_distance) << " m\n";
  return 0;
}

}  // namespace

RunConfig parse_args(int argc, const char* const* argv) {
  Parser p;
  try {
    p.app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    p.cfg.show_help = true;
    p.cfg.help_text = p.app.help("", CLI::AppFormatMode::All);
    return p.cfg;
  } catch (const CLI::CallForAllHelp&) {
    p.cfg.show_help = true;
    p.cfg.help_text = p.app.help("", CLI::AppFormatMode::All);
    return p.cfg;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what(), p.app.help("", CLI::AppFormatMode::All));
  }

  RunConfig cfg = p.cfg;
  int idx = 0;
  if (p.localize->parsed()) {
    cfg.command = Command::Localize;
    idx = 0;
  } else if (p.navigate->parsed()) {
    cfg.command = Command::Navigate;
    idx = 1;
  } else if (p.sweep->parsed()) {
    cfg.command = Command::Sweep;
    idx = 2;
  } else {
    cfg.command = Command::Audit;
    idx = 3;
  }
  try {
    cfg.seed = p.seed_opt[idx]->count() > 0 ? p.seed : env_seed();
    if (cfg.command == Command::Sweep) {
      cfg.n_values = parse_n_values(p.n_spec);
      if (cfg.n_values.empty()) throw InvalidArgument("--n lists no values");
    }
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what(), p.app.help("", CLI::AppFormatMode::All));
  }
  return cfg;
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.show_help) {
    out << cfg.help_text;
    return 0;
  }
  try {
    ensure_output_dir(cfg.output_dir);
    const Scenario s = load_scenario(cfg.scenario_path, cfg.overrides);
    switch (cfg.command) {
      case Command::Localize:
        return run_localize(cfg, s, out);
      case Command::Navigate:
        return run_navigate(cfg, s, out);
      case Command::Sweep:
        return run_sweep(cfg, s, out);
      case Command::Audit:
        return run_audit(cfg, s, out);
    }
  } catch (const ValidationError& e) {
    err << "swarmsim: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "swarmsim: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(argc, argv);
  } catch (const UsageError& e) {
    err << "swarmsim: " << e.what() << "\n\n" << e.usage();
    return 64;
  }
  return execute(cfg, out, err);
}

}  // namespace swarmsim::cli
