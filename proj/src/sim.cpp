#include "swarmsim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "swarmsim/measurement.hpp"

namespace swarmsim {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Converged:
      return "converged";
    case Termination::MaxSlots:
      return "max_slots";
    case Termination::SingularFim:
      return "singular_fim";
  }
  return "unknown";
}

namespace {

bool converged(const SwarmState& truth, const Scenario& scenario) {
  const auto frame = to_baseline_frame(truth);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (!((frame[i] - scenario.desired[i]).norm() < scenario.motion.goal_tolerance)) return false;
  }
  return true;
}

// True states visited by the trial, including the final one.
std::vector<const SwarmState*> visited_states(const TrialTrace& trace) {
  std::vector<const SwarmState*> out;
  out.reserve(trace.records.size() + 1);
  for (const auto& r : trace.records) out.push_back(&r.truth);
  if (trace.records.empty() || trace.final_state.slot > trace.records.back().truth.slot) {
    out.push_back(&trace.final_state);
  }
  return out;
}

}  // namespace

TrialTrace run_trial(const Scenario& scenario, std::uint64_t seed) {
  TrialTrace trace;
  trace.scenario_id = scenario.id;
  trace.seed = seed;

  Rng rng(seed);
  CrlbEstimator estimator(scenario, rng);
  SwarmState truth = scenario.initial_state;
  truth.slot = 0;
  trace.records.reserve(std::min<std::size_t>(scenario.motion.max_slots, 1 << 16));
  trace.termination = Termination::MaxSlots;

  for (std::size_t k = 0; k < scenario.motion.max_slots; ++k) {
    const auto nodes = node_positions(truth);
    const LosTable los(nodes, scenario.obstacles);

    EstimateState est;
    try {
      est = estimator.estimate(truth, los);
    } catch (const SingularFim& e) {
      trace.termination = Termination::SingularFim;
      trace.failure = e.what();
      break;
    } catch (const DegenerateGeometry& e) {
      trace.termination = Termination::SingularFim;
      trace.failure = e.what();
      break;
    } catch (const FactorizationFailure& e) {
      trace.termination = Termination::SingularFim;
      trace.failure = e.what();
      break;
    }

    const double beta = baseline_angle(truth);
    SlotRecord rec;
    rec.crlb_trace = est.covariance_used.trace();
    rec.estimate.reserve(est.estimated_uavs.size());
    for (const auto& p : est.estimated_uavs) rec.estimate.push_back(beta == 0.0 ? p : rotate(p, beta));

    if (converged(truth, scenario)) {
      rec.truth = truth;
      rec.control.steps.assign(truth.uavs.size(), {0.0, 0.0});
      trace.records.push_back(std::move(rec));
      trace.termination = Termination::Converged;
      break;
    }

    ActiveConstraintSet constraints = detect_active_constraints(truth, scenario.obstacles, scenario.motion);
    if (beta != 0.0) {
      for (auto& c : constraints.entries) c.gradient = rotate(c.gradient, -beta);
    }
    ControlSignal u = control_step(est, scenario.desired, constraints, scenario.motion, scenario.options.control_mode);
    if (beta != 0.0) {
      for (auto& s : u.steps) s = rotate(s, beta);
    }

    rec.truth = truth;
    rec.control = u;
    rec.constraint_events = constraints.entries.size();
    trace.records.push_back(std::move(rec));
    truth = apply_control(truth, u);
  }
  trace.final_state = truth;
  return trace;
}

std::vector<double> squared_errors(const TrialTrace& trace, const Scenario& scenario) {
  const auto states = visited_states(trace);
  const std::size_t n = scenario.n_uavs;
  std::vector<double> out;
  out.reserve(states.size() * n);
  for (const auto* s : states) {
    const auto frame = to_baseline_frame(*s);
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 e = frame[i] - scenario.desired[i];
      out.push_back(e.x * e.x + e.y * e.y);
    }
  }
  return out;
}

void AuditReport::merge(const AuditReport& o) {
  min_inter_uav_distance = std::min(min_inter_uav_distance, o.min_inter_uav_distance);
  min_obstacle_clearance = std::min(min_obstacle_clearance, o.min_obstacle_clearance);
  safety_violation_slots += o.safety_violation_slots;
  clearance_violation_slots += o.clearance_violation_slots;
  segment_intersections += o.segment_intersections;
  goal_violations = std::max(goal_violations, o.goal_violations);
  final_max_goal_distance = std::max(final_max_goal_distance, o.final_max_goal_distance);
  states_checked += o.states_checked;
}

AuditReport audit_positions(const std::vector<std::vector<Point2>>& states, const Scenario& scenario) {
  AuditReport rep;
  const auto& m = scenario.motion;
  const double gamma = m.step();

  for (std::size_t i = 0; i < scenario.desired.size(); ++i) {
    bool bad = false;
    for (std::size_t j = i + 1; j < scenario.desired.size(); ++j) {
      if ((scenario.desired[i] - scenario.desired[j]).norm() < m.safety_distance) bad = true;
    }
    for (const auto& o : scenario.obstacles) {
      if (distance_to_obstacle(o, scenario.desired[i]) < m.obstacle_clearance) bad = true;
    }
    rep.goal_violations += bad ? 1 : 0;
  }

  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& p = states[k];
    double slot_min_d = std::numeric_limits<double>::infinity();
    double slot_min_l = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = i + 1; j < p.size(); ++j) slot_min_d = std::min(slot_min_d, (p[i] - p[j]).norm());
      for (const auto& o : scenario.obstacles) slot_min_l = std::min(slot_min_l, distance_to_obstacle(o, p[i]));
      if (k + 1 < states.size()) {
        for (const auto& o : scenario.obstacles) {
          const Point2 a = p[i];
          const Point2 b = states[k + 1][i];
          const bool hit = a == b ? distance_to_obstacle(o, a) == 0.0
                                  : segment_intersects(o, a, b) || distance_to_obstacle(o, a) == 0.0;
          rep.segment_intersections += hit ? 1 : 0;
        }
      }
    }
    rep.min_inter_uav_distance = std::min(rep.min_inter_uav_distance, slot_min_d);
    rep.min_obstacle_clearance = std::min(rep.min_obstacle_clearance, slot_min_l);
    rep.safety_violation_slots += slot_min_d < m.safety_distance - gamma ? 1 : 0;
    rep.clearance_violation_slots += slot_min_l < m.obstacle_clearance - gamma ? 1 : 0;
  }
  rep.states_checked = states.size();
  return rep;
}

AuditReport trajectory_audit(const TrialTrace& trace, const Scenario& scenario) {
  const auto visited = visited_states(trace);
  std::vector<std::vector<Point2>> states;
  states.reserve(visited.size());
  for (const auto* s : visited) states.push_back(s->uavs);
  AuditReport rep = audit_positions(states, scenario);
  if (!visited.empty()) {
    const auto frame = to_baseline_frame(*visited.back());
    for (std::size_t i = 0; i < frame.size(); ++i) {
      rep.final_max_goal_distance = std::max(rep.final_max_goal_distance, (frame[i] - scenario.desired[i]).norm());
    }
  }
  return rep;
}

MonteCarloResult monte_carlo(const Scenario& scenario, std::size_t n_trials, std::uint64_t base_seed,
                             const MonteCarloOptions& options) {
  if (n_trials == 0) throw InvalidArgument("monte_carlo: n_trials must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();

  struct TrialOutcome {
    std::vector<double> sq;
    Termination termination = Termination::MaxSlots;
    AuditReport audit;
    std::optional<TrialTrace> trace;
  };
  std::vector<TrialOutcome> outcomes(n_trials);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t m = next++; m < n_trials; m = next++) {
      TrialTrace trace = run_trial(scenario, base_seed + m);
      auto& out = outcomes[m];
      out.termination = trace.termination;
      out.sq = squared_errors(trace, scenario);
      out.audit = trajectory_audit(trace, scenario);
      if (m < options.keep_traces) out.trace = std::move(trace);
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, n_trials);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  MonteCarloResult res;
  const std::size_t n = scenario.n_uavs;
  std::vector<const TrialOutcome*> included;
  for (auto& o : outcomes) {
    switch (o.termination) {
      case Termination::Converged:
        ++res.converged;
        break;
      case Termination::MaxSlots:
        ++res.max_slots;
        break;
      case Termination::SingularFim:
        ++res.singular;
        break;
    }
    res.audit.merge(o.audit);
    res.trial_audits.push_back(o.audit);
    if (o.trace) res.traces.push_back(std::move(*o.trace));
    if (o.termination != Termination::SingularFim && !o.sq.empty()) included.push_back(&o);
  }

  res.series.n_trials = included.size();
  std::size_t len = 0;
  for (const auto* o : included) len = std::max(len, o->sq.size() / n);
  res.series.values.assign(len, 0.0);
  res.series.stderr_values.assign(len, 0.0);

  const double mc = static_cast<double>(included.size());
  std::vector<double> mean_sq(n);
  std::vector<double> s(included.size());
  auto sq_at = [n](const TrialOutcome* o, std::size_t k, std::size_t i) {
    const std::size_t slots = o->sq.size() / n;
    return o->sq[std::min(k, slots - 1) * n + i];
  };
  for (std::size_t k = 0; k < len && !included.empty(); ++k) {
    double rmse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto* o : included) acc += sq_at(o, k, i);
      mean_sq[i] = acc / mc;
      rmse += std::sqrt(mean_sq[i]);
    }
    res.series.values[k] = rmse / static_cast<double>(n);

    // Delta-method standard error of the average of sqrt(mean) terms.
    if (included.size() > 1) {
      double mean_s = 0.0;
      for (std::size_t m = 0; m < included.size(); ++m) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (mean_sq[i] > 0.0) acc += sq_at(included[m], k, i) / (2.0 * std::sqrt(mean_sq[i]));
        }
        s[m] = acc;
        mean_s += acc;
      }
      mean_s /= mc;
      double var = 0.0;
      for (double v : s) var += (v - mean_s) * (v - mean_s);
      var /= (mc - 1.0);
      res.series.stderr_values[k] = std::sqrt(var / mc) / static_cast<double>(n);
    }
  }

  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::vector<SweepRow> localization_sweep(const Scenario& templ, const std::vector<std::size_t>& n_values,
                                         double radius) {
  std::vector<SweepRow> rows;
  for (std::size_t n : n_values) {
    if (n < 3) throw InvalidArgument("localization_sweep: every N must be at least 3");
    Scenario s = templ;
    s.n_uavs = n;
    s.n_known = 1;
    s.initial_state = SwarmState{{}, circle_topology(n, radius), 0};
    s.desired = s.initial_state.uavs;

    const struct {
      SensingMode mode;
      bool xi;
    } configs[] = {{SensingMode::Ranging, false}, {SensingMode::Ranging, true}, {SensingMode::Bearing, false}};
    for (const auto& c : configs) {
      s.sensing_mode = c.mode;
      s.noise.model_aware = c.xi;
      const CrlbMatrix kappa = invert_fim(assemble_fim(s.initial_state, s));
      rows.push_back({n, c.mode, c.xi, network_rmse(kappa)});
    }
  }
  return rows;
}

}  // namespace swarmsim
