#include "swarmsim/output.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace swarmsim {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  return out;
}

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_ellipses_csv(const std::filesystem::path& path, const std::vector<EllipseRow>& rows) {
  auto out = open_out(path);
  out << "uav_id,cx,cy,major,minor,orientation_rad\n";
  for (const auto& r : rows) {
    const auto& e = r.ellipse;
    out << r.uav_id << ',' << format_double(e.center.x) << ',' << format_double(e.center.y) << ','
        << format_double(e.major) << ',' << format_double(e.minor) << ',' << format_double(e.orientation) << '\n';
  }
}

void write_rmse_series_csv(const std::filesystem::path& path, const RmseSeries& series) {
  auto out = open_out(path);
  out << "slot,rmse_m,stderr_m\n";
  for (std::size_t k = 0; k < series.values.size(); ++k) {
    out << k << ',' << format_double(series.values[k]) << ',' << format_double(series.stderr_values[k]) << '\n';
  }
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  out << "n_uavs,mode,xi,rmse_m\n";
  for (const auto& r : rows) {
    out << r.n_uavs << ',' << to_string(r.mode) << ',' << (r.xi ? 1 : 0) << ',' << format_double(r.rmse) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const TrialTrace& trace) {
  auto out = open_out(path);
  out << "slot,uav_id,true_x,true_y,est_x,est_y,u_x,u_y\n";
  for (const auto& r : trace.records) {
    for (std::size_t i = 0; i < r.truth.uavs.size(); ++i) {
      const Point2 t = r.truth.uavs[i];
      const Point2 e = r.estimate[i];
      const Point2 u = r.control.steps[i];
      out << r.truth.slot << ',' << (i + 1) << ',' << format_double(t.x) << ',' << format_double(t.y) << ','
          << format_double(e.x) << ',' << format_double(e.y) << ',' << format_double(u.x) << ','
          << format_double(u.y) << '\n';
    }
  }
  const auto& f = trace.final_state;
  if (trace.records.empty() || f.slot > trace.records.back().truth.slot) {
    for (std::size_t i = 0; i < f.uavs.size(); ++i) {
      out << f.slot << ',' << (i + 1) << ',' << format_double(f.uavs[i].x) << ',' << format_double(f.uavs[i].y)
          << ",nan,nan,0,0\n";
    }
  }
}

std::vector<std::vector<Point2>> read_trace_positions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("slot,uav_id,true_x,true_y", 0) != 0) {
    throw InvalidArgument(path.string() + " is not a trace file (unexpected header)");
  }
  std::map<long, std::map<long, Point2>> by_slot;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (f.size() < 4) throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": too few columns");
    try {
      by_slot[std::stol(f[0])][std::stol(f[1])] = {std::stod(f[2]), std::stod(f[3])};
    } catch (const std::exception&) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  std::vector<std::vector<Point2>> states;
  states.reserve(by_slot.size());
  for (const auto& [slot, uavs] : by_slot) {
    std::vector<Point2> s;
    s.reserve(uavs.size());
    for (const auto& [id, p] : uavs) s.push_back(p);
    states.push_back(std::move(s));
  }
  return states;
}

nlohmann::json audit_to_json(const AuditReport& r) {
  return {{"min_inter_uav_distance_m", finite_or_null(r.min_inter_uav_distance)},
          {"min_obstacle_clearance_m", finite_or_null(r.min_obstacle_clearance)},
          {"safety_violation_slots", r.safety_violation_slots},
          {"clearance_violation_slots", r.clearance_violation_slots},
          {"segment_intersections", r.segment_intersections},
          {"goal_violations", r.goal_violations},
          {"final_max_goal_distance_m", r.final_max_goal_distance},
          {"states_checked", r.states_checked},
          {"clean", r.clean()}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

}  // namespace swarmsim
