#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmsim/crlb.hpp"
#include "swarmsim/sim.hpp"

namespace swarmsim {

/// 9 significant digits, the format of every floating-point CSV field.
std::string format_double(double v);

struct EllipseRow {
  std::size_t uav_id = 0;  // 1-based UAV number
  ErrorEllipse ellipse;
};

void write_ellipses_csv(const std::filesystem::path& path, const std::vector<EllipseRow>& rows);
void write_rmse_series_csv(const std::filesystem::path& path, const RmseSeries& series);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
/// Columns slot, uav_id, true_x, true_y, est_x, est_y, u_x, u_y. When the
/// trial stopped at max_slots the post-step state is appended with nan
/// estimates and zero control.
void write_trace_csv(const std::filesystem::path& path, const TrialTrace& trace);

/// True positions per slot, read back from a trace CSV.
std::vector<std::vector<Point2>> read_trace_positions(const std::filesystem::path& path);

nlohmann::json audit_to_json(const AuditReport& report);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace swarmsim
