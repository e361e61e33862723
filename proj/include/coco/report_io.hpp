#pragma once

#include "coco/instances.hpp"
#include "coco/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace coco::io {

// %.17g, so values round-trip.
std::string format_double(double v);

std::string trace_csv(const Trace& trace, int d);
nlohmann::json metrics_json(const MetricsReport& rep);
nlohmann::json trace_summary_json(const Trace& trace);
std::string widths_csv(const MetricsReport& rep);
std::string theta_csv(const MetricsReport& rep);

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string svg_line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                           const std::vector<Series>& series);

// Writes through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace coco::io
