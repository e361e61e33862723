#include "coco/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace coco::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_csv(const Trace& trace, int d) {
  std::ostringstream os;
  os << 't';
  for (const char* p : {"x", "y", "b"}) {
    for (int i = 0; i < d; ++i) os << ',' << p << i;
  }
  os << ",cost,violation,dist,eta,ccv_running,policy_tag\n";
  for (const auto& r : trace.records) {
    os << r.t;
    for (const Vector* v : {&r.x, &r.y, &r.b}) {
      for (int i = 0; i < d; ++i) os << ',' << format_double((*v)[i]);
    }
    os << ',' << format_double(r.cost) << ',' << format_double(r.violation) << ',' << format_double(r.dist) << ','
       << format_double(r.eta) << ',' << format_double(r.ccv_running) << ',' << r.policy_tag << '\n';
  }
  return os.str();
}

namespace {

nlohmann::json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json pairs(const std::vector<std::pair<int, double>>& p) {
  auto arr = nlohmann::json::array();
  for (const auto& [t, v] : p) arr.push_back({t, v});
  return arr;
}

}  // namespace

nlohmann::json metrics_json(const MetricsReport& rep) {
  nlohmann::json j;
  j["regret"] = rep.regret;
  if (rep.comparator.size() > 0) j["comparator"] = vec(rep.comparator);
  j["ccv"] = rep.ccv_curve.empty() ? 0.0 : rep.ccv_curve.back().second;
  j["movement_cost"] = rep.movement_cost;
  j["c_star"] = rep.c_star ? nlohmann::json(*rep.c_star) : nlohmann::json(nullptr);
  j["c_star_rounds"] = rep.c_star_per_round.size();
  if (rep.monotone) j["monotone"] = *rep.monotone;
  if (rep.t_orth) j["t_orth"] = *rep.t_orth;
  auto b = nlohmann::json::array();
  for (const auto& c : rep.bounds) b.push_back({{"name", c.name}, {"observed", c.observed}, {"bound", c.bound}, {"pass", c.pass}});
  j["bounds"] = b;
  // The full ccv curve is in trace.csv; keep a thinned copy here.
  auto curve = nlohmann::json::array();
  const std::size_t stride = std::max<std::size_t>(1, rep.ccv_curve.size() / 200);
  for (std::size_t i = 0; i < rep.ccv_curve.size(); i += stride) curve.push_back({rep.ccv_curve[i].first, rep.ccv_curve[i].second});
  if (!rep.ccv_curve.empty() && (rep.ccv_curve.size() - 1) % stride != 0) {
    curve.push_back({rep.ccv_curve.back().first, rep.ccv_curve.back().second});
  }
  j["ccv_curve"] = curve;
  j["c_star_per_round"] = pairs(rep.c_star_per_round);
  return j;
}

nlohmann::json trace_summary_json(const Trace& trace) {
  nlohmann::json j;
  j["policy"] = trace.policy;
  j["policy_params"] = trace.policy_params;
  j["seed"] = trace.seed;
  j["T"] = trace.records.size();
  j["valid"] = trace.valid;
  if (!trace.valid) j["error"] = trace.error;
  j["switch_time"] = trace.switch_time ? nlohmann::json(*trace.switch_time) : nlohmann::json(nullptr);
  j["ccv"] = trace.ccv();
  return j;
}

std::string widths_csv(const MetricsReport& rep) {
  std::ostringstream os;
  os << "t,width,stderr\n";
  for (const auto& w : rep.width_curve) os << w.t << ',' << format_double(w.estimate) << ',' << format_double(w.stderr_) << '\n';
  return os.str();
}

std::string theta_csv(const MetricsReport& rep) {
  std::ostringstream os;
  os << "t,theta\n";
  for (const auto& [t, th] : rep.theta_curve) os << t << ',' << format_double(th) << '\n';
  return os.str();
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                           const std::vector<Series>& series) {
  constexpr double W = 640, H = 400, L = 70, R = 20, Tm = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - Tm - B); };

  static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape(title) << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\" font-size=\"11\">" << short_num(x0) << "</text>\n";
  os << "<text x=\"" << W - R << "\" y=\"" << H - B + 16 << "\" text-anchor=\"end\" font-size=\"11\">" << short_num(x1) << "</text>\n";
  os << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" text-anchor=\"end\" font-size=\"11\">" << short_num(y0) << "</text>\n";
  os << "<text x=\"" << L - 4 << "\" y=\"" << Tm + 10 << "\" text-anchor=\"end\" font-size=\"11\">" << short_num(y1) << "</text>\n";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (Tm + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
     << (Tm + H - B) / 2 << ")\">" << escape(ylabel) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = colors[k % 5];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    // Thin long series to a few thousand vertices.
    const auto& pts = series[k].points;
    const std::size_t stride = std::max<std::size_t>(1, pts.size() / 2000);
    for (std::size_t i = 0; i < pts.size(); i += stride) {
      if (std::isfinite(pts[i].first) && std::isfinite(pts[i].second)) {
        os << short_num(px(pts[i].first)) << ',' << short_num(py(pts[i].second)) << ' ';
      }
    }
    if (!pts.empty()) os << short_num(px(pts.back().first)) << ',' << short_num(py(pts.back().second));
    os << "\"/>\n";
    if (!series[k].label.empty()) {
      os << "<text x=\"" << W - R - 4 << "\" y=\"" << Tm + 14 + 14 * k << "\" text-anchor=\"end\" font-size=\"12\" fill=\""
         << color << "\">" << escape(series[k].label) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp);
    f << content;
    if (!f) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace coco::io
