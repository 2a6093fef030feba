#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rcmik/bench/tracking.hpp"

namespace rcmik::bench {

/// Writes through a sibling temporary file and renames it into place, so a
/// reader never sees a partially written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move report into '" + path.string() + "'");
  }
}

inline const std::vector<std::string>& series_columns() {
  static const std::vector<std::string> cols = {"step", "t", "m", "e_rcm_norm", "e_ee_norm",
                                                "solve_time_s"};
  return cols;
}

inline nlohmann::ordered_json aggregates_json(const TrackingAggregates& a) {
  nlohmann::ordered_json j;
  j["avg_manipulability"] = a.avg_manipulability;
  j["max_manipulability"] = a.max_manipulability;
  j["avg_rcm_error_m"] = a.avg_rcm_error;
  j["max_rcm_error_after_settling_m"] = a.max_rcm_error_after_settling;
  j["avg_ee_error"] = a.avg_ee_error;
  j["max_ee_error"] = a.max_ee_error;
  j["mean_solve_time_s"] = a.mean_solve_time_s;
  j["max_solve_time_s"] = a.max_solve_time_s;
  j["max_joint_limit_violation"] = a.max_joint_limit_violation;
  j["gradient_flags"] = a.gradient_flags;
  return j;
}

inline TrackingAggregates aggregates_from_json(const nlohmann::json& j) {
  TrackingAggregates a;
  a.avg_manipulability = j.at("avg_manipulability").get<double>();
  a.max_manipulability = j.at("max_manipulability").get<double>();
  a.avg_rcm_error = j.at("avg_rcm_error_m").get<double>();
  a.max_rcm_error_after_settling = j.at("max_rcm_error_after_settling_m").get<double>();
  a.avg_ee_error = j.at("avg_ee_error").get<double>();
  a.max_ee_error = j.at("max_ee_error").get<double>();
  a.mean_solve_time_s = j.at("mean_solve_time_s").get<double>();
  a.max_solve_time_s = j.at("max_solve_time_s").get<double>();
  a.max_joint_limit_violation = j.at("max_joint_limit_violation").get<double>();
  a.gradient_flags = j.at("gradient_flags").get<int>();
  return a;
}

/// Report document: metadata, aggregates, then the series in fixed column order.
inline nlohmann::ordered_json report_json(const TrackingReport& r) {
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  j["chain"] = r.chain;
  j["fingerprint"] = r.fingerprint;
  j["path"] = r.path_kind;
  j["mode"] = r.constrained ? "constrained" : "unconstrained";
  j["optimize_manipulability"] = r.optimize;
  j["timing_recorded"] = r.timing_recorded;
  j["aggregates"] = aggregates_json(r.aggregates);
  nlohmann::ordered_json series;
  series["columns"] = series_columns();
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.size(); ++i) {
    rows.push_back({r.step[i], r.t[i], r.manipulability[i], r.rcm_error[i], r.ee_error[i],
                    r.solve_time_s[i]});
  }
  series["rows"] = std::move(rows);
  j["series"] = std::move(series);
  return j;
}

inline std::string report_json_text(const TrackingReport& r) { return report_json(r).dump(2) + "\n"; }

inline std::string report_csv(const TrackingReport& r) {
  std::ostringstream os;
  const auto& cols = series_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << "\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    os << r.step[i] << "," << detail::format_double(r.t[i]) << ","
       << detail::format_double(r.manipulability[i]) << "," << detail::format_double(r.rcm_error[i])
       << "," << detail::format_double(r.ee_error[i]) << ","
       << detail::format_double(r.solve_time_s[i]) << "\n";
  }
  return os.str();
}

/// Reads a report written by report_json_text back into memory (series and
/// aggregates; joint trajectories are not stored in the file).
inline TrackingReport parse_report(const std::string& text, const std::string& origin = "report") {
  TrackingReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.scenario = j.at("scenario").get<std::string>();
    r.chain = j.at("chain").get<std::string>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.path_kind = j.at("path").get<std::string>();
    r.constrained = j.at("mode").get<std::string>() == "constrained";
    r.optimize = j.at("optimize_manipulability").get<bool>();
    r.timing_recorded = j.at("timing_recorded").get<bool>();
    r.aggregates = aggregates_from_json(j.at("aggregates"));
    const auto& series = j.at("series");
    if (series.at("columns").get<std::vector<std::string>>() != series_columns()) {
      throw ParseError(origin + ": unexpected series columns");
    }
    for (const auto& row : series.at("rows")) {
      if (!row.is_array() || row.size() != series_columns().size()) {
        throw ParseError(origin + ": malformed series row");
      }
      r.step.push_back(row[0].get<int>());
      r.t.push_back(row[1].get<double>());
      r.manipulability.push_back(row[2].get<double>());
      r.rcm_error.push_back(row[3].get<double>());
      r.ee_error.push_back(row[4].get<double>());
      r.solve_time_s.push_back(row[5].get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
  return r;
}

inline TrackingReport load_report(const std::filesystem::path& path) {
  return parse_report(read_text_file(path.string()), path.string());
}

/// Baseline (optimisation off) against optimised run of the same scenario.
struct ComparisonSummary {
  std::string scenario;
  std::string chain;
  bool constrained = false;
  TrackingAggregates baseline;
  TrackingAggregates optimized;

  static double pct(double before, double after) {
    return before != 0.0 ? 100.0 * (after - before) / before : 0.0;
  }
  double avg_m_change_pct() const {
    return pct(baseline.avg_manipulability, optimized.avg_manipulability);
  }
  double max_m_change_pct() const {
    return pct(baseline.max_manipulability, optimized.max_manipulability);
  }
  double solve_time_change_pct() const {
    return pct(baseline.mean_solve_time_s, optimized.mean_solve_time_s);
  }
};

inline ComparisonSummary compare_runs(const TrackingReport& baseline, const TrackingReport& optimized) {
  if (baseline.fingerprint != optimized.fingerprint) {
    throw ValidationError("compare: reports come from different scenarios (" + baseline.fingerprint +
                          " vs " + optimized.fingerprint + ")");
  }
  ComparisonSummary s;
  s.scenario = baseline.scenario;
  s.chain = baseline.chain;
  s.constrained = baseline.constrained;
  s.baseline = baseline.aggregates;
  s.optimized = optimized.aggregates;
  return s;
}

inline nlohmann::ordered_json comparison_json(const ComparisonSummary& s) {
  nlohmann::ordered_json j;
  j["scenario"] = s.scenario;
  j["chain"] = s.chain;
  j["mode"] = s.constrained ? "constrained" : "unconstrained";
  j["baseline"] = aggregates_json(s.baseline);
  j["optimized"] = aggregates_json(s.optimized);
  j["avg_m_change_pct"] = s.avg_m_change_pct();
  j["max_m_change_pct"] = s.max_m_change_pct();
  j["solve_time_change_pct"] = s.solve_time_change_pct();
  return j;
}

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Human-readable comparison table.
inline std::string comparison_table(const ComparisonSummary& s) {
  auto row = [](const std::string& label, const std::string& a, const std::string& b,
                const std::string& c) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-28s %14s %14s %10s\n", label.c_str(), a.c_str(), b.c_str(),
                  c.c_str());
    return std::string(buf);
  };
  std::string out = s.scenario + " (" + s.chain + ", " +
                    (s.constrained ? "constrained" : "unconstrained") + ")\n";
  out += row("", "without", "with", "change");
  out += row("average manipulability", format_fixed(s.baseline.avg_manipulability, 4),
             format_fixed(s.optimized.avg_manipulability, 4),
             format_fixed(s.avg_m_change_pct(), 1) + "%");
  out += row("max manipulability", format_fixed(s.baseline.max_manipulability, 4),
             format_fixed(s.optimized.max_manipulability, 4),
             format_fixed(s.max_m_change_pct(), 1) + "%");
  if (s.constrained) {
    out += row("average RCM error [mm]", format_fixed(1e3 * s.baseline.avg_rcm_error, 4),
               format_fixed(1e3 * s.optimized.avg_rcm_error, 4), "");
  }
  out += row("average EE error", format_fixed(s.baseline.avg_ee_error, 6),
             format_fixed(s.optimized.avg_ee_error, 6), "");
  out += row("mean solve time [ms]", format_fixed(1e3 * s.baseline.mean_solve_time_s, 3),
             format_fixed(1e3 * s.optimized.mean_solve_time_s, 3),
             format_fixed(s.solve_time_change_pct(), 1) + "%");
  return out;
}

// ---------------------------------------------------------------- plotting

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline std::string num(double v) { return format_fixed(v, 2); }

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  return colors[i % 5];
}

}  // namespace detail

/// Line chart as a standalone SVG document.
inline std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label, const std::vector<PlotSeries>& series) {
  const double w = 720, h = 420, ml = 80, mr = 20, mt = 40, mb = 60;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (first) {
        x0 = x1 = s.x[i];
        y0 = y1 = s.y[i];
        first = false;
      }
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + (y0 == 0.0 ? 1.0 : std::abs(y0) * 0.1);
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << detail::svg_escape(title) << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\""
     << h - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    os << "<text x=\"" << detail::num(px(xv)) << "\" y=\"" << h - mb + 16
       << "\" text-anchor=\"middle\">" << detail::tick_label(xv) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << detail::num(py(yv) + 4)
       << "\" text-anchor=\"end\">" << detail::tick_label(yv) << "</text>\n";
  }
  os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 18 << "\" text-anchor=\"middle\">"
     << detail::svg_escape(x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << (mt + h - mb) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << detail::svg_escape(y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    os << "<polyline fill=\"none\" stroke=\"" << detail::palette(k) << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      os << detail::num(px(s.x[i])) << "," << detail::num(py(s.y[i])) << " ";
    }
    os << "\"/>\n";
    os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 + 16 * k << "\" fill=\""
       << detail::palette(k) << "\">" << detail::svg_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Histogram of one or more samples sharing the same bins.
inline std::string svg_histogram(const std::string& title, const std::string& x_label,
                                 const std::vector<PlotSeries>& samples, int bins = 40) {
  double lo = 0, hi = 0;
  bool first = true;
  for (const auto& s : samples) {
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      if (first) {
        lo = hi = v;
        first = false;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi <= lo) hi = lo + 1.0;
  const double width = (hi - lo) / bins;
  std::vector<PlotSeries> outline;
  for (const auto& s : samples) {
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      auto b = static_cast<int>((v - lo) / width);
      counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))] += 1.0;
    }
    PlotSeries p{s.label, {}, {}};
    for (int b = 0; b < bins; ++b) {
      const double l = lo + b * width;
      p.x.insert(p.x.end(), {l, l, l + width, l + width});
      const double prev = b ? counts[static_cast<std::size_t>(b - 1)] : 0.0;
      p.y.insert(p.y.end(), {prev, counts[static_cast<std::size_t>(b)],
                             counts[static_cast<std::size_t>(b)], counts[static_cast<std::size_t>(b)]});
    }
    p.x.push_back(hi);
    p.y.push_back(0.0);
    outline.push_back(std::move(p));
  }
  return svg_line_chart(title, x_label, "steps", outline);
}

inline std::string run_label(const TrackingReport& r) {
  return r.optimize ? "with manipulability" : "without manipulability";
}

/// Writes manipulability.svg, rcm_error.svg and solve_time_hist.svg into
/// out_dir, one series per report. Unconstrained runs plot a zero RCM error.
inline std::vector<std::filesystem::path> write_plots(const std::vector<TrackingReport>& reports,
                                                      const std::filesystem::path& out_dir) {
  if (reports.empty()) throw ValidationError("plot: no reports given");
  for (const auto& r : reports) {
    if (r.size() == 0) throw ValidationError("plot: report '" + r.scenario + "' has an empty series");
    if (r.fingerprint != reports.front().fingerprint) {
      throw ValidationError("plot: reports come from different scenarios");
    }
  }
  auto scaled = [](const std::vector<double>& v, double k) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [k](double x) { return k * x; });
    return out;
  };
  std::vector<PlotSeries> m, rcm, times;
  for (const auto& r : reports) {
    const std::vector<double> steps(r.step.begin(), r.step.end());
    m.push_back({run_label(r), steps, r.manipulability});
    rcm.push_back({run_label(r), steps, scaled(r.rcm_error, 1e3)});
    times.push_back({run_label(r), steps, scaled(r.solve_time_s, 1e3)});
  }
  const std::string name = reports.front().scenario;
  const std::vector<std::pair<std::string, std::string>> files = {
      {"manipulability.svg",
       svg_line_chart(name + ": manipulability", "trajectory step [-]", "manipulability m [-]", m)},
      {"rcm_error.svg",
       svg_line_chart(name + ": RCM error", "trajectory step [-]", "RCM error [mm]", rcm)},
      {"solve_time_hist.svg",
       svg_histogram(name + ": solve time per step", "solve time [ms]", times)}};
  std::vector<std::filesystem::path> written;
  for (const auto& [file, svg] : files) {
    written.push_back(out_dir / file);
    write_file_atomic(written.back(), svg);
  }
  return written;
}

}  // namespace rcmik::bench
