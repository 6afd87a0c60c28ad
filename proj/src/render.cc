#include "sentvec/render.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace sentvec {
namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s == "-0.000000" || s == "-0.00" || s == "-0.000" || s == "-0.0") s.erase(0, 1);
  return s;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string md_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;

// Value axis: [0, 1] for accuracy, [lo, 1] for Pearson with lo = 0 unless
// some value is negative.
std::pair<double, double> value_range(Measure measure, double min_value) {
  if (measure == Measure::kPearson && min_value < 0.0)
    return {std::floor(min_value * 5.0) / 5.0, 1.0};
  return {0.0, 1.0};
}

std::string axis_label(Measure m) {
  return m == Measure::kAccuracy ? "accuracy (%)" : "Pearson r";
}

std::string tick_label(Measure m, double v) {
  return m == Measure::kAccuracy ? fixed(v * 100.0, 0) : fixed(v, 1);
}

struct Frame {
  double lo, hi;
  double y(double v) const {
    const double plot_h = kHeight - kTop - kBottom;
    return kTop + plot_h * (hi - v) / (hi - lo);
  }
};

void svg_open(std::ostringstream& os, const std::string& title, Measure m, const Frame& f) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"#ffffff\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << xml_escape(title) << "</text>\n";
  const double x0 = kLeft, x1 = kWidth - kRight;
  for (int i = 0; i <= 5; ++i) {
    const double v = f.lo + (f.hi - f.lo) * i / 5.0;
    const std::string y = fixed(f.y(v), 1);
    os << "<line x1=\"" << x0 << "\" y1=\"" << y << "\" x2=\"" << x1 << "\" y2=\"" << y
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << x0 - 6 << "\" y=\"" << y << "\" text-anchor=\"end\" "
       << "dominant-baseline=\"middle\">" << tick_label(m, v) << "</text>\n";
  }
  os << "<line x1=\"" << x0 << "\" y1=\"" << kTop << "\" x2=\"" << x0 << "\" y2=\""
     << kHeight - kBottom << "\" stroke=\"#000000\"/>\n";
  os << "<line x1=\"" << x0 << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << x1
     << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"#000000\"/>\n";
  os << "<text transform=\"translate(18," << fixed((kTop + kHeight - kBottom) / 2, 1)
     << ") rotate(-90)\" text-anchor=\"middle\">" << axis_label(m) << "</text>\n";
}

void svg_legend(std::ostringstream& os, const std::vector<std::string>& names) {
  const double x = kWidth - kRight + 16;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 10 + 20.0 * static_cast<double>(i);
    os << "<rect x=\"" << x << "\" y=\"" << y - 6 << "\" width=\"12\" height=\"12\" fill=\""
       << kPalette[i % std::size(kPalette)] << "\"/>\n";
    os << "<text x=\"" << x + 18 << "\" y=\"" << y << "\" dominant-baseline=\"middle\">"
       << xml_escape(names[i]) << "</text>\n";
  }
}

}  // namespace

std::string format_cell(Measure measure, double value) {
  return measure == Measure::kAccuracy ? fixed(value * 100.0, 2) : fixed(value, 3);
}

std::string render_csv(const ResultMatrix& m) {
  std::string out = "method,task,measure,value,n\n";
  for (const auto& c : m.cells)
    out += csv_field(c.method_name) + ',' + csv_field(c.task_name) + ',' +
           to_string(c.measure) + ',' + fixed(c.value, 6) + ',' + std::to_string(c.n) + '\n';
  return out;
}

std::string render_json(const ResultMatrix& m) {
  nlohmann::json j;
  j["methods"] = m.methods;
  j["tasks"] = nlohmann::json::array();
  for (std::size_t t = 0; t < m.tasks.size(); ++t)
    j["tasks"].push_back({{"name", m.tasks[t]}, {"measure", to_string(m.measures[t])}});
  j["cells"] = nlohmann::json::array();
  for (const auto& c : m.cells)
    j["cells"].push_back({{"method", c.method_name},
                          {"task", c.task_name},
                          {"measure", to_string(c.measure)},
                          {"value", c.value},
                          {"n", c.n}});
  return j.dump(2) + "\n";
}

std::string render_markdown(const ResultMatrix& m) {
  std::string out = "| Method |";
  for (const auto& t : m.tasks) out += ' ' + md_escape(t) + " |";
  out += "\n|---|";
  for (std::size_t t = 0; t < m.tasks.size(); ++t) out += "---:|";
  out += '\n';
  for (std::size_t r = 0; r < m.methods.size(); ++r) {
    out += "| " + md_escape(m.methods[r]) + " |";
    for (std::size_t t = 0; t < m.tasks.size(); ++t)
      out += ' ' + format_cell(m.at(r, t).measure, m.at(r, t).value) + " |";
    out += '\n';
  }
  out += "\nAccuracy in percent; Pearson correlation for relatedness tasks.\n";
  return out;
}

std::string render_bar_svg(const ResultMatrix& m, std::size_t task) {
  const Measure measure = m.measures[task];
  double min_value = 0.0;
  for (std::size_t r = 0; r < m.methods.size(); ++r)
    min_value = std::min(min_value, m.at(r, task).value);
  const auto [lo, hi] = value_range(measure, min_value);
  const Frame f{lo, hi};

  std::ostringstream os;
  svg_open(os, m.tasks[task], measure, f);
  const double plot_w = kWidth - kLeft - kRight;
  const double slot = plot_w / static_cast<double>(std::max<std::size_t>(1, m.methods.size()));
  for (std::size_t r = 0; r < m.methods.size(); ++r) {
    const double v = m.at(r, task).value;
    const double x = kLeft + slot * (static_cast<double>(r) + 0.15);
    // The axis always includes 0, so bars grow from the zero line.
    const double top = f.y(std::max(v, 0.0));
    const double y0 = std::min(f.y(v), f.y(0.0));
    const double h = std::abs(f.y(v) - f.y(0.0));
    os << "<rect x=\"" << fixed(x, 1) << "\" y=\"" << fixed(y0, 1) << "\" width=\""
       << fixed(slot * 0.7, 1) << "\" height=\"" << fixed(h, 1) << "\" fill=\""
       << kPalette[r % std::size(kPalette)] << "\"/>\n";
    os << "<text x=\"" << fixed(x + slot * 0.35, 1) << "\" y=\"" << fixed(top - 4, 1)
       << "\" text-anchor=\"middle\">" << format_cell(measure, v) << "</text>\n";
  }
  svg_legend(os, m.methods);
  os << "</svg>\n";
  return os.str();
}

std::string render_sweep_csv(const SweepResult& s) {
  std::string out = "dim,method,task,measure,value,n\n";
  for (std::size_t i = 0; i < s.dims.size(); ++i)
    for (const auto& c : s.matrices[i].cells)
      out += std::to_string(s.dims[i]) + ',' + csv_field(c.method_name) + ',' +
             csv_field(c.task_name) + ',' + to_string(c.measure) + ',' + fixed(c.value, 6) +
             ',' + std::to_string(c.n) + '\n';
  return out;
}

std::string render_sweep_svg(const SweepResult& s, std::size_t task) {
  const ResultMatrix& first = s.matrices.front();
  const Measure measure = first.measures[task];
  double min_value = 0.0;
  for (const auto& m : s.matrices)
    for (std::size_t r = 0; r < m.methods.size(); ++r)
      min_value = std::min(min_value, m.at(r, task).value);
  const auto [lo, hi] = value_range(measure, min_value);
  const Frame f{lo, hi};

  std::ostringstream os;
  svg_open(os, first.tasks[task], measure, f);
  const double plot_w = kWidth - kLeft - kRight;
  const std::size_t n = s.dims.size();
  auto x_of = [&](std::size_t i) {
    return n == 1 ? kLeft + plot_w / 2
                  : kLeft + 20 + (plot_w - 40) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  for (std::size_t i = 0; i < n; ++i) {
    os << "<text class=\"xtick\" x=\"" << fixed(x_of(i), 1) << "\" y=\""
       << kHeight - kBottom + 18 << "\" text-anchor=\"middle\">" << s.dims[i] << "</text>\n";
  }
  os << "<text x=\"" << fixed(kLeft + plot_w / 2, 1) << "\" y=\"" << kHeight - 16
     << "\" text-anchor=\"middle\">vector size</text>\n";
  for (std::size_t r = 0; r < first.methods.size(); ++r) {
    const char* color = kPalette[r % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < n; ++i) {
      if (!points.empty()) points += ' ';
      points += fixed(x_of(i), 1) + ',' + fixed(f.y(s.matrices[i].at(r, task).value), 1);
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
       << points << "\"/>\n";
    for (std::size_t i = 0; i < n; ++i)
      os << "<circle cx=\"" << fixed(x_of(i), 1) << "\" cy=\""
         << fixed(f.y(s.matrices[i].at(r, task).value), 1) << "\" r=\"3\" fill=\"" << color
         << "\"/>\n";
  }
  svg_legend(os, first.methods);
  os << "</svg>\n";
  return os.str();
}

std::string file_stem(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
    out += ok ? c : '_';
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out;
}

}  // namespace sentvec
