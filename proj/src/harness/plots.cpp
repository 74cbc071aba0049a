#include "softgrasp/harness/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace softgrasp::harness {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 360.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 44.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

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

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

void open_svg(std::ostringstream& svg, const std::string& title) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
      << escape(title) << "</text>\n";
}

void axes(std::ostringstream& svg, const Frame& f, const std::string& xlabel,
          const std::string& ylabel, int yticks) {
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << num(f.py(f.y0)) << "\" x2=\""
      << kWidth - kRight << "\" y2=\"" << num(f.py(f.y0)) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << num(f.py(f.y0)) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= yticks; ++i) {
    const double v = f.y0 + (f.y1 - f.y0) * i / yticks;
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(f.py(v) + 4)
        << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  svg << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 8
      << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
  svg << "<text x=\"14\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << kHeight / 2 << ")\">" << escape(ylabel) << "</text>\n";
}

struct BoxStats {
  double min, q1, median, q3, max;
};

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

std::vector<std::pair<std::string, BoxStats>> category_boxes(const std::vector<TrialResult>& trials) {
  std::vector<std::pair<std::string, BoxStats>> out;
  for (auto cat : {sim::Category::Soft, sim::Category::Fruit, sim::Category::Rigid,
                   sim::Category::Small, sim::Category::Long}) {
    std::vector<double> v;
    for (const auto& r : trials) {
      if (r.category == cat) v.push_back(r.pmc_ma);
    }
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    out.emplace_back(std::string(sim::to_string(cat)),
                     BoxStats{v.front(), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75),
                              v.back()});
  }
  return out;
}

}  // namespace

std::string mu_trace_svg(const control::RunRecord& record, const control::ControllerConfig& config,
                         std::optional<double> settle_time_s, const std::string& title) {
  std::ostringstream svg;
  open_svg(svg, title);
  const double t_end = record.ticks.empty() ? 1.0 : std::max(record.ticks.back().t_s, 1e-3);
  const Frame f{0.0, t_end, 0.0, 1.0};
  svg << "<rect x=\"" << num(f.px(0)) << "\" y=\"" << num(f.py(config.band_high()))
      << "\" width=\"" << num(f.px(t_end) - f.px(0)) << "\" height=\""
      << num(f.py(config.band_low()) - f.py(config.band_high()))
      << "\" fill=\"#cde8cd\"/>\n";
  svg << "<line x1=\"" << num(f.px(0)) << "\" y1=\"" << num(f.py(config.setpoint)) << "\" x2=\""
      << num(f.px(t_end)) << "\" y2=\"" << num(f.py(config.setpoint))
      << "\" stroke=\"#4a4\" stroke-dasharray=\"4 3\"/>\n";
  axes(svg, f, "time (s)", "mean deformation", 4);
  svg << "<polyline fill=\"none\" stroke=\"#1f4e9e\" stroke-width=\"1.2\" points=\"";
  for (const auto& t : record.ticks) svg << num(f.px(t.t_s)) << ',' << num(f.py(std::clamp(t.mu, 0.0, 1.0))) << ' ';
  svg << "\"/>\n";
  if (record.first_contact_s && settle_time_s) {
    const double at = *record.first_contact_s + *settle_time_s;
    svg << "<line x1=\"" << num(f.px(at)) << "\" y1=\"" << kTop << "\" x2=\"" << num(f.px(at))
        << "\" y2=\"" << num(f.py(0)) << "\" stroke=\"#c33\"/>\n";
    svg << "<text x=\"" << num(f.px(at) + 4) << "\" y=\"" << kTop + 12 << "\" fill=\"#c33\">settled "
        << num(*settle_time_s) << " s after contact</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string category_pmc_svg(const std::vector<TrialResult>& trials) {
  const auto boxes = category_boxes(trials);
  std::ostringstream svg;
  open_svg(svg, "Peak motor current by category");
  double top = 0.0;
  for (const auto& [name, b] : boxes) top = std::max(top, b.max);
  top = std::max(100.0, std::ceil(top / 100.0) * 100.0);
  const Frame f{0.0, static_cast<double>(std::max<std::size_t>(boxes.size(), 1)), 0.0, top};
  axes(svg, f, "category", "peak motor current (mA)", 4);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& [name, b] = boxes[i];
    const double cx = f.px(i + 0.5);
    const double half = (f.px(1) - f.px(0)) * 0.25;
    svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(f.py(b.min)) << "\" x2=\"" << num(cx)
        << "\" y2=\"" << num(f.py(b.max)) << "\" stroke=\"black\"/>\n";
    for (double w : {b.min, b.max}) {
      svg << "<line x1=\"" << num(cx - half / 2) << "\" y1=\"" << num(f.py(w)) << "\" x2=\""
          << num(cx + half / 2) << "\" y2=\"" << num(f.py(w)) << "\" stroke=\"black\"/>\n";
    }
    svg << "<rect x=\"" << num(cx - half) << "\" y=\"" << num(f.py(b.q3)) << "\" width=\""
        << num(2 * half) << "\" height=\"" << num(f.py(b.q1) - f.py(b.q3))
        << "\" fill=\"#9ab8e0\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << num(cx - half) << "\" y1=\"" << num(f.py(b.median)) << "\" x2=\""
        << num(cx + half) << "\" y2=\"" << num(f.py(b.median))
        << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << num(cx) << "\" y=\"" << num(f.py(0) + 14)
        << "\" text-anchor=\"middle\">" << name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plots(const std::vector<TrialResult>& trials, const std::filesystem::path& output_dir,
                const control::ControllerConfig& config) {
  if (trials.empty()) throw std::invalid_argument("no trial results to plot");
  // Render everything before touching the file system.
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  for (const auto& r : trials) {
    const auto record = control::read_run_csv(output_dir / r.run_record);
    const std::string stem = std::filesystem::path(r.run_record).stem().string();
    char title[96];
    std::snprintf(title, sizeof title, "Object %d (%s), trial %d", r.object_id,
                  std::string(sim::to_string(r.category)).c_str(), r.trial);
    files.emplace_back("plots/" + stem + ".svg", mu_trace_svg(record, config, r.settle_time_s, title));
  }
  files.emplace_back("plots/pmc_by_category.svg", category_pmc_svg(trials));
  std::ostringstream csv;
  csv << "category,min_mA,q1_mA,median_mA,q3_mA,max_mA\n";
  for (const auto& [name, b] : category_boxes(trials)) {
    csv << name << ',' << num(b.min) << ',' << num(b.q1) << ',' << num(b.median) << ','
        << num(b.q3) << ',' << num(b.max) << '\n';
  }
  files.emplace_back("plots/pmc_by_category.csv", csv.str());

  std::filesystem::create_directories(output_dir / "plots");
  for (const auto& [rel, text] : files) {
    std::ofstream out(output_dir / rel);
    if (!out) throw std::runtime_error("cannot write " + (output_dir / rel).string());
    out << text;
  }
}

}  // namespace softgrasp::harness
