#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "stfem/error.hpp"
#include "stfem/study.hpp"

namespace stfem {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_loglog_svg(const std::string& title, const std::string& ylabel,
                              const std::vector<PlotSeries>& series) {
  double hmin = INFINITY, hmax = -INFINITY, emin = INFINITY, emax = -INFINITY;
  bool any = false;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.h.size() && i < s.error.size(); ++i) {
      if (!(s.h[i] > 0.0 && s.error[i] > 0.0)) continue;
      any = true;
      hmin = std::min(hmin, s.h[i]);
      hmax = std::max(hmax, s.h[i]);
      emin = std::min(emin, s.error[i]);
      emax = std::max(emax, s.error[i]);
    }
  }
  if (!any) throw Error(ErrorCode::InvalidArgument, "nothing to plot: the study is empty");

  const double x0 = std::floor(std::log10(hmin)), x1 = std::ceil(std::log10(hmax));
  const double y0 = std::floor(std::log10(emin)), y1 = std::ceil(std::log10(emax));
  const double xs = std::max(x1 - x0, 1.0), ys = std::max(y1 - y0, 1.0);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double h) { return kLeft + (std::log10(h) - x0) / xs * pw; };
  auto py = [&](double e) { return kTop + ph - (std::log10(e) - y0) / ys * ph; };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = x0; d <= x0 + xs + 1e-9; d += 1.0) {
    const double x = kLeft + (d - x0) / xs * pw;
    os << "<line x1=\"" << x << "\" y1=\"" << kTop << "\" x2=\"" << x << "\" y2=\"" << kTop + ph
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">1e"
       << static_cast<int>(d) << "</text>\n";
  }
  for (double d = y0; d <= y0 + ys + 1e-9; d += 1.0) {
    const double y = kTop + ph - (d - y0) / ys * ph;
    os << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kLeft + pw << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e"
       << static_cast<int>(d) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 16
     << "\" text-anchor=\"middle\">h</text>\n";
  os << "<text transform=\"translate(20," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(ylabel) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::vector<double> h, e;
    for (std::size_t i = 0; i < s.h.size() && i < s.error.size(); ++i) {
      if (s.h[i] > 0.0 && s.error[i] > 0.0) {
        h.push_back(s.h[i]);
        e.push_back(s.error[i]);
      }
    }
    if (h.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < h.size(); ++i) os << px(h[i]) << ',' << py(e[i]) << ' ';
    os << "\"/>\n";
    for (std::size_t i = 0; i < h.size(); ++i) {
      os << "<circle cx=\"" << px(h[i]) << "\" cy=\"" << py(e[i]) << "\" r=\"3\" fill=\"" << color
         << "\"/>\n";
    }
    std::string slope;
    if (h.size() >= 3) {
      std::ostringstream t;
      t << std::fixed << std::setprecision(2) << " \xcf\x84=" << fit_rate(h, e).tau;
      slope = t.str();
    }
    const double ly = kTop + 16 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << kLeft + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + pw + 30
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kLeft + pw + 35 << "\" y=\"" << ly << "\">" << escape(s.label + slope)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& out_dir, int example,
                                              const std::vector<std::pair<int, int>>& pairs) {
  struct Chart {
    const char* metric;
    const char* ylabel;
  };
  const Chart charts[] = {{"rel_l2_M", "relative L2(M) error"},
                          {"dual_norm", "dual norm of z_h"}};
  std::vector<std::filesystem::path> written;
  for (const auto& chart : charts) {
    std::vector<PlotSeries> series;
    for (auto [p, q] : pairs) {
      const auto csv = out_dir / ("ex" + std::to_string(example) + "_p" + std::to_string(p) + "q" +
                                  std::to_string(q) + ".csv");
      if (!std::filesystem::exists(csv)) continue;
      const auto rows = read_study_csv(csv);
      series.push_back({"P" + std::to_string(p) + " x P" + std::to_string(q), column(rows, "h"),
                        column(rows, chart.metric)});
    }
    const std::string svg = render_loglog_svg(
        "Example " + std::to_string(example) + ": " + chart.ylabel, chart.ylabel, series);
    const auto path = out_dir / ("ex" + std::to_string(example) + "_" + chart.metric + ".svg");
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
    os << svg;
    written.push_back(path);
  }
  return written;
}

}  // namespace stfem
