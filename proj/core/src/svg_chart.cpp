#include "aorl/svg_chart.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <iomanip>
#include <sstream>

#include "aorl/errors.hpp"

namespace aorl {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c",
                                                "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
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

}  // namespace

std::string band_chart_svg(const std::vector<BandSeries>& series, const ChartLabels& labels) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = 0.0, y1 = 0.0;
  for (const auto& s : series) {
    if (s.x.size() != s.mean.size() || s.x.size() != s.stddev.size()) {
      throw DimensionError("band series arrays differ in length");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.mean[i] - s.stddev[i]);
      y1 = std::max(y1, s.mean[i] + s.stddev[i]);
    }
  }
  if (!(x1 > x0)) {
    x0 = std::isfinite(x0) ? x0 - 0.5 : 0.0;
    x1 = x0 + 1.0;
  }
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(labels.title) << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double yv = y0 + (y1 - y0) * t / 5.0;
    const double xv = x0 + (x1 - x0) * t / 5.0;
    o << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << py(yv) << "\" x2=\"" << kLeft << "\" y2=\""
      << py(yv) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
      << std::setprecision(3) << yv << "</text>\n";
    o << "<line x1=\"" << px(xv) << "\" y1=\"" << kTop + ph << "\" x2=\"" << px(xv) << "\" y2=\""
      << kTop + ph + 4 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << px(xv) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
      << std::setprecision(1) << xv << "</text>\n";
    o << std::setprecision(2);
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 18 << "\" text-anchor=\"middle\">"
    << escape(labels.x_axis) << "</text>\n";
  o << "<text transform=\"translate(18," << kTop + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(labels.y_axis) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % kColors.size()];
    if (s.x.empty()) continue;
    o << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      o << px(s.x[i]) << ',' << py(s.mean[i] + s.stddev[i]) << ' ';
    }
    for (std::size_t i = s.x.size(); i-- > 0;) {
      o << px(s.x[i]) << ',' << py(s.mean[i] - s.stddev[i]) << ' ';
    }
    o << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) o << px(s.x[i]) << ',' << py(s.mean[i]) << ' ';
    o << "\"/>\n";
    const double ly = kTop + 16 + 16 * static_cast<double>(k);
    o << "<line x1=\"" << kLeft + 10 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + 30 << "\" y2=\""
      << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kLeft + 36 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_band_chart(const std::filesystem::path& path, const std::vector<BandSeries>& series,
                      const ChartLabels& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << band_chart_svg(series, labels);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace aorl
