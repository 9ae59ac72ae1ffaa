#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace aorl {

struct BandSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> stddev;
};

struct ChartLabels {
  std::string title;
  std::string x_axis;
  std::string y_axis;
};

/// Line chart with a shaded mean +/- std band per series.
std::string band_chart_svg(const std::vector<BandSeries>& series, const ChartLabels& labels);
void write_band_chart(const std::filesystem::path& path, const std::vector<BandSeries>& series,
                      const ChartLabels& labels);

}  // namespace aorl
