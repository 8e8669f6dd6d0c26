#pragma once

#include <string>
#include <vector>

#include "mfglq/model.hpp"

namespace mfglq {

struct NamedSchedule {
  std::string name;
  const MatrixSchedule* matrices = nullptr;
  const VectorSchedule* vectors = nullptr;
};

/// One row per node: t, then the row-major entries of each schedule.
void write_schedule_csv(const std::string& path, const TimeGrid& grid, const std::vector<NamedSchedule>& cols);

/// Plain table with a header row.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

/// Line plot as SVG polylines in an 800x600 viewBox.
void write_svg_plot(const std::string& path, const std::string& title, const std::string& xlabel,
                    const std::vector<PlotSeries>& series);

/// 64-bit FNV-1a of the file contents, as 16 hex digits.
std::string file_hash(const std::string& path);

}  // namespace mfglq
