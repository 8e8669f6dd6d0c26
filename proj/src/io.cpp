#include "mfglq/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "mfglq/errors.hpp"

namespace mfglq {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  os << std::setprecision(17);
  return os;
}

void append_entries(std::ostream& os, const Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << ',' << m(r, c);
}

void append_header(std::ostream& os, const std::string& name, Eigen::Index rows, Eigen::Index cols, bool vec) {
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      os << ',' << name;
      if (vec) {
        if (rows > 1) os << '_' << r;
      } else if (rows > 1 || cols > 1) {
        os << '_' << r << c;
      }
    }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

}  // namespace

void write_schedule_csv(const std::string& path, const TimeGrid& grid, const std::vector<NamedSchedule>& cols) {
  auto os = open_out(path);
  os << 't';
  for (const auto& c : cols) {
    if (c.matrices)
      append_header(os, c.name, (*c.matrices)[0].rows(), (*c.matrices)[0].cols(), false);
    else if (c.vectors)
      append_header(os, c.name, (*c.vectors)[0].size(), 1, true);
  }
  os << '\n';
  for (int j = 0; j < grid.nodes(); ++j) {
    os << grid.time(j);
    for (const auto& c : cols) {
      if (c.matrices)
        append_entries(os, (*c.matrices)[j]);
      else if (c.vectors)
        append_entries(os, (*c.vectors)[j]);
    }
    os << '\n';
  }
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  auto os = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

void write_svg_plot(const std::string& path, const std::string& title, const std::string& xlabel,
                    const std::vector<PlotSeries>& series) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double L = 80, R = 770, T = 50, B = 540;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (R - L); };
  auto py = [&](double y) { return B - (y - y0) / (y1 - y0) * (B - T); };

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
  os << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  os << "<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-size=\"18\">" << title << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << R - L << "\" height=\"" << B - T
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    os << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << B + 20 << "\" text-anchor=\"middle\" font-size=\"12\">"
       << tick(xv) << "</text>\n";
    os << "<text x=\"" << L - 8 << "\" y=\"" << fmt(py(yv) + 4) << "\" text-anchor=\"end\" font-size=\"12\">"
       << tick(yv) << "</text>\n";
  }
  os << "<text x=\"400\" y=\"585\" text-anchor=\"middle\" font-size=\"14\">" << xlabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 7];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << (i ? " " : "") << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
    os << "\"/>\n";
    if (series.size() <= 8 && !s.label.empty()) {
      const double ly = T + 20 + 18.0 * k;
      os << "<line x1=\"" << R - 150 << "\" y1=\"" << ly << "\" x2=\"" << R - 125 << "\" y2=\"" << ly
         << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << R - 118 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << s.label << "</text>\n";
    }
  }
  os << "</svg>\n";
}

std::string file_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  std::uint64_t h = 14695981039346656037ULL;
  char buf[65536];
  while (is) {
    is.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace mfglq
