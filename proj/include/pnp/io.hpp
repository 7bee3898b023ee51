#pragma once

// Legacy VTK export of meshes and nodal fields, and minimal SVG line charts.

#include "pnp/core.hpp"
#include "pnp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace pnp {

struct NamedField {
  std::string name;
  const Field* values;
};

/// ASCII legacy VTK, UNSTRUCTURED_GRID of linear triangles (cell type 5).
inline void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<NamedField>& fields,
                      const std::string& title = "pnp") {
  char buf[128];
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_nodes() << " double\n";
  for (const Point& p : mesh.nodes()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", p.x, p.y);
    os << buf;
  }
  os << "CELLS " << mesh.num_elements() << ' ' << 4 * mesh.num_elements() << '\n';
  for (const Element& e : mesh.elements()) os << "3 " << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
  os << "CELL_TYPES " << mesh.num_elements() << '\n';
  for (int e = 0; e < mesh.num_elements(); ++e) os << "5\n";
  if (fields.empty()) return;
  os << "POINT_DATA " << mesh.num_nodes() << '\n';
  for (const NamedField& f : fields) {
    if (f.values->size() != mesh.num_nodes())
      throw std::invalid_argument("write_vtk: field '" + f.name + "' has wrong size");
    os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < f.values->size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g\n", (*f.values)[i]);
      os << buf;
    }
  }
}

inline void write_vtk_file(const std::string& path, const Mesh& mesh,
                           const std::vector<NamedField>& fields, const std::string& title = "pnp") {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_vtk(os, mesh, fields, title);
  if (!os) throw Error("error while writing '" + path + "'");
}

// ---------------------------------------------------------------------------

struct Series {
  std::string name;
  std::vector<double> values;
};

/// SVG 1.1 line chart of one or more series over a shared abscissa.
inline void write_svg_chart(std::ostream& os, const std::string& title, const std::string& xlabel,
                            const std::vector<double>& x, const std::vector<Series>& series) {
  constexpr double W = 640, H = 400, L = 70, R = 150, T = 40, B = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (double v : x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
  for (const Series& s : series)
    for (double v : s.values)
      if (std::isfinite(v)) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
  if (!(ymax > ymin)) {
    const double pad = std::max(std::abs(ymin) * 1e-3, 1e-12);
    ymin -= pad;
    ymax += pad;
  }
  auto sx = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
  auto sy = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  char buf[256];
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"24\" font-size=\"16\" font-family=\"sans-serif\">%s</text>\n",
                L, title.c_str());
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", L, T,
                W - L - R, H - T - B);
  os << buf;
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + k * (xmax - xmin) / 4, yv = ymin + k * (ymax - ymin) / 4;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\" "
                  "font-family=\"sans-serif\">%.4g</text>\n",
                  sx(xv), H - B + 16, xv);
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"end\" "
                  "font-family=\"sans-serif\">%.6g</text>\n",
                  L - 4, sy(yv) + 4, yv);
    os << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">%s</text>\n",
                L + (W - L - R) / 2, H - 12, xlabel.c_str());
  os << buf;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    const std::size_t n = std::min(x.size(), series[s].values.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(series[s].values[i])) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(x[i]), sy(series[s].values[i]));
      os << buf;
    }
    os << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"12\" fill=\"%s\" font-family=\"sans-serif\">%s</text>\n",
                  W - R + 10, T + 16 + 18.0 * s, color, series[s].name.c_str());
    os << buf;
  }
  os << "</svg>\n";
}

}  // namespace pnp
