#include "pmcgd/svg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "pmcgd/errors.hpp"

namespace pmcgd {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 50.0;
constexpr double kLegendWidth = 110.0;

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const char* colour(int cluster) { return kPalette[static_cast<std::size_t>(std::max(cluster - 1, 0)) % kPalette.size()]; }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg_scatter(const DataMatrix& X, const std::vector<ObservationLabel>& labels) {
  if (X.cols() != 2) throw DimensionError("scatter plots need exactly two columns");
  if (static_cast<Eigen::Index>(labels.size()) != X.rows()) throw DimensionError("one label per observation required");

  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  if (X.rows() > 0) {
    xmin = X.values.col(0).minCoeff();
    xmax = X.values.col(0).maxCoeff();
    ymin = X.values.col(1).minCoeff();
    ymax = X.values.col(1).maxCoeff();
    if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
    if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
  }
  const double plot_w = kWidth - 2 * kMargin - kLegendWidth;
  const double plot_h = kHeight - 2 * kMargin;
  auto sx = [&](double x) { return kMargin + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) { return kHeight - kMargin - (y - ymin) / (ymax - ymin) * plot_h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  const std::string x0 = fmt(kMargin), x1 = fmt(kMargin + plot_w), y0 = fmt(kHeight - kMargin), y1 = fmt(kMargin);
  os << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
     << "\" stroke=\"black\"/>\n";
  os << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
     << "\" stroke=\"black\"/>\n";
  const std::string xname = X.column_names.size() > 0 ? X.column_names[0] : "x1";
  const std::string yname = X.column_names.size() > 1 ? X.column_names[1] : "x2";
  os << "<text x=\"" << fmt(kMargin + plot_w / 2) << "\" y=\"" << fmt(kHeight - 12) << "\" text-anchor=\"middle\">"
     << escape(xname) << "</text>\n";
  os << "<text x=\"14\" y=\"" << fmt(kHeight / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << fmt(kHeight / 2) << ")\">" << escape(yname) << "</text>\n";
  os << "<text x=\"" << x0 << "\" y=\"" << fmt(kHeight - kMargin + 16) << "\" font-size=\"10\">" << fmt(xmin)
     << "</text>\n";
  os << "<text x=\"" << x1 << "\" y=\"" << fmt(kHeight - kMargin + 16) << "\" font-size=\"10\" text-anchor=\"end\">"
     << fmt(xmax) << "</text>\n";
  os << "<text x=\"" << fmt(kMargin - 4) << "\" y=\"" << y0 << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(ymin)
     << "</text>\n";
  os << "<text x=\"" << fmt(kMargin - 4) << "\" y=\"" << y1 << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(ymax)
     << "</text>\n";

  std::set<int> clusters;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto& l = labels[static_cast<std::size_t>(i)];
    clusters.insert(l.cluster);
    const char* c = colour(l.cluster);
    os << "<circle class=\"marker " << (l.is_bad ? "bad" : "good") << "\" cx=\"" << fmt(sx(X.values(i, 0)))
       << "\" cy=\"" << fmt(sy(X.values(i, 1))) << "\" r=\"" << (l.is_bad ? "3.5" : "3") << "\" ";
    if (l.is_bad) os << "fill=\"" << c << "\" stroke=\"black\"";
    else os << "fill=\"none\" stroke=\"" << c << "\"";
    os << "/>\n";
  }

  double ly = kMargin;
  const double lx = kWidth - kMargin - kLegendWidth + 20;
  os << "<g class=\"legend\" font-size=\"12\">\n";
  for (int c : clusters) {
    os << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly - 9) << "\" width=\"10\" height=\"10\" fill=\"" << colour(c)
       << "\"/><text x=\"" << fmt(lx + 16) << "\" y=\"" << fmt(ly) << "\">cluster " << c << "</text>\n";
    ly += 18;
  }
  os << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly - 9)
     << "\" width=\"10\" height=\"10\" fill=\"black\"/><text x=\"" << fmt(lx + 16) << "\" y=\"" << fmt(ly)
     << "\">bad (filled)</text>\n";
  os << "</g>\n</svg>\n";
  return os.str();
}

void emit_svg_scatter(const DataMatrix& X, const std::vector<ObservationLabel>& labels,
                      const std::filesystem::path& path) {
  const std::string svg = render_svg_scatter(X, labels);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << svg;
}

}  // namespace pmcgd
