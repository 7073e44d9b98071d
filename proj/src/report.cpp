#include "melodist/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "melodist/error.hpp"

namespace melodist {
namespace {

// Shortest round-trip representation, independent of locale.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::json summary_json(const EvalReport& report, const DistanceSpec& spec) {
  return {
      {"rank", to_string(spec)},
      {"n_in_class", report.in_class.size()},
      {"n_cross_class", report.cross_class.size()},
      {"median_in", report.median_in},
      {"median_cross", report.median_cross},
      {"auc", report.auc},
      {"bin_edges", report.histogram.edges},
      {"in_counts", report.histogram.in_counts},
      {"cross_counts", report.histogram.cross_counts},
  };
}

nlohmann::json census_json(const CensusReport& census, const DistanceSpec& spec) {
  return {
      {"rank", to_string(spec)},
      {"pairs", census.pairs},
      {"length", census.length},
      {"rank_distinct", census.rank_distinct},
      {"edit_distinct", census.edit_distinct},
      {"ratio", census.ratio},
  };
}

std::string distances_csv(const EvalReport& report) {
  std::string out = "pair_kind,distance\n";
  for (double d : report.in_class) out += "in_class," + fmt(d) + "\n";
  for (double d : report.cross_class) out += "cross_class," + fmt(d) + "\n";
  return out;
}

std::string histogram_svg(const EvalReport& report, const std::string& title) {
  constexpr double kW = 640, kH = 360, kLeft = 50, kRight = 20, kTop = 40, kBottom = 40;
  const auto& h = report.histogram;
  const std::size_t bins = h.in_counts.size();
  const double n_in = std::max<double>(1.0, static_cast<double>(report.in_class.size()));
  const double n_cross = std::max<double>(1.0, static_cast<double>(report.cross_class.size()));
  double peak = 1e-12;
  for (std::size_t b = 0; b < bins; ++b) {
    peak = std::max({peak, h.in_counts[b] / n_in, h.cross_counts[b] / n_cross});
  }
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;
  const double bar_w = bins ? plot_w / static_cast<double>(bins) : plot_w;

  std::ostringstream svg;
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kW << R"(" height=")" << kH << R"(">)" << '\n';
  svg << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  svg << R"(<text x=")" << kW / 2 << R"(" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">)"
      << title << "</text>\n";
  auto bars = [&](const std::vector<int>& counts, double n, const char* color) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double frac = counts[b] / n / peak;
      const double bh = frac * plot_h;
      svg << R"(<rect x=")" << fmt(kLeft + bar_w * static_cast<double>(b)) << R"(" y=")" << fmt(kTop + plot_h - bh)
          << R"(" width=")" << fmt(bar_w) << R"(" height=")" << fmt(bh) << R"(" fill=")" << color
          << R"(" fill-opacity="0.5"/>)" << '\n';
    }
  };
  bars(h.cross_counts, n_cross, "#d62728");
  bars(h.in_counts, n_in, "#1f77b4");
  svg << R"(<line x1=")" << kLeft << R"(" y1=")" << kTop + plot_h << R"(" x2=")" << kW - kRight << R"(" y2=")"
      << kTop + plot_h << R"(" stroke="black"/>)" << '\n';
  if (!h.edges.empty()) {
    svg << R"(<text x=")" << kLeft << R"(" y=")" << kH - 12 << R"(" font-family="sans-serif" font-size="11">)"
        << fmt(h.edges.front()) << "</text>\n";
    svg << R"(<text x=")" << kW - kRight << R"(" y=")" << kH - 12
        << R"(" text-anchor="end" font-family="sans-serif" font-size="11">)" << fmt(h.edges.back()) << "</text>\n";
  }
  svg << R"(<text x=")" << kW - kRight << R"(" y=")" << kTop
      << R"(" text-anchor="end" font-family="sans-serif" font-size="11" fill="#1f77b4">same class</text>)" << '\n';
  svg << R"(<text x=")" << kW - kRight << R"(" y=")" << kTop + 14
      << R"(" text-anchor="end" font-family="sans-serif" font-size="11" fill="#d62728">different classes</text>)"
      << '\n';
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void write_eval_report(const std::filesystem::path& dir, const EvalReport& report, const DistanceSpec& spec) {
  std::filesystem::create_directories(dir);
  write_text(dir / "distances.csv", distances_csv(report));
  write_text(dir / "summary.json", summary_json(report, spec).dump(2) + "\n");
  write_text(dir / "histogram.svg", histogram_svg(report, "distance density, " + to_string(spec)));
}

}  // namespace melodist
