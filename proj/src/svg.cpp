#include "maire/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "maire/error.hpp"

namespace maire {

namespace {

double band_half_width(const AttributeSchema& attr) {
  return 0.5 / static_cast<double>(attr.levels.size() + 1);
}

// Display coordinate of an encoded value: ordered values go to the nearest
// level position.
double snap_display(const AttributeSchema& attr, double v) {
  if (attr.kind != AttributeKind::ordered_discrete) return v;
  const auto m = attr.levels.size();
  const double step = 1.0 / static_cast<double>(m + 1);
  const auto idx = std::clamp<long>(std::lround(v / step) - 1, 0, static_cast<long>(m) - 1);
  return attr.level_position(static_cast<std::size_t>(idx));
}

std::pair<double, double> axis_extent(const AttributeSchema& attr, double l, double u) {
  if (attr.kind != AttributeKind::ordered_discrete) return {std::clamp(l, 0.0, 1.0), std::clamp(u, 0.0, 1.0)};
  double lo = 1.0, hi = 0.0;
  for (std::size_t i = 0; i < attr.levels.size(); ++i) {
    const double p = attr.level_position(i);
    if (!interval_admits(l, u, p)) continue;
    lo = std::min(lo, p - band_half_width(attr));
    hi = std::max(hi, p + band_half_width(attr));
  }
  if (lo > hi) return {0.0, 0.0};
  return {std::max(lo, 0.0), std::min(hi, 1.0)};
}

double px(double v) { return v * kCanvasSize; }
double py(double v) { return (1.0 - v) * kCanvasSize; }

}  // namespace

PlotRect plot_extent(const BoxBounds& box, const Schema& schema) {
  if (box.dims() != 2 || schema.size() != 2) throw ArgumentError("plots need exactly two dimensions");
  const auto [x0, x1] = axis_extent(schema[0], box.lower[0], box.upper[0]);
  const auto [y0, y1] = axis_extent(schema[1], box.lower[1], box.upper[1]);
  return {x0, y0, x1, y1};
}

std::string render_svg(const SyntheticShape& shape, const Schema& schema, const BoxBounds& box,
                       std::span<const double> query, std::size_t cells) {
  if (query.size() != 2) throw ArgumentError("plots need exactly two dimensions");
  if (cells < 1) throw ArgumentError("cell count must be positive");
  const auto extent = plot_extent(box, schema);
  const double cell = 1.0 / static_cast<double>(cells);

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
      kCanvasSize);
  out += fmt::format("<rect width=\"{0}\" height=\"{0}\" fill=\"#ffffff\"/>\n", kCanvasSize);

  out += "<g id=\"region\" fill=\"#3b6fd4\" stroke=\"none\">\n";
  for (std::size_t r = 0; r < cells; ++r) {
    const double y = (static_cast<double>(r) + 0.5) * cell;
    std::size_t c = 0;
    while (c < cells) {
      auto positive = [&](std::size_t col) {
        const double x = (static_cast<double>(col) + 0.5) * cell;
        const std::array<double, 2> p{snap_display(schema[0], x), snap_display(schema[1], y)};
        return shape.contains(p);
      };
      if (!positive(c)) {
        ++c;
        continue;
      }
      const std::size_t start = c;
      while (c < cells && positive(c)) ++c;
      out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\"/>\n",
                         px(start * cell), py((r + 1) * cell), px((c - start) * cell), px(cell));
    }
  }
  out += "</g>\n";

  out += fmt::format(
      "<g id=\"explanation\"><rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
      "fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/></g>\n",
      px(extent.x0), py(extent.y1), px(extent.x1 - extent.x0), px(extent.y1 - extent.y0));
  out += fmt::format(
      "<g id=\"query\"><circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"#000000\"/></g>\n",
      px(query[0]), py(query[1]));
  out += "</svg>\n";
  return out;
}

}  // namespace maire
