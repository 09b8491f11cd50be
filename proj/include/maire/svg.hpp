#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "maire/blackbox.hpp"
#include "maire/box.hpp"
#include "maire/schema.hpp"

namespace maire {

inline constexpr int kCanvasSize = 512;

struct PlotRect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;  // unit-square coordinates
};

// Extent of the box as drawn: continuous axes use the bounds directly, ordered
// axes the bands around the admitted levels.
PlotRect plot_extent(const BoxBounds& box, const Schema& schema);

// 2D plot of a synthetic problem: positive region filled blue, explanation
// box outlined red, query as a black dot, in that z-order. Ordered axes are
// shown as bands, one per level.
std::string render_svg(const SyntheticShape& shape, const Schema& schema, const BoxBounds& box,
                       std::span<const double> query, std::size_t cells = 128);

}  // namespace maire
