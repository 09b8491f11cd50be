#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace maire {

// Axis-aligned box S(l, u) in the encoded space [0,1]^D. During optimization
// lower may exceed upper on some axis; such a box simply contains nothing.
struct BoxBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  BoxBounds() = default;
  BoxBounds(std::vector<double> l, std::vector<double> u)
      : lower(std::move(l)), upper(std::move(u)) {}

  static BoxBounds full(std::size_t dims) {
    return {std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0)};
  }

  std::size_t dims() const { return lower.size(); }

  // Non-strict containment test used for the query point.
  bool contains_closed(std::span<const double> x) const {
    for (std::size_t j = 0; j < lower.size(); ++j) {
      if (x[j] < lower[j] || x[j] > upper[j]) return false;
    }
    return true;
  }

  friend bool operator==(const BoxBounds&, const BoxBounds&) = default;
};

}  // namespace maire
