#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <vector>

#include "maire/box.hpp"
#include "maire/matrix.hpp"

namespace fixtures {

inline maire::Matrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t dims) {
  maire::Matrix m(0, dims);
  for (const auto& r : rows) m.append_row(r);
  return m;
}

// Per axis a sorted pair of uniforms.
inline maire::BoxBounds sorted_pair_box(std::mt19937_64& rng, std::size_t dims) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  maire::BoxBounds b;
  for (std::size_t j = 0; j < dims; ++j) {
    const double a = unit(rng), c = unit(rng);
    b.lower.push_back(std::min(a, c));
    b.upper.push_back(std::max(a, c));
  }
  return b;
}

inline std::vector<int> random_labels(std::size_t n, int classes, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, classes - 1);
  std::vector<int> y(n);
  for (auto& v : y) v = pick(rng);
  return y;
}

}  // namespace fixtures
