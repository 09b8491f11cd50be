#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "maire/blackbox.hpp"
#include "maire/matrix.hpp"
#include "maire/schema.hpp"

namespace maire {

// n points drawn uniformly from [0,1]^dims.
Matrix uniform_points(std::size_t n, std::size_t dims, std::uint64_t seed);

// Two-dimensional toy problems with a geometric oracle. Attributes are x1 and
// x2; continuous ones have range [0,1] so raw and encoded values coincide.
struct SyntheticScenario {
  std::string name;
  SyntheticShape shape;
  Schema schema;
  std::vector<double> query;  // encoded
};

const std::vector<std::string>& scenario_names();
// rect, circle, two-region, discrete-strip. Throws ArgumentError otherwise.
SyntheticScenario make_scenario(std::string_view name);

struct SyntheticData {
  EncodedSpace space;
  std::vector<int> labels;
};

// n samples: continuous axes uniform, ordered axes uniform over the levels.
SyntheticData sample_scenario(const SyntheticScenario& scenario, std::size_t n, std::uint64_t seed);

}  // namespace maire
