#include "maire/synthetic.hpp"

#include <random>

#include "maire/error.hpp"

namespace maire {

Matrix uniform_points(std::size_t n, std::size_t dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix m(n, dims, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dims; ++j) m(i, j) = unit(rng);
  }
  return m;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"rect", "circle", "two-region", "discrete-strip"};
  return names;
}

namespace {

Schema unit_square() {
  return {AttributeSchema::continuous("x1", std::pair{0.0, 1.0}),
          AttributeSchema::continuous("x2", std::pair{0.0, 1.0})};
}

}  // namespace

SyntheticScenario make_scenario(std::string_view name) {
  SyntheticScenario s;
  s.name = std::string(name);
  if (name == "rect") {
    s.shape.kind = RectangleShape{{0.3, 0.3}, {0.7, 0.7}};
    s.schema = unit_square();
    s.query = {0.5, 0.5};
  } else if (name == "circle") {
    s.shape.kind = CircleShape{{0.5, 0.5}, 0.25};
    s.schema = unit_square();
    s.query = {0.5, 0.5};
  } else if (name == "two-region") {
    // A large positive block, and a small positive patch holding the query
    // separated from it by a thin negative strip.
    s.shape.kind = UnionShape{{RectangleShape{{0.3, 0.2}, {0.8, 0.8}},
                               RectangleShape{{0.26, 0.48}, {0.28, 0.52}}}};
    s.schema = unit_square();
    s.query = {0.27, 0.5};
  } else if (name == "discrete-strip") {
    auto x1 = AttributeSchema::ordered("x1", {1, 2, 3, 4, 5});
    s.shape.kind = DiscreteStripShape{0, {x1.level_position(0), x1.level_position(2),
                                          x1.level_position(4)}};
    s.schema = {x1, AttributeSchema::continuous("x2", std::pair{0.0, 1.0})};
    s.query = {x1.level_position(1), 0.5};
  } else {
    throw ArgumentError("unknown synthetic shape '" + std::string(name) +
                        "' (expected rect, circle, two-region or discrete-strip)");
  }
  s.shape.validate();
  return s;
}

SyntheticData sample_scenario(const SyntheticScenario& scenario, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ArgumentError("sample count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SyntheticOracle oracle(scenario.shape);

  SyntheticData out{EncodedSpace(scenario.schema), {}};
  const std::size_t d = scenario.schema.size();
  std::vector<double> row(d);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto& attr = scenario.schema[j];
      if (attr.kind == AttributeKind::ordered_discrete) {
        std::uniform_int_distribution<std::size_t> pick(0, attr.levels.size() - 1);
        row[j] = attr.level_position(pick(rng));
      } else {
        row[j] = unit(rng);
      }
    }
    out.space.append_encoded(row);
    out.labels.push_back(oracle(row));
  }
  return out;
}

}  // namespace maire
