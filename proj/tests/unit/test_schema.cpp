#include <doctest.h>

#include <random>
#include <string>

#include "maire/error.hpp"
#include "maire/schema.hpp"
#include "maire/soft_indicator.hpp"

using namespace maire;

namespace {

Schema age_sex() {
  return {AttributeSchema::continuous("Age"), AttributeSchema::categorical("Sex", {"M", "F"})};
}

Schema age_sex_fitted() {
  return {AttributeSchema::continuous("Age", std::pair{17.0, 43.0}), AttributeSchema::categorical("Sex", {"M", "F"})};
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// A schema mixing the three kinds, with a table of random rows.
struct Mixed {
  Schema schema;
  RawTable table;
};

Mixed random_mixed(std::mt19937_64& rng, std::size_t rows) {
  Mixed m;
  m.schema = {AttributeSchema::continuous("c"), AttributeSchema::ordered("o", {1, 2, 3, 4, 5}),
              AttributeSchema::categorical("k", {"a", "b", "c"}), AttributeSchema::continuous("d")};
  std::uniform_real_distribution<double> real(-5.0, 5.0);
  std::uniform_int_distribution<std::size_t> level(0, 4), cat(0, 2);
  for (std::size_t i = 0; i < rows; ++i) {
    m.table.rows.push_back({real(rng), static_cast<double>(level(rng) + 1), cat(rng), real(rng)});
  }
  return m;
}

BoxBounds random_box(std::mt19937_64& rng, std::size_t dims) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BoxBounds b;
  for (std::size_t j = 0; j < dims; ++j) {
    double a = unit(rng), c = unit(rng);
    if (unit(rng) < 0.2) a = 0.0;
    if (unit(rng) < 0.2) c = 1.0;
    b.lower.push_back(std::min(a, c));
    b.upper.push_back(std::max(a, c));
  }
  return b;
}

}  // namespace

TEST_CASE("load_table parses typed rows") {
  const auto t = parse_table("Age,Sex\n30,F\n17,M\n43,F\n", age_sex());
  REQUIRE(t.size() == 3);
  CHECK(std::get<double>(t.rows[0][0]) == 30.0);
  CHECK(std::get<std::size_t>(t.rows[0][1]) == 1);
  CHECK(std::get<std::size_t>(t.rows[1][1]) == 0);
}

TEST_CASE("load_table accepts quoted fields and a label column") {
  const auto t = parse_table("Sex,\"Age\",y\n\"F\",30,1\nM,17,0\n", age_sex(), "y");
  REQUIRE(t.size() == 2);
  CHECK(t.labels == std::vector<int>{1, 0});
  CHECK(std::get<double>(t.rows[1][0]) == 17.0);
}

TEST_CASE("load_table errors name the offending cell") {
  const auto unknown = error_of([] { parse_table("Age,Sex\n30,F\n31,X\n", age_sex()); });
  CHECK(unknown.find("line 3") != std::string::npos);
  CHECK(unknown.find("Sex") != std::string::npos);

  const auto bad_number = error_of([] { parse_table("Age,Sex\nabc,F\n", age_sex()); });
  CHECK(bad_number.find("Age") != std::string::npos);

  CHECK(error_of([] { parse_table("", age_sex()); }) == "no rows");
  CHECK(error_of([] { parse_table("Age,Sex\n", age_sex()); }) == "no rows");
  CHECK(error_of([] { parse_table("Age\n30\n", age_sex()); }).find("missing column 'Sex'") != std::string::npos);
  CHECK(error_of([] { load_table("/nonexistent/table.csv", age_sex()); }).find("/nonexistent/table.csv") !=
        std::string::npos);
}

TEST_CASE("ordered levels must be declared values") {
  const Schema s{AttributeSchema::ordered("o", {1, 2, 3})};
  CHECK_THROWS_AS(parse_table("o\n4\n", s), LoadError);
}

TEST_CASE("schema invariants") {
  CHECK_THROWS_AS(AttributeSchema::ordered("o", {1, 1, 2}).validate(), SchemaError);
  CHECK_THROWS_AS(AttributeSchema::ordered("o", {3, 2}).validate(), SchemaError);
  CHECK_THROWS_AS(AttributeSchema::categorical("k", {"a", "a"}).validate(), SchemaError);
  CHECK_THROWS_AS(AttributeSchema::categorical("k", {"a", ""}).validate(), SchemaError);
  CHECK_THROWS_AS(AttributeSchema::continuous("c", std::pair{2.0, 2.0}).validate(), SchemaError);

  const auto t = parse_table("Age,Sex\n30,F\n30,M\n", age_sex());
  CHECK_THROWS_AS(fit_schema(age_sex(), t), SchemaError);
}

TEST_CASE("schema JSON round trip") {
  const auto doc = nlohmann::json::parse(R"({"attributes": [
      {"name": "Age", "kind": "continuous", "min": 17, "max": 43},
      {"name": "Edu", "kind": "ordered_discrete", "levels": [1, 2, 3]},
      {"name": "Sex", "kind": "categorical", "categories": ["M", "F"]}]})");
  const auto s = parse_schema(doc);
  REQUIRE(s.size() == 3);
  CHECK(s[0].range == std::pair{17.0, 43.0});
  CHECK(s[1].kind == AttributeKind::ordered_discrete);
  CHECK(parse_schema(schema_to_json(s)).size() == 3);
  CHECK_THROWS_AS(parse_schema(nlohmann::json::parse(R"({"attributes": [{"name": "x", "kind": "weird"}]})")),
                  SchemaError);
}

TEST_CASE("encode: min-max, interior level positions, one-hot") {
  Schema s{AttributeSchema::continuous("Age", std::pair{17.0, 43.0}),
           AttributeSchema::ordered("Level", {10, 20, 30, 40, 50}),
           AttributeSchema::categorical("Sex", {"M", "F"})};
  EncodedSpace space(s);
  REQUIRE(space.dims() == 4);
  const RawRow row{30.0, 20.0, std::size_t{1}};
  const auto x = space.encode_instance(row);
  CHECK(x[0] == doctest::Approx(0.5));
  CHECK(x[1] == doctest::Approx(2.0 / 6.0));
  CHECK(x[2] == 0.0);
  CHECK(x[3] == 1.0);
  for (std::size_t i = 0; i < 5; ++i) CHECK(s[1].level_position(i) == doctest::Approx((i + 1) / 6.0));

  const auto& map = space.column_map();
  REQUIRE(map.size() == 4);
  CHECK(map[2].attribute == 2);
  CHECK(map[2].category == std::optional<std::size_t>{0});
  CHECK(map[3].category == std::optional<std::size_t>{1});
}

TEST_CASE("encode clamps out-of-range values and counts them") {
  Schema s{AttributeSchema::continuous("Age", std::pair{17.0, 43.0})};
  EncodedSpace space(s);
  std::size_t clamped = 0;
  const RawRow hi{90.0}, lo{0.0};
  CHECK(space.encode_instance(hi, &clamped)[0] == 1.0);
  CHECK(space.encode_instance(lo, &clamped)[0] == 0.0);
  CHECK(clamped == 2);
  space.append(hi);
  CHECK(space.clamp_count() == 1);
}

TEST_CASE("encoded space invariants on random data") {
  std::mt19937_64 rng(3);
  const auto m = random_mixed(rng, 300);
  const auto space = encode(m.table, fit_schema(m.schema, m.table));
  const auto& x = space.matrix();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      CHECK(x(i, j) >= 0.0);
      CHECK(x(i, j) <= 1.0);
    }
    double ones = 0.0;
    for (const auto c : space.attribute_columns(2)) ones += x(i, c);
    CHECK(ones == 1.0);
  }
  std::vector<int> seen(space.dims(), 0);
  for (std::size_t a = 0; a < space.attributes(); ++a) {
    for (const auto c : space.attribute_columns(a)) ++seen[c];
  }
  for (const int s : seen) CHECK(s == 1);
  CHECK(space.attribute_columns(2).size() == 3);
}

TEST_CASE("decode: full bounds give no clause") {
  std::mt19937_64 rng(5);
  const auto m = random_mixed(rng, 20);
  const auto space = encode(m.table, fit_schema(m.schema, m.table));
  CHECK(decode_bounds(BoxBounds::full(space.dims()), space).empty());
  const auto bools = encode_boolean(Matrix(2, 3, 1.0), {"a", "b", "c"});
  CHECK(decode_bounds(BoxBounds::full(3), bools).empty());
}

TEST_CASE("decode: ordered interval from enumerated levels") {
  // Levels sit at k/6; [0.21, 0.69] holds 2/6, 3/6 and 4/6.
  Schema s{AttributeSchema::ordered("o", {1, 2, 3, 4, 5})};
  const EncodedSpace space(s);
  const auto clauses = decode_bounds(BoxBounds({0.21}, {0.69}), space);
  REQUIRE(clauses.size() == 1);
  const auto& f = std::get<OrderedIntervalClause>(clauses[0].form);
  CHECK(f.lo_level == 2.0);
  CHECK(f.hi_level == 4.0);
  CHECK(to_string(clauses[0]) == "2 ≤ o ≤ 4");
}

TEST_CASE("decode: one-hot pinned column is an equality") {
  const EncodedSpace space(age_sex_fitted());
  // Age full, Sex:M full, Sex:F in (0.6, 1].
  const auto clauses = decode_bounds(BoxBounds({0.0, 0.0, 0.6}, {1.0, 1.0, 1.0}), space);
  REQUIRE(clauses.size() == 1);
  CHECK(std::get<EqualityClause>(clauses[0].form).category == "F");
  CHECK(to_string(clauses[0]) == "Sex = F");
}

TEST_CASE("decode: one-hot inconsistencies") {
  const EncodedSpace space(age_sex_fitted());
  // F column admits only 0 and M column admits only 0: no category left.
  CHECK_THROWS_AS(decode_bounds(BoxBounds({0.0, 0.0, 0.0}, {1.0, 0.5, 0.5}), space), InconsistencyError);
  // A column whose interval holds neither 0 nor 1.
  CHECK_THROWS_AS(decode_bounds(BoxBounds({0.0, 0.2, 0.0}, {1.0, 0.7, 1.0}), space), InconsistencyError);
  // Both categories admitted through 0 on the other column: no clause.
  CHECK(decode_bounds(BoxBounds({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}), space).empty());
}

TEST_CASE("decode: continuous clauses in raw units") {
  const EncodedSpace space(age_sex_fitted());
  auto clauses = decode_bounds(BoxBounds({0.0, 0.0, 0.0}, {0.5, 1.0, 1.0}), space);
  REQUIRE(clauses.size() == 1);
  CHECK(to_string(clauses[0]) == "Age ≤ 30.00");
  clauses = decode_bounds(BoxBounds({0.5, 0.0, 0.0}, {1.0, 1.0, 1.0}), space);
  CHECK(to_string(clauses[0]) == "Age > 30.00");
  clauses = decode_bounds(BoxBounds({0.25, 0.0, 0.0}, {0.75, 1.0, 1.0}), space);
  CHECK(to_string(clauses[0]) == "23.50 < Age ≤ 36.50");
  CHECK(to_json(clauses[0])["form"] == "interval");
}

TEST_CASE("decode: several admitted categories form a set clause") {
  Schema s{AttributeSchema::categorical("k", {"a", "b", "c"})};
  const EncodedSpace space(s);
  const auto clauses = decode_bounds(BoxBounds({0.0, 0.0, 0.0}, {1.0, 1.0, 0.5}), space);
  REQUIRE(clauses.size() == 1);
  CHECK(to_string(clauses[0]) == "k ∈ {a, b}");
}

TEST_CASE("round trip: rows inside a box satisfy every decoded clause") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = random_mixed(rng, 400);
    const auto space = encode(m.table, fit_schema(m.schema, m.table));
    const auto box = snap_discrete(random_box(rng, space.dims()), space);
    std::vector<RuleClause> clauses;
    try {
      clauses = decode_bounds(box, space);
    } catch (const InconsistencyError&) {
      continue;  // box admits no category of some attribute
    }
    for (std::size_t i = 0; i < m.table.size(); ++i) {
      if (!inside(box, space.matrix().row(i))) continue;
      for (const auto& c : clauses) {
        CHECK(clause_holds(c, m.table.rows[i][c.attribute], space.schema()[c.attribute]));
      }
    }
  }
}

TEST_CASE("snap_discrete leaves dataset membership unchanged") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_mixed(rng, 300);
    const auto space = encode(m.table, fit_schema(m.schema, m.table));
    const auto box = random_box(rng, space.dims());
    const auto snapped = snap_discrete(box, space);
    for (std::size_t i = 0; i < m.table.size(); ++i) {
      CHECK(inside(box, space.matrix().row(i)) == inside(snapped, space.matrix().row(i)));
    }
  }
}

TEST_CASE("snap_discrete moves ordered bounds onto level boundaries") {
  Schema s{AttributeSchema::ordered("o", {1, 2, 3, 4, 5})};
  const EncodedSpace space(s);
  const auto snapped = snap_discrete(BoxBounds({0.21}, {0.69}), space);
  CHECK(snapped.lower[0] == doctest::Approx(1.0 / 6.0));
  CHECK(snapped.upper[0] == doctest::Approx(4.0 / 6.0));
  const auto all = snap_discrete(BoxBounds({0.1}, {0.9}), space);
  CHECK(all.lower[0] == 0.0);
  CHECK(all.upper[0] == 1.0);
  CHECK(attribute_is_trivial(all, space, 0));
}

TEST_CASE("parse_instance") {
  const auto s = age_sex_fitted();
  const auto row = parse_instance(nlohmann::json::parse(R"({"Age": 30, "Sex": "F"})"), s);
  CHECK(std::get<double>(row[0]) == 30.0);
  CHECK(std::get<std::size_t>(row[1]) == 1);
  CHECK_THROWS_AS(parse_instance(nlohmann::json::parse(R"({"Age": 30})"), s), LoadError);
  CHECK_THROWS_AS(parse_instance(nlohmann::json::parse(R"({"Age": 30, "Sex": "X"})"), s), LoadError);
}
