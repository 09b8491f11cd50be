#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "maire/box.hpp"
#include "maire/matrix.hpp"

namespace maire {

enum class AttributeKind { continuous, ordered_discrete, categorical };

const char* to_string(AttributeKind kind);

struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::continuous;
  std::vector<double> levels;           // ordered_discrete, strictly increasing
  std::vector<std::string> categories;  // categorical, unique and non-empty
  std::optional<std::pair<double, double>> range;  // continuous, raw units

  static AttributeSchema continuous(std::string name,
                                    std::optional<std::pair<double, double>> range = {});
  static AttributeSchema ordered(std::string name, std::vector<double> levels);
  static AttributeSchema categorical(std::string name, std::vector<std::string> categories);

  // Throws SchemaError when an invariant is broken. A continuous attribute
  // without a range is valid until it is fitted.
  void validate() const;

  // Encoded position of ordered level `index`: (index + 1) / (m + 1).
  double level_position(std::size_t index) const;
  std::optional<std::size_t> level_index(double value) const;
  std::optional<std::size_t> category_index(std::string_view category) const;
};

using Schema = std::vector<AttributeSchema>;

Schema parse_schema(const nlohmann::json& doc);
Schema load_schema(const std::filesystem::path& path);
nlohmann::json schema_to_json(const Schema& schema);

// A raw cell is a number (continuous or an ordered level value) or the index
// of a category in the attribute's category list.
using RawCell = std::variant<double, std::size_t>;
using RawRow = std::vector<RawCell>;

struct RawTable {
  std::vector<RawRow> rows;  // cells in schema order
  std::vector<int> labels;   // filled only when a label column was requested

  std::size_t size() const { return rows.size(); }
};

// Reads a CSV file with a header row. Every schema attribute must appear as a
// column; the only other column allowed is `label_column` when non-empty.
RawTable load_table(const std::filesystem::path& path, const Schema& schema,
                    const std::string& label_column = {});
RawTable parse_table(std::string_view csv, const Schema& schema,
                     const std::string& label_column = {});

// Parses one instance given as a JSON object {attribute: value}.
RawRow parse_instance(const nlohmann::json& obj, const Schema& schema);

// Fills missing continuous ranges from the table's observed min/max.
Schema fit_schema(Schema schema, const RawTable& table);

struct EncodedColumn {
  std::size_t attribute = 0;
  std::optional<std::size_t> category;  // set for one-hot columns
};

// Min-max normalized, one-hot expanded representation in [0,1]^D together
// with the mapping back to raw attributes.
class EncodedSpace {
 public:
  EncodedSpace() = default;
  explicit EncodedSpace(Schema fitted);

  const Schema& schema() const { return schema_; }
  const Matrix& matrix() const { return matrix_; }
  const std::vector<EncodedColumn>& column_map() const { return column_map_; }
  std::span<const std::size_t> attribute_columns(std::size_t attribute) const {
    return attribute_columns_[attribute];
  }
  std::size_t dims() const { return column_map_.size(); }
  std::size_t attributes() const { return schema_.size(); }
  std::size_t clamp_count() const { return clamp_count_; }

  // Per-continuous-attribute (min, max) in raw units; empty for other kinds.
  std::optional<std::pair<double, double>> normalizer(std::size_t attribute) const {
    return schema_[attribute].range;
  }

  // Encodes one raw instance; out-of-range numbers are clamped and counted in
  // `clamped` when provided.
  std::vector<double> encode_instance(std::span<const RawCell> row,
                                      std::size_t* clamped = nullptr) const;

  void append(std::span<const RawCell> row);
  void append_encoded(std::span<const double> row);

 private:
  Schema schema_;
  Matrix matrix_;
  std::vector<EncodedColumn> column_map_;
  std::vector<std::vector<std::size_t>> attribute_columns_;
  std::size_t clamp_count_ = 0;
};

// Encodes every row of `table`; the schema must be fitted.
EncodedSpace encode(const RawTable& table, const Schema& fitted);

// Space of D boolean attributes named `names`, each an ordered attribute with
// levels {0, 1}; rows of `bits` hold 0/1 values.
EncodedSpace encode_boolean(const Matrix& bits, const std::vector<std::string>& names);

struct IntervalClause {
  std::optional<double> lo;  // exclusive, raw units
  std::optional<double> hi;  // inclusive, raw units
};
struct EqualityClause {
  std::string category;
};
struct OrderedIntervalClause {
  double lo_level = 0.0;  // inclusive
  double hi_level = 0.0;  // inclusive
};
struct CategorySetClause {
  std::vector<std::string> categories;
};

struct RuleClause {
  std::size_t attribute = 0;
  std::string name;
  std::variant<IntervalClause, EqualityClause, OrderedIntervalClause, CategorySetClause> form;
};

// Rule text: "lo < name ≤ hi", "name = value".
std::string to_string(const RuleClause& clause, int decimals = 2);
nlohmann::json to_json(const RuleClause& clause);
bool clause_holds(const RuleClause& clause, const RawCell& cell, const AttributeSchema& attr);

// Which encoded values the per-column interval admits. A lower bound at the
// domain edge (l <= 0) places no constraint; otherwise membership is
// l < x <= u.
inline bool interval_admits(double lower, double upper, double x) {
  return (lower <= 0.0 || x > lower) && x <= upper;
}

// Translates encoded bounds into clauses, attributes in schema order.
// Attributes whose bounds admit every value produce no clause.
std::vector<RuleClause> decode_bounds(const BoxBounds& box, const EncodedSpace& space);

// Moves ordered-discrete bounds onto level boundaries and rewrites one-hot
// groups canonically, leaving the membership of every level/category intact.
BoxBounds snap_discrete(BoxBounds box, const EncodedSpace& space);

// True when the attribute's bounds restrict nothing.
bool attribute_is_trivial(const BoxBounds& box, const EncodedSpace& space, std::size_t attribute);

}  // namespace maire
