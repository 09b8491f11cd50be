#include "maire/schema.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "maire/error.hpp"
#include "maire/log.hpp"

namespace maire {

const char* to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::continuous:
      return "continuous";
    case AttributeKind::ordered_discrete:
      return "ordered_discrete";
    case AttributeKind::categorical:
      return "categorical";
  }
  return "?";
}

AttributeSchema AttributeSchema::continuous(std::string name,
                                            std::optional<std::pair<double, double>> range) {
  AttributeSchema a;
  a.name = std::move(name);
  a.kind = AttributeKind::continuous;
  a.range = range;
  return a;
}

AttributeSchema AttributeSchema::ordered(std::string name, std::vector<double> levels) {
  AttributeSchema a;
  a.name = std::move(name);
  a.kind = AttributeKind::ordered_discrete;
  a.levels = std::move(levels);
  return a;
}

AttributeSchema AttributeSchema::categorical(std::string name,
                                             std::vector<std::string> categories) {
  AttributeSchema a;
  a.name = std::move(name);
  a.kind = AttributeKind::categorical;
  a.categories = std::move(categories);
  return a;
}

void AttributeSchema::validate() const {
  if (name.empty()) throw SchemaError("attribute with empty name");
  switch (kind) {
    case AttributeKind::continuous:
      if (range && !(range->first < range->second)) {
        throw SchemaError(fmt::format("attribute '{}': continuous range [{}, {}] is degenerate",
                                      name, range->first, range->second));
      }
      break;
    case AttributeKind::ordered_discrete:
      if (levels.empty()) throw SchemaError(fmt::format("attribute '{}': no levels", name));
      for (std::size_t i = 1; i < levels.size(); ++i) {
        if (!(levels[i - 1] < levels[i])) {
          throw SchemaError(
              fmt::format("attribute '{}': levels must be strictly increasing", name));
        }
      }
      break;
    case AttributeKind::categorical: {
      if (categories.empty()) throw SchemaError(fmt::format("attribute '{}': no categories", name));
      std::set<std::string> seen;
      for (const auto& c : categories) {
        if (c.empty()) throw SchemaError(fmt::format("attribute '{}': empty category name", name));
        if (!seen.insert(c).second) {
          throw SchemaError(fmt::format("attribute '{}': duplicate category '{}'", name, c));
        }
      }
      break;
    }
  }
}

double AttributeSchema::level_position(std::size_t index) const {
  return static_cast<double>(index + 1) / static_cast<double>(levels.size() + 1);
}

std::optional<std::size_t> AttributeSchema::level_index(double value) const {
  auto it = std::lower_bound(levels.begin(), levels.end(), value);
  if (it == levels.end() || *it != value) return std::nullopt;
  return static_cast<std::size_t>(it - levels.begin());
}

std::optional<std::size_t> AttributeSchema::category_index(std::string_view category) const {
  auto it = std::find(categories.begin(), categories.end(), category);
  if (it == categories.end()) return std::nullopt;
  return static_cast<std::size_t>(it - categories.begin());
}

// --- schema JSON -----------------------------------------------------------

Schema parse_schema(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("attributes") || !doc["attributes"].is_array()) {
    throw SchemaError("schema must be an object with an 'attributes' array");
  }
  Schema schema;
  std::set<std::string> names;
  for (const auto& entry : doc["attributes"]) {
    AttributeSchema a;
    try {
      a.name = entry.at("name").get<std::string>();
      const auto kind = entry.at("kind").get<std::string>();
      if (kind == "continuous") {
        a.kind = AttributeKind::continuous;
        if (entry.contains("min") || entry.contains("max")) {
          a.range = std::make_pair(entry.at("min").get<double>(), entry.at("max").get<double>());
        }
      } else if (kind == "ordered_discrete" || kind == "ordered") {
        a.kind = AttributeKind::ordered_discrete;
        a.levels = entry.at("levels").get<std::vector<double>>();
      } else if (kind == "categorical") {
        a.kind = AttributeKind::categorical;
        a.categories = entry.at("categories").get<std::vector<std::string>>();
      } else {
        throw SchemaError(fmt::format("attribute '{}': unknown kind '{}'", a.name, kind));
      }
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(fmt::format("malformed schema entry: {}", e.what()));
    }
    a.validate();
    if (!names.insert(a.name).second) {
      throw SchemaError(fmt::format("duplicate attribute name '{}'", a.name));
    }
    schema.push_back(std::move(a));
  }
  if (schema.empty()) throw SchemaError("schema declares no attributes");
  return schema;
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(fmt::format("cannot open schema file '{}'", path.string()));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(fmt::format("schema file '{}': {}", path.string(), e.what()));
  }
  return parse_schema(doc);
}

nlohmann::json schema_to_json(const Schema& schema) {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : schema) {
    nlohmann::json e{{"name", a.name}, {"kind", to_string(a.kind)}};
    if (a.kind == AttributeKind::continuous && a.range) {
      e["min"] = a.range->first;
      e["max"] = a.range->second;
    }
    if (a.kind == AttributeKind::ordered_discrete) e["levels"] = a.levels;
    if (a.kind == AttributeKind::categorical) e["categories"] = a.categories;
    attrs.push_back(std::move(e));
  }
  return {{"attributes", attrs}};
}

// --- CSV -------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

RawCell parse_cell(std::string_view text, const AttributeSchema& a, std::size_t line) {
  auto fail = [&](const std::string& why) {
    return LoadError(fmt::format("line {}, column '{}': {}", line, a.name, why));
  };
  if (a.kind == AttributeKind::categorical) {
    auto idx = a.category_index(text);
    if (!idx) throw fail(fmt::format("unknown category '{}'", text));
    return *idx;
  }
  auto v = parse_number(text);
  if (!v) throw fail(fmt::format("cannot parse '{}' as a number", text));
  if (a.kind == AttributeKind::ordered_discrete && !a.level_index(*v)) {
    throw fail(fmt::format("value {} is not a declared level", *v));
  }
  return *v;
}

}  // namespace

RawTable parse_table(std::string_view csv, const Schema& schema, const std::string& label_column) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < csv.size();) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    lines.push_back(csv.substr(pos, end - pos));
    pos = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw LoadError("no rows");

  const auto header = split_csv_line(lines[0]);
  std::vector<std::optional<std::size_t>> column_attr(header.size());
  std::optional<std::size_t> label_pos;
  std::vector<std::optional<std::size_t>> attr_pos(schema.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!label_column.empty() && header[c] == label_column) {
      label_pos = c;
      continue;
    }
    auto it = std::find_if(schema.begin(), schema.end(),
                           [&](const AttributeSchema& a) { return a.name == header[c]; });
    if (it == schema.end()) throw LoadError(fmt::format("column '{}' is not in the schema", header[c]));
    const auto a = static_cast<std::size_t>(it - schema.begin());
    if (attr_pos[a]) throw LoadError(fmt::format("column '{}' appears twice", header[c]));
    attr_pos[a] = c;
  }
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (!attr_pos[a]) throw LoadError(fmt::format("missing column '{}'", schema[a].name));
  }
  if (!label_column.empty() && !label_pos) {
    throw LoadError(fmt::format("missing label column '{}'", label_column));
  }

  RawTable table;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto fields = split_csv_line(lines[li]);
    const std::size_t line_no = li + 1;
    if (fields.size() != header.size()) {
      throw LoadError(fmt::format("line {}: expected {} fields, found {}", line_no, header.size(),
                                  fields.size()));
    }
    RawRow row;
    row.reserve(schema.size());
    for (std::size_t a = 0; a < schema.size(); ++a) {
      row.push_back(parse_cell(fields[*attr_pos[a]], schema[a], line_no));
    }
    if (label_pos) {
      const auto& text = fields[*label_pos];
      int label = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), label);
      if (ec != std::errc() || ptr != text.data() + text.size() || label < 0) {
        throw LoadError(fmt::format("line {}, column '{}': label '{}' is not a non-negative integer",
                                    line_no, label_column, text));
      }
      table.labels.push_back(label);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw LoadError("no rows");
  return table;
}

RawTable load_table(const std::filesystem::path& path, const Schema& schema,
                    const std::string& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(fmt::format("cannot open data file '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_table(ss.str(), schema, label_column);
}

RawRow parse_instance(const nlohmann::json& obj, const Schema& schema) {
  if (!obj.is_object()) throw LoadError("query instance must be a JSON object");
  RawRow row;
  for (const auto& a : schema) {
    if (!obj.contains(a.name)) throw LoadError(fmt::format("query: missing attribute '{}'", a.name));
    const auto& v = obj[a.name];
    if (a.kind == AttributeKind::categorical) {
      if (!v.is_string()) throw LoadError(fmt::format("query: '{}' must be a string", a.name));
      auto idx = a.category_index(v.get<std::string>());
      if (!idx) {
        throw LoadError(fmt::format("query: unknown category '{}' for '{}'", v.get<std::string>(), a.name));
      }
      row.emplace_back(*idx);
    } else {
      if (!v.is_number()) throw LoadError(fmt::format("query: '{}' must be a number", a.name));
      const double x = v.get<double>();
      if (a.kind == AttributeKind::ordered_discrete && !a.level_index(x)) {
        throw LoadError(fmt::format("query: value {} is not a level of '{}'", x, a.name));
      }
      row.emplace_back(x);
    }
  }
  return row;
}

Schema fit_schema(Schema schema, const RawTable& table) {
  for (std::size_t a = 0; a < schema.size(); ++a) {
    auto& attr = schema[a];
    if (attr.kind != AttributeKind::continuous || attr.range) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : table.rows) {
      const double v = std::get<double>(row[a]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(lo < hi)) {
      throw SchemaError(fmt::format("attribute '{}' is constant in the data and cannot be normalized",
                                    attr.name));
    }
    attr.range = std::make_pair(lo, hi);
  }
  return schema;
}

// --- encoding --------------------------------------------------------------

EncodedSpace::EncodedSpace(Schema fitted) : schema_(std::move(fitted)) {
  attribute_columns_.resize(schema_.size());
  for (std::size_t a = 0; a < schema_.size(); ++a) {
    const auto& attr = schema_[a];
    attr.validate();
    if (attr.kind == AttributeKind::continuous && !attr.range) {
      throw SchemaError(fmt::format("attribute '{}' has no fitted range", attr.name));
    }
    if (attr.kind == AttributeKind::categorical) {
      for (std::size_t c = 0; c < attr.categories.size(); ++c) {
        attribute_columns_[a].push_back(column_map_.size());
        column_map_.push_back({a, c});
      }
    } else {
      attribute_columns_[a].push_back(column_map_.size());
      column_map_.push_back({a, std::nullopt});
    }
  }
}

std::vector<double> EncodedSpace::encode_instance(std::span<const RawCell> row,
                                                  std::size_t* clamped) const {
  if (row.size() != schema_.size()) {
    throw ArgumentError(fmt::format("instance has {} cells, schema has {} attributes", row.size(),
                                    schema_.size()));
  }
  std::vector<double> out(dims(), 0.0);
  for (std::size_t a = 0; a < schema_.size(); ++a) {
    const auto& attr = schema_[a];
    const auto cols = attribute_columns_[a];
    switch (attr.kind) {
      case AttributeKind::continuous: {
        const double v = std::get<double>(row[a]);
        const auto [lo, hi] = *attr.range;
        double x = (v - lo) / (hi - lo);
        if (x < 0.0 || x > 1.0) {
          x = std::clamp(x, 0.0, 1.0);
          if (clamped) ++*clamped;
        }
        out[cols[0]] = x;
        break;
      }
      case AttributeKind::ordered_discrete: {
        const auto idx = attr.level_index(std::get<double>(row[a]));
        if (!idx) throw ArgumentError(fmt::format("'{}': value is not a declared level", attr.name));
        out[cols[0]] = attr.level_position(*idx);
        break;
      }
      case AttributeKind::categorical: {
        const auto c = std::get<std::size_t>(row[a]);
        if (c >= cols.size()) throw ArgumentError(fmt::format("'{}': category out of range", attr.name));
        out[cols[c]] = 1.0;
        break;
      }
    }
  }
  return out;
}

void EncodedSpace::append(std::span<const RawCell> row) {
  std::size_t clamped = 0;
  const auto x = encode_instance(row, &clamped);
  clamp_count_ += clamped;
  append_encoded(x);
}

void EncodedSpace::append_encoded(std::span<const double> row) {
  if (row.size() != dims()) throw ArgumentError("encoded row has the wrong dimension");
  matrix_.append_row(row);
}

EncodedSpace encode(const RawTable& table, const Schema& fitted) {
  EncodedSpace space(fitted);
  for (const auto& row : table.rows) space.append(row);
  if (space.clamp_count() > 0) {
    log().warn("clamped {} raw values outside their fitted range to [0,1]", space.clamp_count());
  }
  return space;
}

EncodedSpace encode_boolean(const Matrix& bits, const std::vector<std::string>& names) {
  if (names.size() != bits.cols()) throw ArgumentError("boolean space: name count != column count");
  Schema schema;
  for (const auto& n : names) schema.push_back(AttributeSchema::ordered(n, {0.0, 1.0}));
  EncodedSpace space(std::move(schema));
  RawRow row(bits.cols());
  for (std::size_t i = 0; i < bits.rows(); ++i) {
    for (std::size_t j = 0; j < bits.cols(); ++j) {
      const double b = bits(i, j);
      if (b != 0.0 && b != 1.0) throw ArgumentError("boolean space: entries must be 0 or 1");
      row[j] = b;
    }
    space.append(row);
  }
  return space;
}

// --- clauses ---------------------------------------------------------------

namespace {

std::string format_number(double v, int decimals) { return fmt::format("{:.{}f}", v, decimals); }

std::string format_level(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) return fmt::format("{}", static_cast<long long>(v));
  return fmt::format("{}", v);
}

// Indices of ordered levels admitted by [lower, upper] on the level axis.
std::pair<std::size_t, std::size_t> admitted_levels(const AttributeSchema& attr, double lower,
                                                    double upper, bool& any) {
  std::size_t first = attr.levels.size(), last = 0;
  any = false;
  for (std::size_t i = 0; i < attr.levels.size(); ++i) {
    if (interval_admits(lower, upper, attr.level_position(i))) {
      if (!any) first = i;
      last = i;
      any = true;
    }
  }
  return {first, last};
}

// Categories r such that a row of category r passes every column of the group.
std::vector<std::size_t> admitted_categories(const BoxBounds& box, std::span<const std::size_t> cols) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < cols.size(); ++r) {
    bool ok = true;
    for (std::size_t c = 0; c < cols.size() && ok; ++c) {
      const double x = (c == r) ? 1.0 : 0.0;
      ok = interval_admits(box.lower[cols[c]], box.upper[cols[c]], x);
    }
    if (ok) out.push_back(r);
  }
  return out;
}

}  // namespace

std::string to_string(const RuleClause& clause, int decimals) {
  return std::visit(
      [&](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IntervalClause>) {
          if (f.lo && f.hi) {
            return fmt::format("{} < {} ≤ {}", format_number(*f.lo, decimals), clause.name,
                               format_number(*f.hi, decimals));
          }
          if (f.lo) return fmt::format("{} > {}", clause.name, format_number(*f.lo, decimals));
          return fmt::format("{} ≤ {}", clause.name, format_number(*f.hi, decimals));
        } else if constexpr (std::is_same_v<T, EqualityClause>) {
          return fmt::format("{} = {}", clause.name, f.category);
        } else if constexpr (std::is_same_v<T, OrderedIntervalClause>) {
          if (f.lo_level == f.hi_level) return fmt::format("{} = {}", clause.name, format_level(f.lo_level));
          return fmt::format("{} ≤ {} ≤ {}", format_level(f.lo_level), clause.name,
                             format_level(f.hi_level));
        } else {
          return fmt::format("{} ∈ {{{}}}", clause.name, fmt::join(f.categories, ", "));
        }
      },
      clause.form);
}

nlohmann::json to_json(const RuleClause& clause) {
  nlohmann::json j{{"attribute", clause.name}, {"text", to_string(clause)}};
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IntervalClause>) {
          j["form"] = "interval";
          j["lo"] = f.lo ? nlohmann::json(*f.lo) : nlohmann::json(nullptr);
          j["hi"] = f.hi ? nlohmann::json(*f.hi) : nlohmann::json(nullptr);
        } else if constexpr (std::is_same_v<T, EqualityClause>) {
          j["form"] = "equality";
          j["value"] = f.category;
        } else if constexpr (std::is_same_v<T, OrderedIntervalClause>) {
          j["form"] = "ordered_interval";
          j["lo"] = f.lo_level;
          j["hi"] = f.hi_level;
        } else {
          j["form"] = "category_set";
          j["values"] = f.categories;
        }
      },
      clause.form);
  return j;
}

bool clause_holds(const RuleClause& clause, const RawCell& cell, const AttributeSchema& attr) {
  return std::visit(
      [&](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IntervalClause>) {
          const double v = std::get<double>(cell);
          return (!f.lo || v > *f.lo) && (!f.hi || v <= *f.hi);
        } else if constexpr (std::is_same_v<T, OrderedIntervalClause>) {
          const double v = std::get<double>(cell);
          return v >= f.lo_level && v <= f.hi_level;
        } else if constexpr (std::is_same_v<T, EqualityClause>) {
          return attr.categories.at(std::get<std::size_t>(cell)) == f.category;
        } else {
          const auto& name = attr.categories.at(std::get<std::size_t>(cell));
          return std::find(f.categories.begin(), f.categories.end(), name) != f.categories.end();
        }
      },
      clause.form);
}

std::vector<RuleClause> decode_bounds(const BoxBounds& box, const EncodedSpace& space) {
  if (box.dims() != space.dims()) throw ArgumentError("bounds dimension does not match the space");
  std::vector<RuleClause> clauses;
  for (std::size_t a = 0; a < space.attributes(); ++a) {
    const auto& attr = space.schema()[a];
    const auto cols = space.attribute_columns(a);
    switch (attr.kind) {
      case AttributeKind::continuous: {
        const double l = box.lower[cols[0]];
        const double u = box.upper[cols[0]];
        if (l > u) throw ArgumentError(fmt::format("'{}': lower bound exceeds upper bound", attr.name));
        const bool has_lo = l > 0.0;
        const bool has_hi = u < 1.0;
        if (!has_lo && !has_hi) break;
        if (l == u) {
          throw InconsistencyError(fmt::format("'{}': interval is empty ({} < x ≤ {})", attr.name, l, u));
        }
        const auto [lo_raw, hi_raw] = *attr.range;
        IntervalClause iv;
        if (has_lo) iv.lo = lo_raw + l * (hi_raw - lo_raw);
        if (has_hi) iv.hi = lo_raw + u * (hi_raw - lo_raw);
        clauses.push_back({a, attr.name, iv});
        break;
      }
      case AttributeKind::ordered_discrete: {
        bool any = false;
        const auto [first, last] =
            admitted_levels(attr, box.lower[cols[0]], box.upper[cols[0]], any);
        if (!any) throw InconsistencyError(fmt::format("'{}': bounds admit no level", attr.name));
        if (first == 0 && last + 1 == attr.levels.size()) break;
        clauses.push_back({a, attr.name, OrderedIntervalClause{attr.levels[first], attr.levels[last]}});
        break;
      }
      case AttributeKind::categorical: {
        for (const auto c : cols) {
          const bool zero = interval_admits(box.lower[c], box.upper[c], 0.0);
          const bool one = interval_admits(box.lower[c], box.upper[c], 1.0);
          if (!zero && !one) {
            throw InconsistencyError(
                fmt::format("'{}': one-hot column admits neither 0 nor 1", attr.name));
          }
        }
        const auto allowed = admitted_categories(box, cols);
        if (allowed.empty()) {
          throw InconsistencyError(fmt::format("'{}': bounds admit no category", attr.name));
        }
        if (allowed.size() == cols.size()) break;
        if (allowed.size() == 1) {
          clauses.push_back({a, attr.name, EqualityClause{attr.categories[allowed[0]]}});
        } else {
          CategorySetClause set;
          for (const auto r : allowed) set.categories.push_back(attr.categories[r]);
          clauses.push_back({a, attr.name, std::move(set)});
        }
        break;
      }
    }
  }
  return clauses;
}

BoxBounds snap_discrete(BoxBounds box, const EncodedSpace& space) {
  if (box.dims() != space.dims()) throw ArgumentError("bounds dimension does not match the space");
  for (std::size_t a = 0; a < space.attributes(); ++a) {
    const auto& attr = space.schema()[a];
    const auto cols = space.attribute_columns(a);
    if (attr.kind == AttributeKind::ordered_discrete) {
      const auto j = cols[0];
      bool any = false;
      const auto [first, last] = admitted_levels(attr, box.lower[j], box.upper[j], any);
      if (!any) continue;
      box.lower[j] = first == 0 ? 0.0 : attr.level_position(first - 1);
      box.upper[j] = last + 1 == attr.levels.size() ? 1.0 : attr.level_position(last);
    } else if (attr.kind == AttributeKind::categorical) {
      const auto allowed = admitted_categories(box, cols);
      if (allowed.empty()) continue;
      for (const auto c : cols) {
        box.lower[c] = 0.0;
        box.upper[c] = 1.0;
      }
      if (allowed.size() == cols.size()) continue;
      if (allowed.size() == 1) {
        box.lower[cols[allowed[0]]] = 0.5;
      } else {
        for (std::size_t c = 0; c < cols.size(); ++c) {
          if (!std::binary_search(allowed.begin(), allowed.end(), c)) box.upper[cols[c]] = 0.5;
        }
      }
    }
  }
  return box;
}

bool attribute_is_trivial(const BoxBounds& box, const EncodedSpace& space, std::size_t attribute) {
  const auto& attr = space.schema()[attribute];
  const auto cols = space.attribute_columns(attribute);
  switch (attr.kind) {
    case AttributeKind::continuous:
      return box.lower[cols[0]] <= 0.0 && box.upper[cols[0]] >= 1.0;
    case AttributeKind::ordered_discrete: {
      bool any = false;
      const auto [first, last] = admitted_levels(attr, box.lower[cols[0]], box.upper[cols[0]], any);
      return any && first == 0 && last + 1 == attr.levels.size();
    }
    case AttributeKind::categorical:
      return admitted_categories(box, cols).size() == cols.size();
  }
  return false;
}

}  // namespace maire
