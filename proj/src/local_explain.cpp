#include "maire/local_explain.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>

#include "maire/error.hpp"
#include "maire/log.hpp"

namespace maire {

void ExplainConfig::validate() const {
  optimizer.validate();
  if (max_attrs < 1) throw ArgumentError("max_attrs must be at least 1");
}

BoxBounds remove_attribute(BoxBounds box, const EncodedSpace& space, std::size_t attribute) {
  for (const auto c : space.attribute_columns(attribute)) {
    box.lower[c] = 0.0;
    box.upper[c] = 1.0;
  }
  return box;
}

namespace {

// Per-row count of constraining attributes the row fails, with one failure
// mask per attribute, so a candidate removal is scored in O(N).
class ViolationIndex {
 public:
  ViolationIndex(const BoxBounds& box, const EncodedSpace& space, std::span<const int> labels,
                 int query_label, std::vector<std::size_t> active)
      : labels_(labels), query_label_(query_label), active_(std::move(active)) {
    const auto& data = space.matrix();
    const std::size_t n = data.rows();
    violations_.assign(n, 0);
    fails_.assign(space.attributes(), {});
    for (const auto a : active_) {
      auto& mask = fails_[a];
      mask.assign(n, 0);
      const auto cols = space.attribute_columns(a);
      for (std::size_t i = 0; i < n; ++i) {
        for (const auto c : cols) {
          if (!interval_admits(box.lower[c], box.upper[c], data(i, c))) {
            mask[i] = 1;
            ++violations_[i];
            break;
          }
        }
      }
    }
    counts_.total = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (violations_[i] == 0) {
        ++counts_.inside;
        if (labels_[i] == query_label_) ++counts_.matching;
      }
    }
  }

  const ExactCounts& counts() const { return counts_; }
  const std::vector<std::size_t>& active() const { return active_; }

  ExactCounts counts_without(std::size_t a) const {
    ExactCounts c = counts_;
    const auto& mask = fails_[a];
    for (std::size_t i = 0; i < violations_.size(); ++i) {
      if (mask[i] && violations_[i] == 1) {
        ++c.inside;
        if (labels_[i] == query_label_) ++c.matching;
      }
    }
    return c;
  }

  void remove(std::size_t a) {
    const auto& mask = fails_[a];
    for (std::size_t i = 0; i < violations_.size(); ++i) {
      if (!mask[i]) continue;
      if (--violations_[i] == 0) {
        ++counts_.inside;
        if (labels_[i] == query_label_) ++counts_.matching;
      }
    }
    active_.erase(std::find(active_.begin(), active_.end(), a));
  }

 private:
  std::span<const int> labels_;
  int query_label_;
  std::vector<std::size_t> active_;
  std::vector<std::uint32_t> violations_;
  std::vector<std::vector<char>> fails_;
  ExactCounts counts_;
};

double precision_or(const ExactCounts& c, double fallback) { return c.precision().value_or(fallback); }

bool meets(const ExactCounts& c, double threshold) {
  const auto p = c.precision();
  return p && *p >= threshold;
}

struct Choice {
  std::size_t attribute = 0;
  ExactCounts counts;
};

std::optional<Choice> pick_forced(const ViolationIndex& idx, double threshold) {
  std::optional<Choice> best_feasible, best_any;
  for (const auto a : idx.active()) {
    const auto c = idx.counts_without(a);
    const double pre = precision_or(c, -1.0);
    if (meets(c, threshold)) {
      if (!best_feasible || c.inside > best_feasible->counts.inside ||
          (c.inside == best_feasible->counts.inside && pre > precision_or(best_feasible->counts, -1.0))) {
        best_feasible = Choice{a, c};
      }
    }
    if (!best_any || pre > precision_or(best_any->counts, -1.0) ||
        (pre == precision_or(best_any->counts, -1.0) && c.inside > best_any->counts.inside)) {
      best_any = Choice{a, c};
    }
  }
  return best_feasible ? best_feasible : best_any;
}

std::optional<Choice> pick_improving(const ViolationIndex& idx, double threshold) {
  std::optional<Choice> best;
  for (const auto a : idx.active()) {
    const auto c = idx.counts_without(a);
    if (!meets(c, threshold) || c.inside <= idx.counts().inside) continue;
    if (!best || c.inside > best->counts.inside ||
        (c.inside == best->counts.inside &&
         precision_or(c, -1.0) > precision_or(best->counts, -1.0))) {
      best = Choice{a, c};
    }
  }
  return best;
}

EliminationStep make_step(const EncodedSpace& space, std::size_t a, const ExactCounts& c) {
  return {a, space.schema()[a].name, c.coverage(), c.precision()};
}

// Best keep-set of size <= max_attrs by coverage among those meeting the
// threshold; returns the attributes to remove, or nothing when none qualifies.
std::optional<std::vector<std::size_t>> exhaustive_removal(const BoxBounds& box,
                                                           const EncodedSpace& space,
                                                           std::span<const int> labels,
                                                           int query_label, double threshold,
                                                           const std::vector<std::size_t>& active,
                                                           std::size_t max_attrs) {
  const std::size_t m = active.size();
  std::optional<std::vector<std::size_t>> best;
  std::size_t best_inside = 0;
  double best_pre = -1.0;
  for (std::uint32_t keep = 0; keep < (1u << m); ++keep) {
    if (static_cast<std::size_t>(std::popcount(keep)) > max_attrs) continue;
    BoxBounds b = box;
    std::vector<std::size_t> removed;
    for (std::size_t t = 0; t < m; ++t) {
      if (!(keep & (1u << t))) {
        b = remove_attribute(std::move(b), space, active[t]);
        removed.push_back(active[t]);
      }
    }
    const auto c = count_exact(b, space.matrix(), labels, query_label);
    if (!meets(c, threshold)) continue;
    const double pre = *c.precision();
    if (!best || c.inside > best_inside || (c.inside == best_inside && pre > best_pre)) {
      best = std::move(removed);
      best_inside = c.inside;
      best_pre = pre;
    }
  }
  return best;
}

}  // namespace

EliminationResult greedy_eliminate(const BoxBounds& box, const EncodedSpace& space,
                                   std::span<const int> labels, int query_label, double threshold,
                                   std::size_t max_attrs, std::size_t rescue_limit) {
  if (box.dims() != space.dims()) throw ArgumentError("bounds dimension does not match the space");
  if (labels.size() != space.matrix().rows()) throw ArgumentError("label count does not match data rows");
  if (max_attrs < 1) throw ArgumentError("max_attrs must be at least 1");

  std::vector<std::size_t> active;
  for (std::size_t a = 0; a < space.attributes(); ++a) {
    if (!attribute_is_trivial(box, space, a)) active.push_back(a);
  }
  const auto initial_active = active;

  EliminationResult out;
  out.bounds = box;
  ViolationIndex idx(box, space, labels, query_label, active);

  while (!idx.active().empty()) {
    std::optional<Choice> choice = idx.active().size() > max_attrs ? pick_forced(idx, threshold)
                                                                    : pick_improving(idx, threshold);
    if (!choice) break;
    idx.remove(choice->attribute);
    out.bounds = remove_attribute(std::move(out.bounds), space, choice->attribute);
    out.steps.push_back(make_step(space, choice->attribute, idx.counts()));
  }
  out.counts = idx.counts();

  if (!meets(out.counts, threshold) && !initial_active.empty() && initial_active.size() <= rescue_limit) {
    const auto removal = exhaustive_removal(box, space, labels, query_label, threshold,
                                            initial_active, max_attrs);
    if (removal) {
      log().debug("greedy elimination fell below the threshold; using exhaustive removal set");
      ViolationIndex redo(box, space, labels, query_label, initial_active);
      out.bounds = box;
      out.steps.clear();
      for (const auto a : *removal) {
        redo.remove(a);
        out.bounds = remove_attribute(std::move(out.bounds), space, a);
        out.steps.push_back(make_step(space, a, redo.counts()));
      }
      while (auto more = pick_improving(redo, threshold)) {
        redo.remove(more->attribute);
        out.bounds = remove_attribute(std::move(out.bounds), space, more->attribute);
        out.steps.push_back(make_step(space, more->attribute, redo.counts()));
      }
      out.counts = redo.counts();
    }
  }
  return out;
}

Explanation explain(std::span<const double> query, int query_label, const EncodedSpace& space,
                    std::span<const int> labels, const ExplainConfig& cfg, const ApproxConstants& k,
                    OptimizationTrace* trace) {
  cfg.validate();
  if (query.size() != space.dims()) throw ArgumentError("query dimension does not match the space");
  const auto& data = space.matrix();
  const ExplainProblem problem{data, labels, query, query_label};

  auto opt = optimize(initial_box(query, cfg.optimizer.init_half_width), problem, cfg.optimizer, k);
  const BoxBounds snapped = snap_discrete(opt.bounds, space);
  auto elim = greedy_eliminate(snapped, space, labels, query_label,
                               cfg.optimizer.precision_threshold, cfg.max_attrs, cfg.rescue_limit);

  Explanation e;
  e.query.assign(query.begin(), query.end());
  e.query_label = query_label;
  e.bounds = std::move(elim.bounds);
  e.clauses = decode_bounds(e.bounds, space);
  e.coverage = elim.counts.coverage();
  e.precision = elim.counts.precision();
  e.feasible = meets(elim.counts, cfg.optimizer.precision_threshold);
  e.iterations = opt.trace.records.size();
  e.elimination = std::move(elim.steps);
  if (trace) *trace = std::move(opt.trace);
  return e;
}

Explanation explain(std::span<const RawCell> query, const EncodedSpace& space,
                    PredictionProvider& provider, const ExplainConfig& cfg, const ApproxConstants& k,
                    OptimizationTrace* trace) {
  const auto encoded = space.encode_instance(query);
  const auto labels = predict_batch(provider, space.matrix(), space.dims());
  Matrix q(0, encoded.size());
  q.append_row(encoded);
  const int query_label = predict_batch(provider, q, space.dims()).front();
  return explain(encoded, query_label, space, labels, cfg, k, trace);
}

Explanation explain_boolean(BooleanPerturbationProvider& provider,
                            const std::vector<std::string>& names, const ExplainConfig& cfg,
                            const ApproxConstants& k) {
  const Matrix samples = provider.samples();
  const EncodedSpace space = encode_boolean(samples, names);
  const auto labels = predict_batch(provider, space.matrix(), space.dims());
  const auto query = space.matrix().row(0);
  return explain(query, labels.front(), space, labels, cfg, k);
}

std::string render_rule(const Explanation& e, int decimals) {
  if (e.clauses.empty()) return "TRUE";
  std::string out;
  for (std::size_t i = 0; i < e.clauses.size(); ++i) {
    if (i) out += " ∧ ";
    out += to_string(e.clauses[i], decimals);
  }
  return out;
}

nlohmann::json to_json(const Explanation& e) {
  nlohmann::json clauses = nlohmann::json::array();
  for (const auto& c : e.clauses) clauses.push_back(to_json(c));
  nlohmann::json order = nlohmann::json::array();
  for (const auto& s : e.elimination) {
    order.push_back({{"attribute", s.name},
                     {"coverage", s.coverage},
                     {"precision", s.precision ? nlohmann::json(*s.precision) : nlohmann::json(nullptr)}});
  }
  return {{"query", e.query},
          {"label", e.query_label},
          {"rule", render_rule(e)},
          {"clauses", std::move(clauses)},
          {"l", e.bounds.lower},
          {"u", e.bounds.upper},
          {"coverage", e.coverage},
          {"precision", e.precision ? nlohmann::json(*e.precision) : nlohmann::json(nullptr)},
          {"feasible", e.feasible},
          {"iterations", e.iterations},
          {"elimination", std::move(order)}};
}

}  // namespace maire
