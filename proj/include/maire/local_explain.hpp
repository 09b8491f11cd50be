#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "maire/blackbox.hpp"
#include "maire/box.hpp"
#include "maire/optimizer.hpp"
#include "maire/schema.hpp"
#include "maire/soft_indicator.hpp"

namespace maire {

struct ExplainConfig {
  OptimizerConfig optimizer;
  // At most this many clauses survive elimination.
  std::size_t max_attrs = std::numeric_limits<std::size_t>::max();
  // Exhaustive fallback when greedy elimination ends below the threshold,
  // used only while the number of constrained attributes is at most this.
  std::size_t rescue_limit = 12;

  void validate() const;
};

struct EliminationStep {
  std::size_t attribute = 0;
  std::string name;
  double coverage = 0.0;  // after the removal
  std::optional<double> precision;
};

struct Explanation {
  BoxBounds bounds;
  std::vector<RuleClause> clauses;
  std::vector<double> query;  // encoded
  int query_label = 0;
  double coverage = 0.0;
  std::optional<double> precision;
  bool feasible = false;
  std::size_t iterations = 0;
  std::vector<EliminationStep> elimination;
};

struct EliminationResult {
  BoxBounds bounds;
  ExactCounts counts;
  std::vector<EliminationStep> steps;
};

// Widens whole attributes to their full range until at most `max_attrs`
// attributes constrain the box, then keeps removing while a removal strictly
// raises coverage and keeps precision at or above `threshold`.
EliminationResult greedy_eliminate(const BoxBounds& box, const EncodedSpace& space,
                                   std::span<const int> labels, int query_label, double threshold,
                                   std::size_t max_attrs,
                                   std::size_t rescue_limit = ExplainConfig{}.rescue_limit);

// Box with attribute `attribute` widened to [0,1] on all of its columns.
BoxBounds remove_attribute(BoxBounds box, const EncodedSpace& space, std::size_t attribute);

// Optimize, snap discrete bounds, eliminate, decode. Metrics are exact and
// measured on `space.matrix()` after all post-processing.
Explanation explain(std::span<const double> query, int query_label, const EncodedSpace& space,
                    std::span<const int> labels, const ExplainConfig& cfg, const ApproxConstants& k,
                    OptimizationTrace* trace = nullptr);

// Labels the data and the query through `provider` first.
Explanation explain(std::span<const RawCell> query, const EncodedSpace& space,
                    PredictionProvider& provider, const ExplainConfig& cfg, const ApproxConstants& k,
                    OptimizationTrace* trace = nullptr);

// Explains the base vector of a boolean perturbation provider on its samples.
Explanation explain_boolean(BooleanPerturbationProvider& provider,
                            const std::vector<std::string>& names, const ExplainConfig& cfg,
                            const ApproxConstants& k);

std::string render_rule(const Explanation& e, int decimals = 2);
nlohmann::json to_json(const Explanation& e);

}  // namespace maire
