#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "maire/box.hpp"
#include "maire/matrix.hpp"
#include "maire/soft_indicator.hpp"

namespace maire {

struct OptimizerConfig {
  double learning_rate = 0.01;
  std::size_t max_iters = 2500;
  double lambda1 = 5.0;  // not given in the literature; documented default
  double lambda2 = 5.0;
  double precision_threshold = 0.95;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double convergence_tol = 1e-6;
  std::size_t convergence_window = 50;
  double init_half_width = 0.05;
  std::uint64_t seed = 0;
  // Test-only: disables the final containment snap of the query.
  bool snap_containment = true;

  void validate() const;
};

// Evaluation data of one local explanation problem. Views only; the caller
// keeps the data alive.
struct ExplainProblem {
  const Matrix& data;
  std::span<const int> labels;
  std::span<const double> query;
  int query_label = 0;
};

struct ObjectiveTerms {
  double objective = 0.0;
  double coverage_hat = 0.0;
  double precision_hat = 0.0;
  double penalty = 0.0;    // lambda2 * sum of containment violations
  double violation = 0.0;  // sum of containment violations
  int gate = 0;            // 1 + sgn(P - Pre), forced to 2 for an empty box
  ExactCounts counts;
};

struct BoxGradient {
  std::vector<double> lower;
  std::vector<double> upper;
};

ObjectiveTerms evaluate_objective(const BoxBounds& box, const ExplainProblem& problem,
                                  const OptimizerConfig& cfg, const ApproxConstants& k);
double objective(const BoxBounds& box, const ExplainProblem& problem, const OptimizerConfig& cfg,
                 const ApproxConstants& k);

// Analytic gradient of the objective, sgn factors held constant.
BoxGradient gradient(const BoxBounds& box, const ExplainProblem& problem, const OptimizerConfig& cfg,
                     const ApproxConstants& k);
ObjectiveTerms evaluate_with_gradient(const BoxBounds& box, const ExplainProblem& problem,
                                      const OptimizerConfig& cfg, const ApproxConstants& k,
                                      BoxGradient& grad);

// Gradient of the penalty lambda2 * sum(ReLU(l - q) + ReLU(q - u)) alone.
BoxGradient penalty_gradient(const BoxBounds& box, std::span<const double> query, double lambda2);

// Small box of half-width `half_width` around the query, clipped to [0,1].
BoxBounds initial_box(std::span<const double> query, double half_width);

// l_j <- min(l_j, q_j), u_j <- max(u_j, q_j), except that a lower bound equal
// to a positive q_j is lowered to the next double below it.
BoxBounds snap_to_contain(BoxBounds box, std::span<const double> query);

struct TraceRecord {
  std::size_t iteration = 0;
  double objective = 0.0;
  double coverage_hat = 0.0;
  double precision_hat = 0.0;
  double coverage = 0.0;
  std::optional<double> precision;
  double violation = 0.0;
};

enum class Termination { converged, iteration_cap };

struct OptimizationTrace {
  std::vector<TraceRecord> records;
  Termination termination = Termination::iteration_cap;
  std::size_t best_iteration = 0;
};

nlohmann::json to_json(const TraceRecord& r);

struct OptimizeResult {
  BoxBounds bounds;
  ExactCounts counts;
  bool feasible = false;
  OptimizationTrace trace;
};

// Adam ascent on the penalized objective with clipping to [0,1] after every
// step. Returns the best iterate seen, feasible ones first and then by exact
// coverage; infeasible ones are ranked by exact precision.
OptimizeResult optimize(const BoxBounds& initial, const ExplainProblem& problem,
                        const OptimizerConfig& cfg, const ApproxConstants& k);

}  // namespace maire
