#include "maire/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "maire/error.hpp"
#include "maire/log.hpp"

namespace maire {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (!(precision_threshold > 0.0 && precision_threshold <= 1.0)) {
    throw ArgumentError("precision threshold must lie in (0, 1]");
  }
  if (max_iters < 1) throw ArgumentError("max_iters must be at least 1");
  if (lambda1 < 0.0 || lambda2 < 0.0) throw ArgumentError("lambda1 and lambda2 must be non-negative");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ArgumentError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ArgumentError("Adam epsilon must be positive");
}

namespace {

constexpr std::size_t kBlockRows = 256;

void check_problem(const BoxBounds& box, const ExplainProblem& p) {
  if (p.data.empty()) throw ArgumentError("explanation data is empty");
  if (p.data.cols() != box.dims() || p.query.size() != box.dims()) {
    throw ArgumentError("box, query and data dimensions disagree");
  }
  if (p.labels.size() != p.data.rows()) throw ArgumentError("label count does not match data rows");
}

int precision_gate(const ExactCounts& c, double threshold) {
  const auto pre = c.precision();
  if (!pre) return 2;
  if (*pre < threshold) return 2;
  if (*pre > threshold) return 0;
  return 1;
}

// Soft sums over all rows, and optionally their derivatives. Rows are
// processed in fixed blocks and the block partials combined pairwise.
struct SoftSums {
  double h = 0.0;        // sum h_i
  double h_match = 0.0;  // sum h_i [label_i == query label]
  std::vector<double> dh;        // d(sum h)/d(l, u), length 2D
  std::vector<double> dh_match;  // d(sum h match)/d(l, u)
};

SoftSums soft_sums(const BoxBounds& box, const ExplainProblem& p, const ApproxConstants& k,
                   bool with_gradient) {
  const std::size_t n = p.data.rows();
  const std::size_t d = box.dims();
  const std::size_t blocks = (n + kBlockRows - 1) / kBlockRows;
  const std::size_t width = with_gradient ? 2 * d : 0;
  const double inv2d = 1.0 / (2.0 * static_cast<double>(d));

  std::vector<double> part_h(blocks), part_m(blocks);
  std::vector<double> part_dh(blocks * width, 0.0), part_dm(blocks * width, 0.0);
  std::vector<double> slope(2 * d);

  for (std::size_t b = 0; b < blocks; ++b) {
    double sh = 0.0, sm = 0.0;
    double* dh = part_dh.data() + b * width;
    double* dm = part_dm.data() + b * width;
    const std::size_t end = std::min(n, (b + 1) * kBlockRows);
    for (std::size_t i = b * kBlockRows; i < end; ++i) {
      const auto x = p.data.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double zl = x[j] - box.lower[j];
        const double zu = box.upper[j] - x[j] + k.cl;
        acc += gamma(zl, k) + gamma(zu, k);
        if (with_gradient) {
          slope[j] = -gamma_slope(zl, k);
          slope[d + j] = gamma_slope(zu, k);
        }
      }
      const double t = acc * inv2d - k.ch;
      const double h = gamma(t, k);
      const bool match = p.labels[i] == p.query_label;
      sh += h;
      if (match) sm += h;
      if (with_gradient) {
        const double outer = gamma_slope(t, k) * inv2d;
        for (std::size_t c = 0; c < width; ++c) {
          const double g = outer * slope[c];
          dh[c] += g;
          if (match) dm[c] += g;
        }
      }
    }
    part_h[b] = sh;
    part_m[b] = sm;
  }

  SoftSums s;
  s.h = pairwise_sum(part_h);
  s.h_match = pairwise_sum(part_m);
  if (with_gradient) {
    s.dh.resize(width);
    s.dh_match.resize(width);
    std::vector<double> column(blocks);
    for (std::size_t c = 0; c < width; ++c) {
      for (std::size_t b = 0; b < blocks; ++b) column[b] = part_dh[b * width + c];
      s.dh[c] = pairwise_sum(column);
      for (std::size_t b = 0; b < blocks; ++b) column[b] = part_dm[b * width + c];
      s.dh_match[c] = pairwise_sum(column);
    }
  }
  return s;
}

double containment_violation(const BoxBounds& box, std::span<const double> q) {
  double v = 0.0;
  for (std::size_t j = 0; j < box.dims(); ++j) {
    v += std::max(0.0, box.lower[j] - q[j]) + std::max(0.0, q[j] - box.upper[j]);
  }
  return v;
}

ObjectiveTerms evaluate_impl(const BoxBounds& box, const ExplainProblem& p, const OptimizerConfig& cfg,
                             const ApproxConstants& k, BoxGradient* grad) {
  check_problem(box, p);
  const double n = static_cast<double>(p.data.rows());
  const auto sums = soft_sums(box, p, k, grad != nullptr);

  ObjectiveTerms t;
  t.counts = count_exact(box, p.data, p.labels, p.query_label);
  t.gate = precision_gate(t.counts, cfg.precision_threshold);
  t.coverage_hat = sums.h / n;
  t.precision_hat = sums.h_match / sums.h;
  t.violation = containment_violation(box, p.query);
  t.penalty = cfg.lambda2 * t.violation;
  t.objective = t.coverage_hat + cfg.lambda1 * t.precision_hat * t.gate - t.penalty;

  if (grad) {
    const std::size_t d = box.dims();
    const auto pen = penalty_gradient(box, p.query, cfg.lambda2);
    grad->lower.assign(d, 0.0);
    grad->upper.assign(d, 0.0);
    const double s0 = sums.h;
    const double s1 = sums.h_match;
    for (std::size_t c = 0; c < 2 * d; ++c) {
      const double dcov = sums.dh[c] / n;
      const double dpre = (sums.dh_match[c] * s0 - s1 * sums.dh[c]) / (s0 * s0);
      const double g = dcov + cfg.lambda1 * t.gate * dpre;
      if (c < d) {
        grad->lower[c] = g - pen.lower[c];
      } else {
        grad->upper[c - d] = g - pen.upper[c - d];
      }
    }
  }
  return t;
}

bool better(bool feasible, const ExactCounts& c, bool best_feasible, const ExactCounts& best) {
  if (feasible != best_feasible) return feasible;
  if (feasible) return c.inside > best.inside;
  const double p = c.precision().value_or(-1.0);
  const double bp = best.precision().value_or(-1.0);
  if (p != bp) return p > bp;
  return c.inside > best.inside;
}

}  // namespace

ObjectiveTerms evaluate_objective(const BoxBounds& box, const ExplainProblem& problem,
                                  const OptimizerConfig& cfg, const ApproxConstants& k) {
  return evaluate_impl(box, problem, cfg, k, nullptr);
}

double objective(const BoxBounds& box, const ExplainProblem& problem, const OptimizerConfig& cfg,
                 const ApproxConstants& k) {
  return evaluate_objective(box, problem, cfg, k).objective;
}

BoxGradient gradient(const BoxBounds& box, const ExplainProblem& problem, const OptimizerConfig& cfg,
                     const ApproxConstants& k) {
  BoxGradient g;
  evaluate_impl(box, problem, cfg, k, &g);
  return g;
}

ObjectiveTerms evaluate_with_gradient(const BoxBounds& box, const ExplainProblem& problem,
                                      const OptimizerConfig& cfg, const ApproxConstants& k,
                                      BoxGradient& grad) {
  return evaluate_impl(box, problem, cfg, k, &grad);
}

BoxGradient penalty_gradient(const BoxBounds& box, std::span<const double> query, double lambda2) {
  BoxGradient g{std::vector<double>(box.dims(), 0.0), std::vector<double>(box.dims(), 0.0)};
  for (std::size_t j = 0; j < box.dims(); ++j) {
    if (box.lower[j] > query[j]) g.lower[j] = lambda2;
    if (query[j] > box.upper[j]) g.upper[j] = -lambda2;
  }
  return g;
}

BoxBounds initial_box(std::span<const double> query, double half_width) {
  BoxBounds b;
  for (double q : query) {
    b.lower.push_back(std::clamp(q - half_width, 0.0, 1.0));
    b.upper.push_back(std::clamp(q + half_width, 0.0, 1.0));
  }
  return b;
}

BoxBounds snap_to_contain(BoxBounds box, std::span<const double> query) {
  for (std::size_t j = 0; j < box.dims(); ++j) {
    // Exact membership is strict below, so a lower bound sitting on the query
    // moves just under it.
    if (query[j] <= 0.0) {
      box.lower[j] = 0.0;
    } else if (box.lower[j] >= query[j]) {
      box.lower[j] = std::nextafter(query[j], 0.0);
    }
    box.upper[j] = std::max(box.upper[j], query[j]);
  }
  return box;
}

nlohmann::json to_json(const TraceRecord& r) {
  return {{"iteration", r.iteration},
          {"objective", r.objective},
          {"coverage_hat", r.coverage_hat},
          {"precision_hat", r.precision_hat},
          {"coverage", r.coverage},
          {"precision", r.precision ? nlohmann::json(*r.precision) : nlohmann::json(nullptr)},
          {"violation", r.violation}};
}

OptimizeResult optimize(const BoxBounds& initial, const ExplainProblem& problem,
                        const OptimizerConfig& cfg, const ApproxConstants& k) {
  cfg.validate();
  k.validate();
  check_problem(initial, problem);
  const std::size_t d = initial.dims();

  BoxBounds box = initial;
  for (std::size_t j = 0; j < d; ++j) {
    box.lower[j] = std::clamp(box.lower[j], 0.0, 1.0);
    box.upper[j] = std::clamp(box.upper[j], 0.0, 1.0);
  }

  std::vector<double> m(2 * d, 0.0), v(2 * d, 0.0);
  double beta1_pow = 1.0, beta2_pow = 1.0;
  BoxGradient grad;

  OptimizeResult result;
  bool have_best = false;
  auto& trace = result.trace;
  trace.records.reserve(std::min<std::size_t>(cfg.max_iters, 4096));

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    const auto terms = evaluate_with_gradient(box, problem, cfg, k, grad);
    trace.records.push_back({it, terms.objective, terms.coverage_hat, terms.precision_hat,
                             terms.counts.coverage(), terms.counts.precision(), terms.violation});

    BoxBounds candidate = box;
    ExactCounts counts = terms.counts;
    if (cfg.snap_containment) {
      candidate = snap_to_contain(box, problem.query);
      if (candidate != box) counts = count_exact(candidate, problem.data, problem.labels, problem.query_label);
    }
    const auto pre = counts.precision();
    const bool feasible = pre && *pre >= cfg.precision_threshold;
    if (!have_best || better(feasible, counts, result.feasible, result.counts)) {
      have_best = true;
      result.bounds = std::move(candidate);
      result.counts = counts;
      result.feasible = feasible;
      trace.best_iteration = it;
    }

    if (it >= cfg.convergence_window) {
      const double before = trace.records[it - cfg.convergence_window].objective;
      if (std::abs(terms.objective - before) < cfg.convergence_tol) {
        trace.termination = Termination::converged;
        break;
      }
    }

    beta1_pow *= cfg.adam_beta1;
    beta2_pow *= cfg.adam_beta2;
    for (std::size_t c = 0; c < 2 * d; ++c) {
      const double g = c < d ? grad.lower[c] : grad.upper[c - d];
      m[c] = cfg.adam_beta1 * m[c] + (1.0 - cfg.adam_beta1) * g;
      v[c] = cfg.adam_beta2 * v[c] + (1.0 - cfg.adam_beta2) * g * g;
      const double mhat = m[c] / (1.0 - beta1_pow);
      const double vhat = v[c] / (1.0 - beta2_pow);
      double& param = c < d ? box.lower[c] : box.upper[c - d];
      param = std::clamp(param + cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps), 0.0, 1.0);
    }
  }

  log().debug("optimize: {} iterations, best at {}, coverage {:.4f}, feasible {}", trace.records.size(),
              trace.best_iteration, result.counts.coverage(), result.feasible);
  return result;
}

}  // namespace maire
