// Acceptance run: one line per criterion, nonzero exit when any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>

#include "fixtures.hpp"
#include "maire/error.hpp"
#include "maire/global_explain.hpp"
#include "maire/local_explain.hpp"
#include "maire/optimizer.hpp"
#include "maire/schema.hpp"
#include "maire/soft_indicator.hpp"
#include "maire/synthetic.hpp"
#include "oracle.hpp"

using namespace maire;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const ApproxConstants kDefault{};

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

int label_of(const SyntheticScenario& sc) { return sc.shape.contains(sc.query) ? 1 : 0; }

double box_area(const BoxBounds& b) {
  double a = 1.0;
  for (std::size_t j = 0; j < b.dims(); ++j) a *= std::max(0.0, b.upper[j] - b.lower[j]);
  return a;
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
  return out;
}

Outcome ac1_rectangle() {
  const auto sc = make_scenario("rect");
  const auto data = sample_scenario(sc, 5000, 0);
  const auto start = std::chrono::steady_clock::now();
  const auto e = explain(sc.query, label_of(sc), data.space, data.labels, ExplainConfig{}, kDefault);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool bounds_ok = true;
  for (std::size_t j = 0; j < 2; ++j) {
    bounds_ok &= std::abs(e.bounds.lower[j] - 0.3) <= 0.05 && std::abs(e.bounds.upper[j] - 0.7) <= 0.05;
  }
  const double pre = e.precision.value_or(0.0);
  return {bounds_ok && pre >= 0.95 && secs < 60.0,
          fmt::format("l=({:.3f}, {:.3f}) u=({:.3f}, {:.3f}) precision={:.4f} time={:.2f}s", e.bounds.lower[0],
                      e.bounds.lower[1], e.bounds.upper[0], e.bounds.upper[1], pre, secs)};
}

Outcome ac2_threshold_monotonicity() {
  const auto sc = make_scenario("circle");
  int wins = 0;
  std::string areas;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto data = sample_scenario(sc, 5000, seed);
    ExplainConfig lo, hi;
    lo.optimizer.precision_threshold = 0.80;
    hi.optimizer.precision_threshold = 0.95;
    lo.optimizer.seed = hi.optimizer.seed = seed;
    const double a80 = box_area(explain(sc.query, label_of(sc), data.space, data.labels, lo, kDefault).bounds);
    const double a95 = box_area(explain(sc.query, label_of(sc), data.space, data.labels, hi, kDefault).bounds);
    wins += a95 < a80;
    if (seed < 3) areas += fmt::format(" {:.3f}<{:.3f}", a95, a80);
  }
  return {wins == 10, fmt::format("{}/10 seeds with area(P=0.95) < area(P=0.80);{} ...", wins, areas)};
}

Outcome ac3_containment() {
  const auto sc = make_scenario("two-region");
  int contained = 0, excluded = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto data = sample_scenario(sc, 5000, seed);
    ExplainConfig on, off;
    on.optimizer.lambda2 = 5.0;
    off.optimizer.lambda2 = 0.0;
    off.optimizer.snap_containment = false;
    on.optimizer.seed = off.optimizer.seed = seed;
    const auto a = explain(sc.query, label_of(sc), data.space, data.labels, on, kDefault);
    const auto b = explain(sc.query, label_of(sc), data.space, data.labels, off, kDefault);
    contained += inside(a.bounds, sc.query);
    excluded += !inside(b.bounds, sc.query);
  }
  return {contained == 10 && excluded >= 1,
          fmt::format("lambda2=5: {}/10 contain the query; lambda2=0 without snap: {}/10 exclude it", contained,
                      excluded)};
}

bool in_cl_band(const Matrix& m, const BoxBounds& box, double cl) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < box.dims(); ++j) {
      if (m(i, j) > box.upper[j] && m(i, j) <= box.upper[j] + cl) return true;
    }
  }
  return false;
}

bool coverage_bound_holds(const BoxBounds& box, const Matrix& m, const ApproxConstants& k) {
  const double d4 = 4.0 * static_cast<double>(box.dims());
  const double cov = cov_exact(box, m), hat = cov_hat(box, m, k);
  return ((d4 - 1.0) / d4) * cov <= hat && hat <= 1.0 / d4 + ((d4 - 1.0) / d4) * cov;
}

Outcome ac4_coverage_bound() {
  std::mt19937_64 rng(404);
  std::size_t violations = 0, audits = 0, banded = 0, narrow_violations = 0;
  bool hypothesis = true;
  for (std::size_t d : {1u, 2u}) {
    const auto k = ApproxConstants::lemma_scaled(d);
    auto narrow = k;
    narrow.cl = 1e-9;
    hypothesis &= k.c1 < 1.0 / (2.0 * d) && k.ch > (4.0 * d - 1.0) / (4.0 * d);
    for (int t = 0; t < 1000; ++t) {
      const std::size_t n = 1 + rng() % 500;
      const auto m = fixtures::to_matrix(oracle::random_rows(n, d, rng), d);
      const auto labels = fixtures::random_labels(n, 2, rng);
      const auto box = fixtures::sorted_pair_box(rng, d);
      // Checked here directly as well as through the audit record.
      const bool holds = coverage_bound_holds(box, m, k) && !audit_bounds(box, m, labels, 1, k).coverage_violated();
      violations += !holds;
      banded += !holds && in_cl_band(m, box, k.cl);
      // Diagnostic only: the same pair once the band above u holds no data.
      narrow_violations += !coverage_bound_holds(box, m, narrow);
      ++audits;
    }
  }
  return {hypothesis && violations == 0,
          fmt::format("{} violations over {} audits (D=1 and D=2, 1000 each); {} of them with data in (u, u+cl]; "
                      "same pairs with cl=1e-9: {} violations",
                      violations, audits, banded, narrow_violations)};
}

double coverage_mse(std::size_t d, std::mt19937_64& rng) {
  const auto k = ApproxConstants::lemma_scaled(d);
  const auto points = uniform_points(1000, d, rng());
  double sum = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto box = fixtures::sorted_pair_box(rng, d);
    const double diff = cov_exact(box, points) - cov_hat(box, points, k);
    sum += diff * diff;
  }
  return sum / 100.0;
}

Outcome ac5_gap_trend() {
  std::mt19937_64 rng(505);
  const double m2 = coverage_mse(2, rng), m8 = coverage_mse(8, rng), m20 = coverage_mse(20, rng);
  return {m20 < m8 && m8 < m2, fmt::format("MSE D=2 {:.3e}, D=8 {:.3e}, D=20 {:.3e}", m2, m8, m20)};
}

// Random gradient check configuration whose step-function arguments all lie
// at least `margin` from zero: x - l, u - x + cl, u - x, the outer soft AND,
// the containment kinks and P - Pre.
struct GradConfig {
  Matrix data;
  std::vector<int> labels;
  std::vector<double> query;
  BoxBounds box;
};

bool far_from_kinks(std::span<const double> x, const BoxBounds& box, double margin) {
  const std::size_t d = box.dims();
  double mean = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double a = x[j] - box.lower[j], b = box.upper[j] - x[j] + kDefault.cl, c = box.upper[j] - x[j];
    if (std::abs(a) < margin || std::abs(b) < margin || std::abs(c) < margin) return false;
    mean += gamma(a, kDefault) + gamma(b, kDefault);
  }
  return std::abs(mean / (2.0 * d) - kDefault.ch) >= margin;
}

GradConfig grad_config(std::mt19937_64& rng, double margin, double threshold) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const std::size_t d = 1 + rng() % 5;
    GradConfig g;
    g.box = fixtures::sorted_pair_box(rng, d);
    g.query = oracle::random_rows(1, d, rng)[0];
    bool ok = true;
    for (std::size_t j = 0; j < d; ++j) {
      ok &= std::abs(g.box.lower[j] - g.query[j]) >= margin && std::abs(g.query[j] - g.box.upper[j]) >= margin;
    }
    if (!ok) continue;
    g.data = Matrix(0, d);
    std::vector<double> x(d);
    while (g.data.rows() < 150) {
      // Half of the points inside the box so every gate value shows up.
      const bool in = unit(rng) < 0.5;
      for (std::size_t j = 0; j < d; ++j) {
        x[j] = in ? g.box.lower[j] + unit(rng) * (g.box.upper[j] - g.box.lower[j]) : unit(rng);
      }
      if (far_from_kinks(x, g.box, margin)) g.data.append_row(x);
    }
    g.labels = fixtures::random_labels(150, 2, rng);
    const auto pre = count_exact(g.box, g.data, g.labels, 1).precision();
    if (pre && std::abs(threshold - *pre) < margin) continue;
    return g;
  }
}

Outcome ac6_gradient() {
  std::mt19937_64 rng(606);
  OptimizerConfig cfg;
  const double step = 1e-6, margin = 1e-3;
  double worst = 0.0;
  int failures = 0;
  for (int t = 0; t < 100; ++t) {
    cfg.precision_threshold = t % 2 ? 0.95 : 0.5;
    const auto g = grad_config(rng, margin, cfg.precision_threshold);
    const ExplainProblem p{g.data, g.labels, g.query, 1};
    const auto an = gradient(g.box, p, cfg, kDefault);
    const std::size_t d = g.box.dims();
    double diff2 = 0.0, norm2 = 0.0;
    for (std::size_t c = 0; c < 2 * d; ++c) {
      BoxBounds plus = g.box, minus = g.box;
      (c < d ? plus.lower[c] : plus.upper[c - d]) += step;
      (c < d ? minus.lower[c] : minus.upper[c - d]) -= step;
      const double fd = (objective(plus, p, cfg, kDefault) - objective(minus, p, cfg, kDefault)) / (2.0 * step);
      const double a = c < d ? an.lower[c] : an.upper[c - d];
      diff2 += (a - fd) * (a - fd);
      norm2 += fd * fd;
    }
    const double rel = std::sqrt(diff2) / std::max(std::sqrt(norm2), 1e-300);
    worst = std::max(worst, rel);
    failures += !(rel < 1e-4);
  }
  return {failures == 0, fmt::format("{} of 100 configurations over 1e-4; worst norm-wise relative error {:.2e}",
                                     failures, worst)};
}

Outcome ac7_exact_oracle() {
  std::mt19937_64 rng(707);
  int mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + rng() % 20;
    const std::size_t n = 1 + rng() % 1000;
    const auto rows = oracle::random_rows(n, d, rng);
    const auto labels = fixtures::random_labels(n, 1 + static_cast<int>(rng() % 3), rng);
    auto box = fixtures::sorted_pair_box(rng, d);
    for (std::size_t j = 0; j < d; ++j) {
      if (rng() % 4 == 0) box.lower[j] = rows[rng() % n][j];
      if (rng() % 4 == 0) box.upper[j] = rows[rng() % n][j];
      if (rng() % 8 == 0) box.lower[j] = 0.0;
      if (rng() % 8 == 0) box.upper[j] = 1.0;
    }
    const auto m = fixtures::to_matrix(rows, d);
    const auto ref = oracle::brute_force_counts(rows, labels, box.lower, box.upper, 0);
    const double ref_cov = static_cast<double>(ref.inside) / static_cast<double>(n);
    bool ok = cov_exact(box, m) == ref_cov;
    if (ref.inside > 0) {
      ok &= pre_exact(box, m, labels, 0) == static_cast<double>(ref.matching) / static_cast<double>(ref.inside);
    } else {
      try {
        pre_exact(box, m, labels, 0);
        ok = false;
      } catch (const UndefinedPrecisionError&) {
      }
    }
    mismatches += !ok;
  }
  return {mismatches == 0, fmt::format("{} mismatches over 200 triples", mismatches)};
}

// Mixed-kind table with labels given by a hidden box on two attributes plus
// label noise.
struct Tabular {
  EncodedSpace space;
  std::vector<int> labels;
};

Tabular tabular_problem(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t attrs = 2 + rng() % 5;
  Schema schema;
  for (std::size_t a = 0; a < attrs; ++a) {
    const auto name = "a" + std::to_string(a + 1);
    switch (rng() % 3) {
      case 0:
        schema.push_back(AttributeSchema::continuous(name, std::pair{0.0, 10.0}));
        break;
      case 1:
        schema.push_back(AttributeSchema::ordered(name, {1, 2, 3, 4, 5}));
        break;
      default:
        schema.push_back(AttributeSchema::categorical(name, {"p", "q", "r"}));
    }
  }
  Tabular t{EncodedSpace(schema), {}};
  const double noise = 0.15 * unit(rng);
  for (int i = 0; i < 400; ++i) {
    RawRow row;
    for (const auto& a : schema) {
      if (a.kind == AttributeKind::continuous) row.emplace_back(10.0 * unit(rng));
      else if (a.kind == AttributeKind::ordered_discrete) row.emplace_back(static_cast<double>(1 + rng() % 5));
      else row.emplace_back(static_cast<std::size_t>(rng() % 3));
    }
    t.space.append(row);
    const auto x = t.space.matrix().row(t.space.matrix().rows() - 1);
    int y = x[0] < 0.6 && x[t.space.dims() - 1] > 0.3;
    if (unit(rng) < noise) y = 1 - y;
    t.labels.push_back(y);
  }
  return t;
}

BoxBounds widen(BoxBounds box, const EncodedSpace& space, std::size_t attribute) {
  for (const auto c : space.attribute_columns(attribute)) {
    box.lower[c] = 0.0;
    box.upper[c] = 1.0;
  }
  return box;
}

Outcome ac8_elimination() {
  std::mt19937_64 rng(808);
  int failures = 0, rescued_needed = 0;
  for (int t = 0; t < 50; ++t) {
    const auto prob = tabular_problem(rng);
    const std::size_t attrs = prob.space.attributes();
    const std::size_t k_cap = 1 + rng() % attrs;
    const std::size_t row = rng() % prob.labels.size();
    const auto query = prob.space.matrix().row(row);
    const int label = prob.labels[row];
    ExplainConfig cfg;
    cfg.max_attrs = k_cap;
    cfg.optimizer.precision_threshold = 0.9;
    cfg.optimizer.max_iters = 600;

    const ExplainProblem p{prob.space.matrix(), prob.labels, query, label};
    const auto opt = optimize(initial_box(query, cfg.optimizer.init_half_width), p, cfg.optimizer, kDefault);
    const auto before = snap_discrete(opt.bounds, prob.space);
    const auto e = explain(query, label, prob.space, prob.labels, cfg, kDefault);
    const auto elim = greedy_eliminate(before, prob.space, prob.labels, label, 0.9, k_cap);
    bool ok = elim.bounds == e.bounds;  // same pipeline as explain

    ok &= e.clauses.size() <= k_cap;
    double prev = count_exact(before, p.data, p.labels, label).coverage();
    for (const auto& s : e.elimination) {
      ok &= s.coverage >= prev;
      prev = s.coverage;
    }
    ok &= inside(e.bounds, query);

    // Exhaustive search over keep-sets of at most K constrained attributes.
    const auto rows = rows_of(p.data);
    const std::vector<int> labels(p.labels.begin(), p.labels.end());
    std::vector<std::size_t> active;
    for (std::size_t a = 0; a < attrs; ++a) {
      if (!attribute_is_trivial(before, prob.space, a)) active.push_back(a);
    }
    bool reachable = false;
    for (std::uint32_t keep = 0; keep < (1u << active.size()) && !reachable; ++keep) {
      if (static_cast<std::size_t>(std::popcount(keep)) > k_cap) continue;
      BoxBounds b = before;
      for (std::size_t i = 0; i < active.size(); ++i) {
        if (!(keep & (1u << i))) b = widen(std::move(b), prob.space, active[i]);
      }
      const auto c = oracle::brute_force_counts(rows, labels, b.lower, b.upper, label);
      reachable = c.inside > 0 && static_cast<double>(c.matching) / static_cast<double>(c.inside) >= 0.9;
    }
    if (reachable) ok &= e.precision && *e.precision >= 0.9;
    rescued_needed += reachable && !opt.feasible;
    failures += !ok;
  }
  return {failures == 0, fmt::format("{} of 50 problems broke the contract ({} started from an infeasible box)",
                                     failures, rescued_needed)};
}

double coverage_at(const GlobalExplanation& g, std::size_t prefix) {
  if (g.curves.empty()) return 0.0;
  return g.curves[std::min(prefix, g.curves.size()) - 1].coverage;
}

bool gains_non_increasing(const GlobalExplanation& g) {
  return std::is_sorted(g.gains.rbegin(), g.gains.rend());
}

Outcome ac9_msd_dominance() {
  const auto sc = make_scenario("circle");
  const auto data = sample_scenario(sc, 2000, 9);
  const auto anchors = sample_anchors(2000, 50, 9);
  ExplainConfig cfg;
  const auto pool = explain_anchors(data.space, data.labels, anchors, cfg, kDefault, worker_count());
  const std::size_t budget = 10;
  const auto msd = msd_select(pool, data.space.matrix(), budget);
  int dominated = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rp = rp_select(pool, data.space.matrix(), budget, seed);
    bool all = true;
    for (std::size_t len = 1; len <= budget; ++len) all &= coverage_at(msd, len) >= coverage_at(rp, len);
    dominated += all;
  }
  // Gains on further pools of random boxes.
  bool monotone = gains_non_increasing(msd);
  std::mt19937_64 rng(909);
  for (int t = 0; t < 20; ++t) {
    std::vector<Explanation> boxes(50);
    for (auto& e : boxes) e.bounds = fixtures::sorted_pair_box(rng, 2);
    monotone &= gains_non_increasing(msd_select(boxes, data.space.matrix(), budget));
  }
  return {dominated >= 18 && monotone,
          fmt::format("MSD >= RP at every prefix in {}/20 draws; gains non-increasing: {}; MSD coverage at {} = {:.3f}",
                      dominated, monotone ? "yes" : "no", budget, coverage_at(msd, budget))};
}

Outcome ac10_discrete_snap() {
  std::mt19937_64 rng(1010);
  int mismatches = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t attrs = 1 + rng() % 4;
    Schema schema;
    for (std::size_t a = 0; a < attrs; ++a) {
      std::vector<double> levels;
      double v = static_cast<double>(rng() % 5);
      for (std::size_t i = 0, m = 2 + rng() % 7; i < m; ++i) levels.push_back(v += 1.0 + static_cast<double>(rng() % 3));
      schema.push_back(AttributeSchema::ordered("o" + std::to_string(a + 1), levels));
    }
    EncodedSpace space(schema);
    std::vector<int> labels;
    for (int i = 0; i < 300; ++i) {
      RawRow row;
      for (const auto& a : schema) row.emplace_back(a.levels[rng() % a.levels.size()]);
      space.append(row);
      labels.push_back(static_cast<int>(rng() % 2));
    }
    const std::size_t q = rng() % labels.size();
    OptimizerConfig cfg;
    cfg.max_iters = 300;
    const ExplainProblem p{space.matrix(), labels, space.matrix().row(q), labels[q]};
    const auto boxes = {optimize(initial_box(p.query, cfg.init_half_width), p, cfg, kDefault).bounds,
                        fixtures::sorted_pair_box(rng, space.dims())};
    for (const auto& box : boxes) {
      const auto snapped = snap_discrete(box, space);
      const auto a = count_exact(box, space.matrix(), labels, labels[q]);
      const auto b = count_exact(snapped, space.matrix(), labels, labels[q]);
      bool same = a.coverage() == b.coverage() && a.precision().has_value() == b.precision().has_value();
      if (same && a.precision()) same = *a.precision() == *b.precision();
      mismatches += !same;
    }
  }
  return {mismatches == 0, fmt::format("{} differences over 50 problems (optimizer box and a random box each)",
                                       mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 rectangle recovery", ac1_rectangle},
      {"AC2 precision-threshold monotonicity", ac2_threshold_monotonicity},
      {"AC3 containment constraint", ac3_containment},
      {"AC4 coverage bound audit", ac4_coverage_bound},
      {"AC5 approximation-gap trend", ac5_gap_trend},
      {"AC6 gradient correctness", ac6_gradient},
      {"AC7 exact-measure oracle", ac7_exact_oracle},
      {"AC8 elimination contract", ac8_elimination},
      {"AC9 MSD dominance", ac9_msd_dominance},
      {"AC10 discrete snapping", ac10_discrete_snap},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    fmt::print("[{}] {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
    failed += !o.pass;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
