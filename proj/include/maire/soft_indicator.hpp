#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "maire/box.hpp"
#include "maire/matrix.hpp"

namespace maire {

// Constants of the soft indicator
//   gamma(z) = c1 * sigmoid(c2 * z) + c3 * (sgn(z) * c4 + c5).
struct ApproxConstants {
  double c1 = 0.4;
  double c2 = 15.0;
  double c3 = 0.6;
  double c4 = 0.5;
  double c5 = 0.5;
  double cl = 0.02;
  double ch = 0.8;

  // Rescaled for D dimensions so that the interior/exterior separation of
  // membership_h holds: c1 = 1/(4D) and ch midway between (4D-1)/(4D) and
  // 1 - c1/2.
  static ApproxConstants lemma_scaled(std::size_t dims);

  // Same as the defaults but with c3 = 1 - c1 tied to a new c1.
  static ApproxConstants with(double c1, double c2, double cl, double ch);

  // Throws ArgumentError on a broken invariant.
  void validate() const;

  // c1/2 < 1/(4D) and (4D-1)/(4D) < ch < 1 - c1/2.
  bool satisfies_membership_bound(std::size_t dims) const;
  // c1 < 1/(2D) and ch > (4D-1)/(4D).
  bool satisfies_coverage_bound(std::size_t dims) const;

  friend bool operator==(const ApproxConstants&, const ApproxConstants&) = default;
};

double sigmoid(double z);

double gamma(double z, const ApproxConstants& k);

// Derivative of gamma away from z = 0: the sgn step contributes nothing.
double gamma_slope(double z, const ApproxConstants& k);

// Soft box membership A(G(x_1, l_1), GE(u_1, x_1), ...).
double membership_h(const BoxBounds& box, std::span<const double> x, const ApproxConstants& k);

// Exact membership: for each axis (l_j <= 0 or l_j < x_j) and x_j <= u_j.
bool inside(const BoxBounds& box, std::span<const double> x);

struct ExactCounts {
  std::size_t total = 0;
  std::size_t inside = 0;
  std::size_t matching = 0;  // inside and label == query label

  double coverage() const { return total == 0 ? 0.0 : double(inside) / double(total); }
  std::optional<double> precision() const {
    if (inside == 0) return std::nullopt;
    return double(matching) / double(inside);
  }
};

ExactCounts count_exact(const BoxBounds& box, const Matrix& points, std::span<const int> labels,
                        int query_label);

double cov_exact(const BoxBounds& box, const Matrix& points);
// Throws UndefinedPrecisionError when no point lies inside.
double pre_exact(const BoxBounds& box, const Matrix& points, std::span<const int> labels,
                 int query_label);

double cov_hat(const BoxBounds& box, const Matrix& points, const ApproxConstants& k);
double pre_hat(const BoxBounds& box, const Matrix& points, std::span<const int> labels,
               int query_label, const ApproxConstants& k);

// Pairwise summation; the result does not depend on how the caller later
// splits work across threads.
double pairwise_sum(std::span<const double> values);

struct BoundsAudit {
  std::size_t dims = 0;
  double coverage = 0.0;
  std::optional<double> precision;
  double coverage_hat = 0.0;
  double precision_hat = 0.0;

  bool coverage_hypothesis = false;
  double coverage_lower = 0.0;  // ((4D-1)/4D) Cov
  double coverage_upper = 0.0;  // 1/(4D) + ((4D-1)/4D) Cov
  bool coverage_holds = false;

  bool precision_checked = false;  // skipped when Cov = 0
  // Constants as for the coverage bound, and the in-box match rate at least
  // the match rate over all points.
  bool precision_hypothesis = false;
  double precision_upper = 0.0;  // Pre (1 + (1/Cov) (4D/(4D-1)))
  bool precision_holds = false;

  // A violation only counts when the corresponding hypothesis is met.
  bool coverage_violated() const { return coverage_hypothesis && !coverage_holds; }
  bool precision_violated() const {
    return precision_checked && precision_hypothesis && !precision_holds;
  }
  bool violated() const { return coverage_violated() || precision_violated(); }
};

BoundsAudit audit_bounds(const BoxBounds& box, const Matrix& points, std::span<const int> labels,
                         int query_label, const ApproxConstants& k);

nlohmann::json to_json(const BoundsAudit& audit);
nlohmann::json to_json(const ApproxConstants& k);

}  // namespace maire
