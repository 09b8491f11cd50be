#include "maire/soft_indicator.hpp"

#include <fmt/format.h>

#include <cmath>
#include <vector>

#include "maire/error.hpp"

namespace maire {

ApproxConstants ApproxConstants::lemma_scaled(std::size_t dims) {
  const double d = static_cast<double>(dims);
  const double c1 = 1.0 / (4.0 * d);
  const double lo = (4.0 * d - 1.0) / (4.0 * d);
  const double hi = 1.0 - c1 / 2.0;
  return with(c1, 15.0, 0.02, 0.5 * (lo + hi));
}

ApproxConstants ApproxConstants::with(double c1, double c2, double cl, double ch) {
  ApproxConstants k;
  k.c1 = c1;
  k.c2 = c2;
  k.c3 = 1.0 - c1;
  k.cl = cl;
  k.ch = ch;
  return k;
}

void ApproxConstants::validate() const {
  if (c4 != 0.5 || c5 != 0.5) throw ArgumentError("approximation constants: c4 and c5 must be 0.5");
  if (std::abs(c3 - (1.0 - c1)) > 1e-12) throw ArgumentError("approximation constants: c3 must equal 1 - c1");
  if (!(c1 > 0.0 && c1 < 1.0)) throw ArgumentError("approximation constants: c1 must lie in (0, 1)");
  if (!(c2 > 0.0)) throw ArgumentError("approximation constants: c2 must be positive");
  if (!(cl > 0.0 && cl < 1.0)) throw ArgumentError("approximation constants: cl must lie in (0, 1)");
  if (!(ch > 0.0 && ch < 1.0)) throw ArgumentError("approximation constants: ch must lie in (0, 1)");
}

bool ApproxConstants::satisfies_membership_bound(std::size_t dims) const {
  const double d = static_cast<double>(dims);
  return c1 / 2.0 < 1.0 / (4.0 * d) && ch > (4.0 * d - 1.0) / (4.0 * d) && ch < 1.0 - c1 / 2.0;
}

bool ApproxConstants::satisfies_coverage_bound(std::size_t dims) const {
  const double d = static_cast<double>(dims);
  return c1 < 1.0 / (2.0 * d) && ch > (4.0 * d - 1.0) / (4.0 * d);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double gamma(double z, const ApproxConstants& k) {
  const double sgn = (z > 0.0) - (z < 0.0);
  return k.c1 * sigmoid(k.c2 * z) + k.c3 * (sgn * k.c4 + k.c5);
}

double gamma_slope(double z, const ApproxConstants& k) {
  const double s = sigmoid(k.c2 * z);
  return k.c1 * k.c2 * s * (1.0 - s);
}

double membership_h(const BoxBounds& box, std::span<const double> x, const ApproxConstants& k) {
  const std::size_t d = box.dims();
  double acc = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    acc += gamma(x[j] - box.lower[j], k);
    acc += gamma(box.upper[j] - x[j] + k.cl, k);
  }
  return gamma(acc / (2.0 * static_cast<double>(d)) - k.ch, k);
}

bool inside(const BoxBounds& box, std::span<const double> x) {
  for (std::size_t j = 0; j < box.dims(); ++j) {
    if (!(box.lower[j] <= 0.0 || x[j] > box.lower[j]) || !(x[j] <= box.upper[j])) return false;
  }
  return true;
}

ExactCounts count_exact(const BoxBounds& box, const Matrix& points, std::span<const int> labels,
                        int query_label) {
  ExactCounts c;
  c.total = points.rows();
  for (std::size_t i = 0; i < points.rows(); ++i) {
    if (!inside(box, points.row(i))) continue;
    ++c.inside;
    if (!labels.empty() && labels[i] == query_label) ++c.matching;
  }
  return c;
}

double cov_exact(const BoxBounds& box, const Matrix& points) {
  if (points.empty()) throw ArgumentError("coverage of an empty point set");
  return count_exact(box, points, {}, 0).coverage();
}

double pre_exact(const BoxBounds& box, const Matrix& points, std::span<const int> labels,
                 int query_label) {
  if (labels.size() != points.rows()) throw ArgumentError("label count does not match point count");
  const auto p = count_exact(box, points, labels, query_label).precision();
  if (!p) throw UndefinedPrecisionError();
  return *p;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 32;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

std::vector<double> memberships(const BoxBounds& box, const Matrix& points, const ApproxConstants& k) {
  if (points.empty()) throw ArgumentError("soft measure of an empty point set");
  if (points.cols() != box.dims()) throw ArgumentError("point dimension does not match the box");
  std::vector<double> h(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) h[i] = membership_h(box, points.row(i), k);
  return h;
}

}  // namespace

double cov_hat(const BoxBounds& box, const Matrix& points, const ApproxConstants& k) {
  const auto h = memberships(box, points, k);
  return pairwise_sum(h) / static_cast<double>(h.size());
}

double pre_hat(const BoxBounds& box, const Matrix& points, std::span<const int> labels,
               int query_label, const ApproxConstants& k) {
  if (labels.size() != points.rows()) throw ArgumentError("label count does not match point count");
  auto h = memberships(box, points, k);
  const double denom = pairwise_sum(h);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (labels[i] != query_label) h[i] = 0.0;
  }
  return pairwise_sum(h) / denom;
}

BoundsAudit audit_bounds(const BoxBounds& box, const Matrix& points, std::span<const int> labels,
                         int query_label, const ApproxConstants& k) {
  BoundsAudit a;
  a.dims = box.dims();
  const double d4 = 4.0 * static_cast<double>(a.dims);
  const auto counts = count_exact(box, points, labels, query_label);
  a.coverage = counts.coverage();
  a.precision = counts.precision();
  a.coverage_hat = cov_hat(box, points, k);
  a.precision_hat = pre_hat(box, points, labels, query_label, k);

  a.coverage_hypothesis = k.satisfies_coverage_bound(a.dims);
  a.coverage_lower = ((d4 - 1.0) / d4) * a.coverage;
  a.coverage_upper = 1.0 / d4 + ((d4 - 1.0) / d4) * a.coverage;
  a.coverage_holds = a.coverage_lower <= a.coverage_hat && a.coverage_hat <= a.coverage_upper;

  if (a.coverage > 0.0 && a.precision) {
    a.precision_checked = true;
    std::size_t all_matching = 0;
    for (const int y : labels) all_matching += y == query_label;
    const double base_rate = static_cast<double>(all_matching) / static_cast<double>(labels.size());
    a.precision_hypothesis = a.coverage_hypothesis && *a.precision >= base_rate;
    a.precision_upper = *a.precision * (1.0 + (1.0 / a.coverage) * (d4 / (d4 - 1.0)));
    a.precision_holds = a.precision_hat <= a.precision_upper;
  }
  return a;
}

nlohmann::json to_json(const ApproxConstants& k) {
  return {{"c1", k.c1}, {"c2", k.c2}, {"c3", k.c3}, {"c4", k.c4},
          {"c5", k.c5}, {"cl", k.cl}, {"ch", k.ch}};
}

nlohmann::json to_json(const BoundsAudit& a) {
  nlohmann::json j{
      {"dims", a.dims},
      {"coverage", a.coverage},
      {"precision", a.precision ? nlohmann::json(*a.precision) : nlohmann::json(nullptr)},
      {"coverage_hat", a.coverage_hat},
      {"precision_hat", a.precision_hat},
      {"coverage_bound",
       {{"hypothesis", a.coverage_hypothesis ? "met" : "unmet"},
        {"lower", a.coverage_lower},
        {"upper", a.coverage_upper},
        {"holds", a.coverage_holds}}},
  };
  if (a.precision_checked) {
    j["precision_bound"] = {{"hypothesis", a.precision_hypothesis ? "met" : "unmet"},
                            {"upper", a.precision_upper},
                            {"holds", a.precision_holds}};
  } else {
    j["precision_bound"] = {{"skipped", "zero coverage"}};
  }
  return j;
}

}  // namespace maire
