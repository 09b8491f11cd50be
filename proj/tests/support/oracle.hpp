#pragma once

// Reference implementations kept apart from the library code they check.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace oracle {

struct Counts {
  std::size_t inside = 0;
  std::size_t matching = 0;
};

// Per axis: a lower bound at or below zero is open, otherwise l < x; always x <= u.
inline Counts brute_force_counts(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                                 const std::vector<double>& l, const std::vector<double>& u, int query_label) {
  Counts c;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    bool in = true;
    for (std::size_t j = 0; j < l.size(); ++j) {
      const double x = rows[i][j];
      const bool above = l[j] <= 0.0 ? true : x > l[j];
      if (!above || x > u[j]) {
        in = false;
        break;
      }
    }
    if (in) {
      ++c.inside;
      if (labels[i] == query_label) ++c.matching;
    }
  }
  return c;
}

// Soft indicator in long double with the step term written out by cases.
inline long double gamma_ld(long double z, long double c1, long double c2) {
  const long double s = 1.0L / (1.0L + std::exp(-c2 * z));
  if (z > 0) return c1 * s + (1.0L - c1);
  if (z < 0) return c1 * s;
  return c1 * s + (1.0L - c1) * 0.5L;
}

inline long double h_ld(const std::vector<double>& l, const std::vector<double>& u, const std::vector<double>& x,
                        long double c1, long double c2, long double cl, long double ch) {
  long double m = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    m += gamma_ld(static_cast<long double>(x[j]) - l[j], c1, c2);
    m += gamma_ld(static_cast<long double>(u[j]) - x[j] + cl, c1, c2);
  }
  m /= 2.0L * static_cast<long double>(x.size());
  return gamma_ld(m - ch, c1, c2);
}

inline std::vector<std::vector<double>> random_rows(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& r : rows) {
    for (auto& v : r) v = unit(rng);
  }
  return rows;
}

}  // namespace oracle
