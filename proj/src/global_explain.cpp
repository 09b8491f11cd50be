#include "maire/global_explain.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "maire/error.hpp"

namespace maire {

namespace {

using Bits = std::vector<std::uint64_t>;

Bits cover_bits(const BoxBounds& box, const Matrix& data) {
  Bits bits((data.rows() + 63) / 64, 0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (inside(box, data.row(i))) bits[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  return bits;
}

std::size_t count_new(const Bits& candidate, const Bits& covered) {
  std::size_t n = 0;
  for (std::size_t w = 0; w < covered.size(); ++w) n += std::popcount(candidate[w] & ~covered[w]);
  return n;
}

void coverage_curve(GlobalExplanation& g, const std::vector<Bits>& bits, std::size_t rows) {
  Bits covered((rows + 63) / 64, 0);
  std::size_t total = 0;
  g.curves.clear();
  for (std::size_t m = 0; m < g.selected.size(); ++m) {
    const auto& b = bits[g.selected[m]];
    total += count_new(b, covered);
    for (std::size_t w = 0; w < covered.size(); ++w) covered[w] |= b[w];
    g.curves.push_back({m + 1, rows == 0 ? 0.0 : double(total) / double(rows), std::nullopt});
  }
}

}  // namespace

GlobalExplanation msd_select(const std::vector<Explanation>& candidates, const Matrix& eval_data,
                             std::size_t budget) {
  if (candidates.empty()) throw ArgumentError("no candidate explanations");
  if (budget < 1) throw ArgumentError("budget must be at least 1");
  std::vector<Bits> bits;
  bits.reserve(candidates.size());
  for (const auto& c : candidates) bits.push_back(cover_bits(c.bounds, eval_data));

  GlobalExplanation g;
  Bits covered((eval_data.rows() + 63) / 64, 0);
  std::vector<char> taken(candidates.size(), 0);
  while (g.selected.size() < budget) {
    std::size_t best = candidates.size();
    std::size_t best_gain = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (taken[c]) continue;
      const auto gain = count_new(bits[c], covered);
      if (gain > best_gain) {
        best = c;
        best_gain = gain;
      }
    }
    if (best_gain == 0) break;
    taken[best] = 1;
    g.selected.push_back(best);
    g.gains.push_back(best_gain);
    g.members.push_back(candidates[best]);
    for (std::size_t w = 0; w < covered.size(); ++w) covered[w] |= bits[best][w];
  }
  coverage_curve(g, bits, eval_data.rows());
  return g;
}

GlobalExplanation rp_select(const std::vector<Explanation>& candidates, const Matrix& eval_data,
                            std::size_t budget, std::uint64_t seed) {
  if (candidates.empty()) throw ArgumentError("no candidate explanations");
  if (budget < 1) throw ArgumentError("budget must be at least 1");
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(budget, order.size()));

  GlobalExplanation g;
  g.selected = order;
  for (const auto c : order) g.members.push_back(candidates[c]);
  std::vector<Bits> bits(candidates.size());
  for (const auto c : order) bits[c] = cover_bits(candidates[c].bounds, eval_data);
  coverage_curve(g, bits, eval_data.rows());
  return g;
}

std::optional<int> global_predict(const GlobalExplanation& g, std::span<const double> x,
                                  std::size_t prefix) {
  std::map<int, std::size_t> votes;
  const std::size_t n = std::min(prefix, g.members.size());
  for (std::size_t m = 0; m < n; ++m) {
    if (inside(g.members[m].bounds, x)) ++votes[g.members[m].query_label];
  }
  if (votes.empty()) return std::nullopt;
  // std::map iterates labels in increasing order, so the first maximum wins.
  auto best = votes.begin();
  for (auto it = votes.begin(); it != votes.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

std::optional<int> global_predict(const GlobalExplanation& g, std::span<const double> x) {
  return global_predict(g, x, g.members.size());
}

std::vector<CurvePoint> evaluate_curves(const GlobalExplanation& g, const Matrix& data,
                                        std::span<const int> labels) {
  if (labels.size() != data.rows()) throw ArgumentError("label count does not match data rows");
  std::vector<CurvePoint> curves;
  for (std::size_t m = 1; m <= g.members.size(); ++m) {
    std::size_t covered = 0, correct = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      const auto p = global_predict(g, data.row(i), m);
      if (!p) continue;
      ++covered;
      if (*p == labels[i]) ++correct;
    }
    CurvePoint pt{m, data.rows() == 0 ? 0.0 : double(covered) / double(data.rows()), std::nullopt};
    if (covered) pt.precision = double(correct) / double(covered);
    curves.push_back(pt);
  }
  return curves;
}

std::vector<std::size_t> sample_anchors(std::size_t rows, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> all(rows);
  std::iota(all.begin(), all.end(), 0);
  if (count >= rows) return all;
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<Explanation> explain_anchors(const EncodedSpace& space, std::span<const int> labels,
                                         std::span<const std::size_t> anchors,
                                         const ExplainConfig& cfg, const ApproxConstants& k,
                                         std::size_t threads) {
  std::vector<Explanation> out(anchors.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t t = next++; t < anchors.size(); t = next++) {
      try {
        const auto row = anchors[t];
        out[t] = explain(space.matrix().row(row), labels[row], space, labels, cfg, k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(anchors.size(), 1));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

nlohmann::json to_json(const GlobalExplanation& g) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : g.members) members.push_back(to_json(m));
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& c : g.curves) {
    curves.push_back({{"members", c.members},
                      {"coverage", c.coverage},
                      {"precision", c.precision ? nlohmann::json(*c.precision) : nlohmann::json(nullptr)}});
  }
  return {{"members", std::move(members)},
          {"selected", g.selected},
          {"anchor_set", g.anchor_set},
          {"gains", g.gains},
          {"curves", std::move(curves)}};
}

std::string curves_csv(const std::vector<CurvePoint>& curves) {
  std::string out = "members,coverage,precision\n";
  for (const auto& c : curves) {
    out += fmt::format("{},{:.6f},{}\n", c.members, c.coverage,
                       c.precision ? fmt::format("{:.6f}", *c.precision) : std::string());
  }
  return out;
}

}  // namespace maire
