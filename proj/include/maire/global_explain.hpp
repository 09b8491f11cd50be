#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "maire/local_explain.hpp"
#include "maire/matrix.hpp"

namespace maire {

struct CurvePoint {
  std::size_t members = 0;  // prefix length
  double coverage = 0.0;
  std::optional<double> precision;  // over covered points; unset without labels
};

struct GlobalExplanation {
  std::vector<Explanation> members;
  std::vector<std::size_t> selected;    // indices into the candidate sequence
  std::vector<std::size_t> anchor_set;  // data rows the candidates came from
  std::vector<std::size_t> gains;       // covered points added by each member (MSD only)
  std::vector<CurvePoint> curves;
};

// Greedy maximum marginal coverage on `eval_data`; stops at `budget` members
// or when no candidate adds a covered point.
GlobalExplanation msd_select(const std::vector<Explanation>& candidates, const Matrix& eval_data,
                             std::size_t budget);

// Seeded uniform subset without replacement, in shuffled order. Curves carry
// coverage on `eval_data`.
GlobalExplanation rp_select(const std::vector<Explanation>& candidates, const Matrix& eval_data,
                            std::size_t budget, std::uint64_t seed);

// Majority query label among the first `prefix` members whose box holds x;
// ties go to the smallest label; nothing when no member applies.
std::optional<int> global_predict(const GlobalExplanation& g, std::span<const double> x,
                                  std::size_t prefix);
std::optional<int> global_predict(const GlobalExplanation& g, std::span<const double> x);

// Per-prefix coverage of `data` and precision of the majority vote against
// `labels`, abstentions excluded.
std::vector<CurvePoint> evaluate_curves(const GlobalExplanation& g, const Matrix& data,
                                        std::span<const int> labels);

// `count` distinct rows out of `rows`, seeded; all rows when count >= rows.
std::vector<std::size_t> sample_anchors(std::size_t rows, std::size_t count, std::uint64_t seed);

// One local explanation per anchor row, computed on up to `threads` threads.
// The result does not depend on the thread count.
std::vector<Explanation> explain_anchors(const EncodedSpace& space, std::span<const int> labels,
                                         std::span<const std::size_t> anchors,
                                         const ExplainConfig& cfg, const ApproxConstants& k,
                                         std::size_t threads = 1);

nlohmann::json to_json(const GlobalExplanation& g);
std::string curves_csv(const std::vector<CurvePoint>& curves);

}  // namespace maire
