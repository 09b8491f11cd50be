#pragma once

#include <sys/types.h>

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "maire/matrix.hpp"

namespace maire {

// Source of black-box labels f(x) for points of the encoded space.
class PredictionProvider {
 public:
  virtual ~PredictionProvider() = default;
  virtual std::vector<int> predict(const Matrix& points) = 0;
  virtual std::string describe() const = 0;
};

// Validates the batch (dimension, label range) around provider.predict.
std::vector<int> predict_batch(PredictionProvider& provider, const Matrix& points,
                               std::size_t expected_dims);

// Labels recorded alongside a table. The table itself gets the column back
// as stored; any other point is labelled by looking it up among the rows
// (first occurrence wins), and points that are not rows are an error.
class StoredColumnProvider final : public PredictionProvider {
 public:
  StoredColumnProvider(const Matrix& rows, std::vector<int> labels);

  int label(std::size_t row) const { return labels_.at(row); }
  std::span<const int> labels() const { return labels_; }

  std::vector<int> predict(const Matrix& points) override;
  std::string describe() const override { return "stored label column"; }

 private:
  std::vector<int> labels_;
  Matrix rows_;
  std::map<std::vector<double>, int> by_row_;  // first occurrence of each row
};

struct RectangleShape {
  std::vector<double> lower;
  std::vector<double> upper;
};
struct CircleShape {
  std::vector<double> center;
  double radius = 0.0;
};
struct UnionShape {
  std::vector<RectangleShape> parts;
};
// Positive iff coordinate `axis` sits on one of `levels` (encoded positions).
struct DiscreteStripShape {
  std::size_t axis = 0;
  std::vector<double> levels;
};

struct SyntheticShape {
  std::variant<RectangleShape, CircleShape, UnionShape, DiscreteStripShape> kind;

  void validate() const;
  bool contains(std::span<const double> x) const;

  static SyntheticShape from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

class SyntheticOracle final : public PredictionProvider {
 public:
  explicit SyntheticOracle(SyntheticShape shape);

  const SyntheticShape& shape() const { return shape_; }
  int operator()(std::span<const double> x) const { return shape_.contains(x) ? 1 : 0; }

  std::vector<int> predict(const Matrix& points) override;
  std::string describe() const override { return "synthetic oracle"; }

 private:
  SyntheticShape shape_;
};

// Runs `command` through /bin/sh once and keeps it alive. Each request is one
// line holding a JSON array of points; the reply is one line holding a JSON
// array of integer labels. Not safe for concurrent use.
class ExternalCommandProvider final : public PredictionProvider {
 public:
  static constexpr std::size_t kChunkSize = 1024;

  ExternalCommandProvider(std::string command, double timeout_seconds = 30.0);
  ~ExternalCommandProvider() override;

  ExternalCommandProvider(const ExternalCommandProvider&) = delete;
  ExternalCommandProvider& operator=(const ExternalCommandProvider&) = delete;

  std::vector<int> predict(const Matrix& points) override;
  std::string describe() const override { return "external command: " + command_; }

 private:
  void start();
  void stop();
  std::string read_line(std::size_t point_index);
  void write_all(const std::string& data, std::size_t point_index);

  std::string command_;
  double timeout_seconds_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

// `count` boolean vectors; row 0 is `base` and every other entry of every
// other row is flipped independently with probability `flip_prob`.
Matrix sample_perturbations(std::span<const double> base, double flip_prob, std::size_t count,
                            std::uint64_t seed);

struct PerturbationConfig {
  double flip_prob = 0.1;
  std::size_t count = 2000;
  std::uint64_t seed = 0;
};

// Perturbation neighbourhood of a boolean query (a bag of words, a set of
// superpixels) labelled by an inner provider.
class BooleanPerturbationProvider final : public PredictionProvider {
 public:
  BooleanPerturbationProvider(std::vector<double> base, PerturbationConfig config,
                              std::shared_ptr<PredictionProvider> inner);

  const std::vector<double>& base() const { return base_; }
  Matrix samples() const;

  std::vector<int> predict(const Matrix& points) override { return inner_->predict(points); }
  std::string describe() const override { return "boolean perturbation of " + inner_->describe(); }

 private:
  std::vector<double> base_;
  PerturbationConfig config_;
  std::shared_ptr<PredictionProvider> inner_;
};

}  // namespace maire
