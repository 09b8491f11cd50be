#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace maire {

// Dense row-major N x D matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const {
    assert(i < rows_);
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) {
    assert(i < rows_);
    return {data_.data() + i * cols_, cols_};
  }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  void append_row(std::span<const double> values) {
    assert(rows_ == 0 || values.size() == cols_);
    if (rows_ == 0) cols_ = values.size();
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace maire
