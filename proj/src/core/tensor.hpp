#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace attnfc {

/// Dense row-major array of doubles. The shape is a list of dimension
/// sizes; rank 1 and 2 are what the model uses, but nothing here assumes it.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);  // zero-filled
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double value);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor identity(std::size_t n);
  static Tensor scalar(double value);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  /// Rows/cols of a rank-2 tensor; a rank-1 tensor counts as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  /// "[2x3]" style rendering for error messages.
  std::string shape_str() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// Throws DimensionError naming both shapes unless they match.
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace attnfc
