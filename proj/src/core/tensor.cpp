#include "core/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "core/errors.hpp"

namespace attnfc {

namespace {
std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != data_.size()) {
    throw DimensionError("tensor: shape " + shape_str() + " does not cover " +
                         std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  Tensor t(std::move(shape));
  for (double& x : t.data_) x = value;
  return t;
}

Tensor Tensor::vector(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

std::size_t Tensor::rows() const { return rank() == 2 ? shape_[0] : 1; }

std::size_t Tensor::cols() const {
  if (rank() == 2) return shape_[1];
  if (rank() == 1) return shape_[0];
  return size();
}

double& Tensor::at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }

double Tensor::at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

bool Tensor::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) out << 'x';
    out << shape_[i];
  }
  out << ']';
  return out.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
  }
}

}  // namespace attnfc
