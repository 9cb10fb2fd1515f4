#include "skyaug/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "skyaug/error.hpp"

namespace skyaug {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i)
    s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), values_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
  if (values_.size() != shape_numel(shape_))
    throw UsageError("tensor of shape " + shape_string(shape_) + " given " +
                     std::to_string(values_.size()) + " values");
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != numel())
    throw UsageError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  Tensor out = *this;
  out.shape_ = std::move(shape);
  return out;
}

void Tensor::fill(double v) { std::ranges::fill(values_, v); }

bool Tensor::all_finite() const noexcept {
  return std::ranges::all_of(values_, [](double v) { return std::isfinite(v); });
}

MatrixMap Tensor::matrix(std::size_t rows, std::size_t cols) {
  if (rows * cols != numel())
    throw UsageError("matrix view " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " does not fit " + shape_string(shape_));
  return MatrixMap(values_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

ConstMatrixMap Tensor::matrix(std::size_t rows, std::size_t cols) const {
  if (rows * cols != numel())
    throw UsageError("matrix view " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " does not fit " + shape_string(shape_));
  return ConstMatrixMap(values_.data(), static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(cols));
}

} // namespace skyaug
