// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace licq {

int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw std::invalid_argument("negative tensor dimension");
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<size_t>(shape_numel(shape_)), 0.0);
}

Tensor Tensor::full(std::vector<int64_t> shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::from_data(std::vector<int64_t> shape, std::vector<double> data) {
  if (shape_numel(shape) != static_cast<int64_t>(data.size()))
    throw std::invalid_argument("tensor data length does not match shape");
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(data);
  return t;
}

Tensor Tensor::reshaped(std::vector<int64_t> shape) const {
  if (shape_numel(shape) != size())
    throw std::invalid_argument("reshape changes element count");
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double Tensor::min() const {
  if (data_.empty()) throw std::invalid_argument("min of empty tensor");
  return *std::min_element(data_.begin(), data_.end());
}

double Tensor::max() const {
  if (data_.empty()) throw std::invalid_argument("max of empty tensor");
  return *std::max_element(data_.begin(), data_.end());
}

double Tensor::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

bool Tensor::bitwise_equal(const Tensor& o) const {
  if (shape_ != o.shape_) return false;
  return data_.empty() ||
         std::memcmp(data_.data(), o.data_.data(), data_.size() * sizeof(double)) == 0;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
  os << ")";
  return os.str();
}

}  // namespace licq
