// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace licq {

// Dense row-major N-d array of doubles. The whole toolkit computes in
// float64; models are small enough that memory is never the constraint and
// the gradient checks need the headroom.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int64_t> shape, double v);
  static Tensor from_data(std::vector<int64_t> shape, std::vector<double> data);
  static Tensor scalar(double v) { return full({1}, v); }

  const std::vector<int64_t>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  // (n, c, h, w) accessor for 4-d tensors.
  double& at4(int64_t n, int64_t c, int64_t h, int64_t w) {
    return data_[static_cast<size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }
  double at4(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return data_[static_cast<size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  Tensor reshaped(std::vector<int64_t> shape) const;

  void fill(double v);
  double min() const;
  double max() const;
  double sum() const;
  bool all_finite() const;
  bool bitwise_equal(const Tensor& o) const;

  std::string shape_str() const;

 private:
  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

int64_t shape_numel(const std::vector<int64_t>& shape);

}  // namespace licq
