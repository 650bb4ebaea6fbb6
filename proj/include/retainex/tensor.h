/*
 * Copyright 2026 The RetainEX Workbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RETAINEX_TENSOR_H_
#define RETAINEX_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace retainex {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

// Dense row-major array of doubles with up to two extents. Vectors have
// shape {n}; matrices {rows, cols}.
class Tensor {
 public:
  Tensor() = default;
  // Zero-filled tensor. Every extent must be positive.
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor Vector(int n) { return Tensor({n}); }
  static Tensor Matrix(int rows, int cols) { return Tensor({rows, cols}); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int rows() const { return shape_.empty() ? 0 : shape_[0]; }
  int cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }
  std::size_t size() const { return data_.size(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols() + c];
  }

  MatrixMap AsMatrix() { return MatrixMap(data_.data(), rows(), cols()); }
  ConstMatrixMap AsMatrix() const {
    return ConstMatrixMap(data_.data(), rows(), cols());
  }
  VectorMap AsVector() {
    return VectorMap(data_.data(), static_cast<Eigen::Index>(data_.size()));
  }
  ConstVectorMap AsVector() const {
    return ConstVectorMap(data_.data(),
                          static_cast<Eigen::Index>(data_.size()));
  }

  void SetZero();
  bool AllFinite() const;
  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

}  // namespace retainex

#endif  // RETAINEX_TENSOR_H_
