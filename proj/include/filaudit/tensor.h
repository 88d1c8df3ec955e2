//
// Copyright 2026 The FilAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef FILAUDIT_TENSOR_H_
#define FILAUDIT_TENSOR_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace filaudit {

// Dense real-valued array with an explicit shape, stored flat in row-major
// order. Construction validates that the shape is positive, that the flat
// size matches the shape product, and that every entry is finite.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<int64_t> shape, std::vector<double> data);

  static Tensor Zeros(std::vector<int64_t> shape);
  static Tensor FromVector(std::vector<double> values);
  static Tensor FromEigen(const Eigen::VectorXd& v);

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& mutable_data() { return data_; }

  Eigen::Map<const Eigen::VectorXd> AsVector() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }
  Eigen::Map<Eigen::VectorXd> AsVector() {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  // Row-major matrix view; requires rank() == 2.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
  AsMatrix() const;

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

}  // namespace filaudit

#endif  // FILAUDIT_TENSOR_H_
