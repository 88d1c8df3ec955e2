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

#include "filaudit/tensor.h"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace filaudit {

Tensor::Tensor(std::vector<int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  int64_t expected = 1;
  for (int64_t dim : shape_) {
    if (dim <= 0) {
      throw std::invalid_argument("Tensor shape entries must be positive, got " +
                                  std::to_string(dim));
    }
    expected *= dim;
  }
  if (expected != static_cast<int64_t>(data_.size())) {
    throw std::invalid_argument(
        "Tensor data length " + std::to_string(data_.size()) +
        " does not match shape product " + std::to_string(expected));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("Tensor entries must be finite");
    }
  }
}

Tensor Tensor::Zeros(std::vector<int64_t> shape) {
  int64_t n = 1;
  for (int64_t dim : shape) n *= dim;
  return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
}

Tensor Tensor::FromVector(std::vector<double> values) {
  int64_t n = static_cast<int64_t>(values.size());
  return Tensor({n}, std::move(values));
}

Tensor Tensor::FromEigen(const Eigen::VectorXd& v) {
  return Tensor({v.size()}, std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>>
Tensor::AsMatrix() const {
  if (rank() != 2) {
    throw std::invalid_argument("AsMatrix requires a rank-2 tensor, got rank " +
                                std::to_string(rank()));
  }
  return {data_.data(), static_cast<Eigen::Index>(shape_[0]),
          static_cast<Eigen::Index>(shape_[1])};
}

}  // namespace filaudit
