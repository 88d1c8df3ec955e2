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

#ifndef FILAUDIT_SMOOTH_MAP_H_
#define FILAUDIT_SMOOTH_MAP_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace filaudit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// y = weight * x + bias.
struct AffineLayer {
  Matrix weight;
  Vector bias;
};

// Single-channel valid 1-d convolution: y_i = sum_j kernel_j * x_{i+j} + bias.
// Output dimension is input_dim - kernel.size() + 1.
struct Conv1dLayer {
  Vector kernel;
  double bias = 0.0;
};

struct TanhLayer {};

// Exact Gaussian-CDF form x * Phi(x), not the tanh approximation.
struct GeluLayer {};

// Non-overlapping window average; input dimension must be divisible by
// the window.
struct AvgPoolLayer {
  int window = 2;
};

// x -> x / max(1, |x| / clip_norm). Differentiable except on the sphere
// |x| = clip_norm, where the unclipped branch's Jacobian (identity) is used
// by convention.
struct ScaleClipLayer {
  double clip_norm = 1.0;
};

using Layer = std::variant<AffineLayer, Conv1dLayer, TanhLayer, GeluLayer,
                           AvgPoolLayer, ScaleClipLayer>;

// Named, flattened parameter gradients ("layer3.weight" -> flat vector).
struct ParamGradients {
  std::map<std::string, Vector> values;

  // Returns the named entry, zero-initializing it to `size` on first use.
  Vector& Ref(const std::string& name, Eigen::Index size);
  ParamGradients& operator+=(const ParamGradients& other);
  void Scale(double s);
};

// Intermediate activations retained by a forward pass so a reverse sweep can
// be run afterwards. inputs[l] is the input of layer l.
struct ForwardTrace {
  std::vector<Vector> inputs;
  Vector output;
};

// A composable, continuously differentiable map with exact input-Jacobian
// and parameter-gradient capability. Evaluation is deterministic, all
// primitives are smooth, and the map has value semantics (copies are deep).
//
// An empty layer list is the identity map on R^input_dim.
class SmoothMap {
 public:
  SmoothMap(int64_t input_dim, std::vector<Layer> layers);

  int64_t input_dim() const { return dims_.front(); }
  int64_t output_dim() const { return dims_.back(); }
  const std::vector<Layer>& layers() const { return layers_; }
  Layer& mutable_layer(size_t i) { return layers_[i]; }

  Vector Evaluate(const Vector& x) const;

  // Exact Jacobian d(output)/d(input) at x, shape output_dim x input_dim,
  // computed by forward accumulation of input tangents.
  Matrix Jacobian(const Vector& x) const;

  // J(x)^T * cotangent without materializing J.
  Vector VjpInput(const Vector& x, const Vector& cotangent) const;

  // trace(J^T J) = |J|_F^2 at x.
  double JacobianSquaredNorm(const Vector& x) const;

  // Computes |J|_F^2 at x and, if grads is non-null, accumulates
  // scale * d|J|_F^2/d(parameters) into grads. This is a second-order
  // quantity; it is exact for affine/conv/pool/tanh/gelu stacks and
  // throws std::logic_error if a scale-and-clip layer is active (clipped)
  // at x.
  double JacobianSquaredNormWithGradient(const Vector& x, double scale,
                                         ParamGradients* grads) const;

  ForwardTrace ForwardWithTrace(const Vector& x) const;

  // Reverse sweep from a cotangent on the output. Accumulates parameter
  // cotangents into grads (when non-null) and returns the input cotangent.
  Vector Backward(const ForwardTrace& trace, const Vector& output_cotangent,
                  ParamGradients* grads) const;

  std::vector<std::string> ParameterNames() const;
  int64_t ParameterCount() const;
  void ForEachParameter(
      const std::function<void(const std::string&, Eigen::Map<Vector>)>& fn);
  void ForEachParameter(
      const std::function<void(const std::string&, Eigen::Map<const Vector>)>&
          fn) const;

  // Appends `next`'s layers; next.input_dim() must equal output_dim().
  SmoothMap ComposeWith(const SmoothMap& next) const;

 private:
  std::vector<Layer> layers_;
  std::vector<int64_t> dims_;  // dims_[l] = input dim of layer l; back() = output
};

// Per-sample loss on a map output: value and gradient w.r.t. the output.
struct LossValueGrad {
  double value = 0.0;
  Vector grad;
};
using OutputLoss = std::function<LossValueGrad(const Vector& output,
                                               size_t sample_index)>;

// Mean loss over the batch and its gradient w.r.t. every parameter.
// Throws std::runtime_error if the loss is non-finite.
ParamGradients LossGradient(const SmoothMap& map,
                            const std::vector<Vector>& batch,
                            const OutputLoss& loss, double* mean_loss);

enum class Activation { kTanh, kGelu };

// MLP with the given hidden widths, an activation after every hidden affine
// layer, and a linear output layer. Weights are N(0, 1/fan_in), biases zero.
SmoothMap MakeMlp(int64_t input_dim, const std::vector<int64_t>& hidden_dims,
                  int64_t output_dim, Activation activation, uint64_t seed);

SmoothMap MakeIdentityMap(int64_t dim);
SmoothMap MakeDiagonalMap(const Vector& diagonal);
SmoothMap MakeAffineMap(Matrix weight, Vector bias);

// Affine map with i.i.d. N(0, 1) entries and zero bias.
SmoothMap MakeRandomProjection(int64_t input_dim, int64_t output_dim,
                               uint64_t seed);

// FNV-1a over the raw parameter bytes, for freeze checks.
uint64_t ParameterHash(const SmoothMap& map);

}  // namespace filaudit

#endif  // FILAUDIT_SMOOTH_MAP_H_
