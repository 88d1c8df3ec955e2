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

#include "filaudit/smooth_map.h"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <utility>

#include "filaudit/rng.h"

namespace filaudit {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double GeluPhi(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double GeluPdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// First and second derivatives of the elementwise activations, evaluated
// from the pre-activation value.
double TanhD1(double z) {
  const double h = std::tanh(z);
  return 1.0 - h * h;
}
double TanhD2(double z) {
  const double h = std::tanh(z);
  return -2.0 * h * (1.0 - h * h);
}
double GeluD1(double z) { return GeluPhi(z) + z * GeluPdf(z); }
double GeluD2(double z) { return (2.0 - z * z) * GeluPdf(z); }

int64_t LayerOutputDim(const Layer& layer, int64_t in_dim) {
  return std::visit(
      Overloaded{
          [&](const AffineLayer& l) -> int64_t {
            if (l.weight.cols() != in_dim) {
              throw std::invalid_argument(
                  "affine layer expects input dim " +
                  std::to_string(l.weight.cols()) + ", got " +
                  std::to_string(in_dim));
            }
            if (l.bias.size() != l.weight.rows()) {
              throw std::invalid_argument("affine bias size mismatch");
            }
            return l.weight.rows();
          },
          [&](const Conv1dLayer& l) -> int64_t {
            if (l.kernel.size() < 1 || l.kernel.size() > in_dim) {
              throw std::invalid_argument("conv1d kernel size out of range");
            }
            return in_dim - l.kernel.size() + 1;
          },
          [&](const TanhLayer&) -> int64_t { return in_dim; },
          [&](const GeluLayer&) -> int64_t { return in_dim; },
          [&](const AvgPoolLayer& l) -> int64_t {
            if (l.window < 1 || in_dim % l.window != 0) {
              throw std::invalid_argument(
                  "avg-pool window must divide the input dimension");
            }
            return in_dim / l.window;
          },
          [&](const ScaleClipLayer& l) -> int64_t {
            if (!(l.clip_norm > 0.0)) {
              throw std::invalid_argument("scale-clip norm must be positive");
            }
            return in_dim;
          },
      },
      layer);
}

Vector LayerForward(const Layer& layer, const Vector& x) {
  return std::visit(
      Overloaded{
          [&](const AffineLayer& l) -> Vector { return l.weight * x + l.bias; },
          [&](const Conv1dLayer& l) -> Vector {
            const Eigen::Index m = l.kernel.size();
            Vector y(x.size() - m + 1);
            for (Eigen::Index i = 0; i < y.size(); ++i) {
              y[i] = l.kernel.dot(x.segment(i, m)) + l.bias;
            }
            return y;
          },
          [&](const TanhLayer&) -> Vector { return x.array().tanh(); },
          [&](const GeluLayer&) -> Vector {
            return x.unaryExpr([](double z) { return z * GeluPhi(z); });
          },
          [&](const AvgPoolLayer& l) -> Vector {
            Vector y(x.size() / l.window);
            for (Eigen::Index j = 0; j < y.size(); ++j) {
              y[j] = x.segment(j * l.window, l.window).mean();
            }
            return y;
          },
          [&](const ScaleClipLayer& l) -> Vector {
            const double r = x.norm();
            if (r <= l.clip_norm) return x;
            return (l.clip_norm / r) * x;
          },
      },
      layer);
}

// A(x) * U, where A is the layer's local Jacobian at input x and U carries
// one tangent per column.
Matrix LayerJvpMat(const Layer& layer, const Vector& x, const Matrix& u) {
  return std::visit(
      Overloaded{
          [&](const AffineLayer& l) -> Matrix { return l.weight * u; },
          [&](const Conv1dLayer& l) -> Matrix {
            const Eigen::Index m = l.kernel.size();
            Matrix out(x.size() - m + 1, u.cols());
            for (Eigen::Index i = 0; i < out.rows(); ++i) {
              out.row(i) = l.kernel.transpose() * u.middleRows(i, m);
            }
            return out;
          },
          [&](const TanhLayer&) -> Matrix {
            return x.unaryExpr(&TanhD1).asDiagonal() * u;
          },
          [&](const GeluLayer&) -> Matrix {
            return x.unaryExpr(&GeluD1).asDiagonal() * u;
          },
          [&](const AvgPoolLayer& l) -> Matrix {
            Matrix out(x.size() / l.window, u.cols());
            for (Eigen::Index j = 0; j < out.rows(); ++j) {
              out.row(j) = u.middleRows(j * l.window, l.window).colwise().mean();
            }
            return out;
          },
          [&](const ScaleClipLayer& l) -> Matrix {
            const double r = x.norm();
            if (r <= l.clip_norm) return u;
            const Vector unit = x / r;
            return (l.clip_norm / r) *
                   (u - unit * (unit.transpose() * u)).eval();
          },
      },
      layer);
}

// A(x)^T * U for a matrix of cotangent columns.
Matrix LayerVjpMat(const Layer& layer, const Vector& x, const Matrix& u) {
  return std::visit(
      Overloaded{
          [&](const AffineLayer& l) -> Matrix {
            return l.weight.transpose() * u;
          },
          [&](const Conv1dLayer& l) -> Matrix {
            const Eigen::Index m = l.kernel.size();
            Matrix out = Matrix::Zero(x.size(), u.cols());
            for (Eigen::Index i = 0; i < u.rows(); ++i) {
              out.middleRows(i, m).noalias() += l.kernel * u.row(i);
            }
            return out;
          },
          [&](const TanhLayer&) -> Matrix {
            return x.unaryExpr(&TanhD1).asDiagonal() * u;
          },
          [&](const GeluLayer&) -> Matrix {
            return x.unaryExpr(&GeluD1).asDiagonal() * u;
          },
          [&](const AvgPoolLayer& l) -> Matrix {
            Matrix out(x.size(), u.cols());
            for (Eigen::Index j = 0; j < u.rows(); ++j) {
              out.middleRows(j * l.window, l.window) =
                  (1.0 / l.window) * u.row(j).replicate(l.window, 1);
            }
            return out;
          },
          [&](const ScaleClipLayer& l) -> Matrix {
            // The local Jacobian is symmetric on both branches.
            return LayerJvpMat(layer, x, u);
          },
      },
      layer);
}

Vector LayerVjp(const Layer& layer, const Vector& x, const Vector& u) {
  return LayerVjpMat(layer, x, u);
}

// Accumulates the parameter cotangent u^T dA... i.e. the first-order
// parameter gradients of <u, layer(x)>.
void LayerVjpParams(const Layer& layer, const Vector& x, const Vector& u,
                    const std::string& prefix, ParamGradients* grads) {
  std::visit(
      Overloaded{
          [&](const AffineLayer& l) {
            Vector& w = grads->Ref(prefix + ".weight", l.weight.size());
            Eigen::Map<Matrix>(w.data(), l.weight.rows(), l.weight.cols())
                .noalias() += u * x.transpose();
            grads->Ref(prefix + ".bias", l.bias.size()) += u;
          },
          [&](const Conv1dLayer& l) {
            const Eigen::Index m = l.kernel.size();
            Vector& k = grads->Ref(prefix + ".kernel", m);
            for (Eigen::Index i = 0; i < u.size(); ++i) {
              k += u[i] * x.segment(i, m);
            }
            grads->Ref(prefix + ".bias", 1)[0] += u.sum();
          },
          [](const auto&) {},
      },
      layer);
}

// Parameter gradients flowing through the tangent propagation U_out = A U_in,
// i.e. d<Ubar, A(theta) U_in>/d(theta) for parameters A depends on directly.
void LayerTangentParams(const Layer& layer, const Vector& x, const Matrix& u_in,
                        const Matrix& ubar_out, const std::string& prefix,
                        ParamGradients* grads) {
  std::visit(
      Overloaded{
          [&](const AffineLayer& l) {
            Vector& w = grads->Ref(prefix + ".weight", l.weight.size());
            Eigen::Map<Matrix>(w.data(), l.weight.rows(), l.weight.cols())
                .noalias() += ubar_out * u_in.transpose();
          },
          [&](const Conv1dLayer& l) {
            const Eigen::Index m = l.kernel.size();
            Vector& k = grads->Ref(prefix + ".kernel", m);
            for (Eigen::Index i = 0; i < ubar_out.rows(); ++i) {
              for (Eigen::Index j = 0; j < m; ++j) {
                k[j] += ubar_out.row(i).dot(u_in.row(i + j));
              }
            }
          },
          [](const auto&) {},
      },
      layer);
}

// Input cotangent contribution from A(x)'s dependence on x in the tangent
// path: d<Ubar, A(x) U_in>/dx. Zero for layers whose Jacobian is constant.
Vector LayerTangentZbar(const Layer& layer, const Vector& x, const Matrix& u_in,
                        const Matrix& ubar_out) {
  return std::visit(
      Overloaded{
          [&](const TanhLayer&) -> Vector {
            Vector z(x.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) {
              z[i] = TanhD2(x[i]) * ubar_out.row(i).dot(u_in.row(i));
            }
            return z;
          },
          [&](const GeluLayer&) -> Vector {
            Vector z(x.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) {
              z[i] = GeluD2(x[i]) * ubar_out.row(i).dot(u_in.row(i));
            }
            return z;
          },
          [&](const ScaleClipLayer& l) -> Vector {
            if (x.norm() > l.clip_norm) {
              throw std::logic_error(
                  "Jacobian-norm gradient is not supported through an active "
                  "scale-and-clip layer");
            }
            return Vector::Zero(x.size());
          },
          [&](const auto&) -> Vector { return Vector::Zero(x.size()); },
      },
      layer);
}

struct ParamView {
  std::string name;
  double* data;
  Eigen::Index size;
};

std::vector<ParamView> LayerParams(Layer& layer, const std::string& prefix) {
  return std::visit(
      Overloaded{
          [&](AffineLayer& l) -> std::vector<ParamView> {
            return {{prefix + ".weight", l.weight.data(), l.weight.size()},
                    {prefix + ".bias", l.bias.data(), l.bias.size()}};
          },
          [&](Conv1dLayer& l) -> std::vector<ParamView> {
            return {{prefix + ".kernel", l.kernel.data(), l.kernel.size()},
                    {prefix + ".bias", &l.bias, 1}};
          },
          [](auto&) -> std::vector<ParamView> { return {}; },
      },
      layer);
}

std::string LayerPrefix(size_t index) {
  return "layer" + std::to_string(index);
}

}  // namespace

Vector& ParamGradients::Ref(const std::string& name, Eigen::Index size) {
  auto it = values.find(name);
  if (it == values.end()) {
    it = values.emplace(name, Vector::Zero(size)).first;
  }
  return it->second;
}

ParamGradients& ParamGradients::operator+=(const ParamGradients& other) {
  for (const auto& [name, g] : other.values) {
    Ref(name, g.size()) += g;
  }
  return *this;
}

void ParamGradients::Scale(double s) {
  for (auto& [name, g] : values) g *= s;
}

SmoothMap::SmoothMap(int64_t input_dim, std::vector<Layer> layers)
    : layers_(std::move(layers)) {
  if (input_dim <= 0) {
    throw std::invalid_argument("input dimension must be positive");
  }
  dims_.reserve(layers_.size() + 1);
  dims_.push_back(input_dim);
  for (const Layer& layer : layers_) {
    dims_.push_back(LayerOutputDim(layer, dims_.back()));
  }
}

Vector SmoothMap::Evaluate(const Vector& x) const {
  if (x.size() != input_dim()) {
    throw std::invalid_argument("Evaluate: expected input dim " +
                                std::to_string(input_dim()) + ", got " +
                                std::to_string(x.size()));
  }
  Vector z = x;
  for (const Layer& layer : layers_) z = LayerForward(layer, z);
  return z;
}

Matrix SmoothMap::Jacobian(const Vector& x) const {
  if (x.size() != input_dim()) {
    throw std::invalid_argument("Jacobian: input dimension mismatch");
  }
  Matrix u;
  Vector z = x;
  size_t first = 0;
  if (!layers_.empty() && std::holds_alternative<AffineLayer>(layers_.front())) {
    // A leading affine layer's local Jacobian is its weight; skip the
    // identity-tangent product.
    u = std::get<AffineLayer>(layers_.front()).weight;
    z = LayerForward(layers_.front(), z);
    first = 1;
  } else {
    u = Matrix::Identity(input_dim(), input_dim());
  }
  for (size_t l = first; l < layers_.size(); ++l) {
    u = LayerJvpMat(layers_[l], z, u);
    z = LayerForward(layers_[l], z);
  }
  return u;
}

Vector SmoothMap::VjpInput(const Vector& x, const Vector& cotangent) const {
  ForwardTrace trace = ForwardWithTrace(x);
  return Backward(trace, cotangent, nullptr);
}

double SmoothMap::JacobianSquaredNorm(const Vector& x) const {
  return Jacobian(x).squaredNorm();
}

double SmoothMap::JacobianSquaredNormWithGradient(const Vector& x, double scale,
                                                  ParamGradients* grads) const {
  if (x.size() != input_dim()) {
    throw std::invalid_argument("JacobianSquaredNorm: input dim mismatch");
  }
  const size_t n_layers = layers_.size();
  std::vector<Vector> zs(n_layers + 1);
  std::vector<Matrix> us(n_layers + 1);
  zs[0] = x;
  us[0] = Matrix::Identity(input_dim(), input_dim());
  for (size_t l = 0; l < n_layers; ++l) {
    us[l + 1] = LayerJvpMat(layers_[l], zs[l], us[l]);
    zs[l + 1] = LayerForward(layers_[l], zs[l]);
  }
  const double value = us[n_layers].squaredNorm();
  if (grads == nullptr) return value;

  Matrix ubar = 2.0 * scale * us[n_layers];
  Vector zbar = Vector::Zero(output_dim());
  for (size_t l = n_layers; l-- > 0;) {
    const Layer& layer = layers_[l];
    const std::string prefix = LayerPrefix(l);
    LayerVjpParams(layer, zs[l], zbar, prefix, grads);
    LayerTangentParams(layer, zs[l], us[l], ubar, prefix, grads);
    Vector zbar_in = LayerVjp(layer, zs[l], zbar) +
                     LayerTangentZbar(layer, zs[l], us[l], ubar);
    ubar = LayerVjpMat(layer, zs[l], ubar);
    zbar = std::move(zbar_in);
  }
  return value;
}

ForwardTrace SmoothMap::ForwardWithTrace(const Vector& x) const {
  if (x.size() != input_dim()) {
    throw std::invalid_argument("ForwardWithTrace: input dim mismatch");
  }
  ForwardTrace trace;
  trace.inputs.reserve(layers_.size());
  Vector z = x;
  for (const Layer& layer : layers_) {
    trace.inputs.push_back(z);
    z = LayerForward(layer, z);
  }
  trace.output = std::move(z);
  return trace;
}

Vector SmoothMap::Backward(const ForwardTrace& trace,
                           const Vector& output_cotangent,
                           ParamGradients* grads) const {
  if (output_cotangent.size() != output_dim()) {
    throw std::invalid_argument("Backward: cotangent dimension mismatch");
  }
  Vector u = output_cotangent;
  for (size_t l = layers_.size(); l-- > 0;) {
    if (grads != nullptr) {
      LayerVjpParams(layers_[l], trace.inputs[l], u, LayerPrefix(l), grads);
    }
    u = LayerVjp(layers_[l], trace.inputs[l], u);
  }
  return u;
}

std::vector<std::string> SmoothMap::ParameterNames() const {
  std::vector<std::string> names;
  auto& self = const_cast<SmoothMap&>(*this);
  for (size_t i = 0; i < self.layers_.size(); ++i) {
    for (const ParamView& p : LayerParams(self.layers_[i], LayerPrefix(i))) {
      names.push_back(p.name);
    }
  }
  return names;
}

int64_t SmoothMap::ParameterCount() const {
  int64_t n = 0;
  auto& self = const_cast<SmoothMap&>(*this);
  for (size_t i = 0; i < self.layers_.size(); ++i) {
    for (const ParamView& p : LayerParams(self.layers_[i], LayerPrefix(i))) {
      n += p.size;
    }
  }
  return n;
}

void SmoothMap::ForEachParameter(
    const std::function<void(const std::string&, Eigen::Map<Vector>)>& fn) {
  for (size_t i = 0; i < layers_.size(); ++i) {
    for (const ParamView& p : LayerParams(layers_[i], LayerPrefix(i))) {
      fn(p.name, Eigen::Map<Vector>(p.data, p.size));
    }
  }
}

void SmoothMap::ForEachParameter(
    const std::function<void(const std::string&, Eigen::Map<const Vector>)>& fn)
    const {
  auto& self = const_cast<SmoothMap&>(*this);
  for (size_t i = 0; i < self.layers_.size(); ++i) {
    for (const ParamView& p : LayerParams(self.layers_[i], LayerPrefix(i))) {
      fn(p.name, Eigen::Map<const Vector>(p.data, p.size));
    }
  }
}

SmoothMap SmoothMap::ComposeWith(const SmoothMap& next) const {
  if (next.input_dim() != output_dim()) {
    throw std::invalid_argument("ComposeWith: dimension mismatch");
  }
  std::vector<Layer> combined = layers_;
  combined.insert(combined.end(), next.layers_.begin(), next.layers_.end());
  return SmoothMap(input_dim(), std::move(combined));
}

ParamGradients LossGradient(const SmoothMap& map,
                            const std::vector<Vector>& batch,
                            const OutputLoss& loss, double* mean_loss) {
  if (batch.empty()) {
    throw std::invalid_argument("LossGradient: empty batch");
  }
  ParamGradients grads;
  double total = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    ForwardTrace trace = map.ForwardWithTrace(batch[i]);
    LossValueGrad lv = loss(trace.output, i);
    if (!std::isfinite(lv.value)) {
      throw std::runtime_error("LossGradient: non-finite loss value");
    }
    total += lv.value;
    map.Backward(trace, lv.grad, &grads);
  }
  grads.Scale(1.0 / static_cast<double>(batch.size()));
  if (mean_loss != nullptr) *mean_loss = total / static_cast<double>(batch.size());
  return grads;
}

SmoothMap MakeMlp(int64_t input_dim, const std::vector<int64_t>& hidden_dims,
                  int64_t output_dim, Activation activation, uint64_t seed) {
  std::mt19937_64 rng = MakeRng(seed);
  std::normal_distribution<double> normal;
  std::vector<Layer> layers;
  int64_t in = input_dim;
  auto add_affine = [&](int64_t out) {
    Matrix w(out, in);
    const double std_dev = 1.0 / std::sqrt(static_cast<double>(in));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = std_dev * normal(rng);
      }
    }
    layers.push_back(AffineLayer{std::move(w), Vector::Zero(out)});
    in = out;
  };
  for (int64_t h : hidden_dims) {
    add_affine(h);
    if (activation == Activation::kTanh) {
      layers.push_back(TanhLayer{});
    } else {
      layers.push_back(GeluLayer{});
    }
  }
  add_affine(output_dim);
  return SmoothMap(input_dim, std::move(layers));
}

SmoothMap MakeIdentityMap(int64_t dim) { return SmoothMap(dim, {}); }

SmoothMap MakeDiagonalMap(const Vector& diagonal) {
  Matrix w = diagonal.asDiagonal();
  return MakeAffineMap(std::move(w), Vector::Zero(diagonal.size()));
}

SmoothMap MakeAffineMap(Matrix weight, Vector bias) {
  const int64_t in = weight.cols();
  std::vector<Layer> layers;
  layers.push_back(AffineLayer{std::move(weight), std::move(bias)});
  return SmoothMap(in, std::move(layers));
}

SmoothMap MakeRandomProjection(int64_t input_dim, int64_t output_dim,
                               uint64_t seed) {
  std::mt19937_64 rng = MakeRng(seed);
  std::normal_distribution<double> normal;
  Matrix w(output_dim, input_dim);
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      w(r, c) = normal(rng);
    }
  }
  return MakeAffineMap(std::move(w), Vector::Zero(output_dim));
}

uint64_t ParameterHash(const SmoothMap& map) {
  uint64_t hash = 14695981039346656037ULL;
  map.ForEachParameter(
      [&hash](const std::string&, Eigen::Map<const Vector> value) {
        for (Eigen::Index i = 0; i < value.size(); ++i) {
          const double entry = value[i];
          uint64_t bits;
          std::memcpy(&bits, &entry, sizeof(bits));
          for (int b = 0; b < 8; ++b) {
            hash ^= (bits >> (8 * b)) & 0xffULL;
            hash *= 1099511628211ULL;
          }
        }
      });
  return hash;
}

}  // namespace filaudit
