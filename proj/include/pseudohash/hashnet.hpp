#ifndef PSEUDOHASH_HASHNET_HPP
#define PSEUDOHASH_HASHNET_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pseudohash {

enum class Activation : std::uint8_t { identity = 0, relu = 1 };

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One fully connected layer: out = act(weight * in + bias), weight is out x in.
template <typename Scalar>
struct DenseLayer {
  Matrix<Scalar> weight;
  Vector<Scalar> bias;
  Activation activation = Activation::relu;
};

/// Feature network followed by the linear hashing layer u = hash_weightᵀ F(x) + hash_bias.
///
/// hash_weight is f x k where f is the output width of the feature network
/// (the input width d when there are no feature layers).
template <typename Scalar>
struct HashModel {
  std::vector<DenseLayer<Scalar>> feature_layers;
  Matrix<Scalar> hash_weight;
  Vector<Scalar> hash_bias;
  std::int64_t seed = 0;

  Eigen::Index input_dim() const {
    return feature_layers.empty() ? hash_weight.rows() : feature_layers.front().weight.cols();
  }
  Eigen::Index feature_dim() const { return hash_weight.rows(); }
  Eigen::Index code_length() const { return hash_weight.cols(); }

  std::vector<Eigen::Index> hidden_dims() const {
    std::vector<Eigen::Index> dims;
    for (const auto& layer : feature_layers) dims.push_back(layer.weight.rows());
    return dims;
  }

  /// Throws std::invalid_argument when shapes do not chain or a parameter is not finite.
  void validate() const {
    Eigen::Index width = input_dim();
    if (width < 1 || code_length() < 1) throw std::invalid_argument("hash model: empty dimensions");
    for (std::size_t t = 0; t < feature_layers.size(); ++t) {
      const auto& layer = feature_layers[t];
      if (layer.weight.cols() != width || layer.bias.size() != layer.weight.rows()) {
        throw std::invalid_argument("hash model: feature layer " + std::to_string(t) +
                                    " does not chain with its input");
      }
      if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
        throw std::invalid_argument("hash model: non-finite parameter in layer " + std::to_string(t));
      }
      width = layer.weight.rows();
    }
    if (hash_weight.rows() != width || hash_bias.size() != hash_weight.cols()) {
      throw std::invalid_argument("hash model: hashing layer shape mismatch");
    }
    if (!hash_weight.allFinite() || !hash_bias.allFinite()) {
      throw std::invalid_argument("hash model: non-finite hashing-layer parameter");
    }
  }
};

/// Gradients share the model's layout.
template <typename Scalar>
using ModelGradient = HashModel<Scalar>;

/// Intermediates of one batch forward pass; rows are items.
template <typename Scalar>
struct ForwardTrace {
  Matrix<Scalar> input;
  std::vector<Matrix<Scalar>> pre_activations;
  std::vector<Matrix<Scalar>> activations;
  Matrix<Scalar> u;

  const Matrix<Scalar>& features() const { return activations.empty() ? input : activations.back(); }
};

/// Calls fn on each parameter block in declaration order:
/// layer weights and biases front to back, then hash_weight, then hash_bias.
template <typename Model, typename Fn>
void visit_parameters(Model& model, Fn&& fn) {
  for (auto& layer : model.feature_layers) {
    fn(layer.weight);
    fn(layer.bias);
  }
  fn(model.hash_weight);
  fn(model.hash_bias);
}

/// Visits matching blocks of two same-shaped models.
template <typename ModelA, typename ModelB, typename Fn>
void visit_parameter_pairs(ModelA& a, ModelB& b, Fn&& fn) {
  for (std::size_t t = 0; t < a.feature_layers.size(); ++t) {
    fn(a.feature_layers[t].weight, b.feature_layers[t].weight);
    fn(a.feature_layers[t].bias, b.feature_layers[t].bias);
  }
  fn(a.hash_weight, b.hash_weight);
  fn(a.hash_bias, b.hash_bias);
}

template <typename Scalar>
Eigen::Index parameter_count(const HashModel<Scalar>& model) {
  Eigen::Index count = 0;
  visit_parameters(model, [&](const auto& block) { count += block.size(); });
  return count;
}

/// Seeded zero-mean Gaussian weights with standard deviation 1/sqrt(fan_in); zero biases.
template <typename Scalar = double>
HashModel<Scalar> init_model(Eigen::Index input_dim, const std::vector<Eigen::Index>& hidden_dims,
                             Eigen::Index code_length, std::int64_t seed) {
  if (input_dim < 1) throw std::invalid_argument("init_model: input dimension must be positive");
  if (code_length < 1) throw std::invalid_argument("init_model: code length must be positive");
  for (auto h : hidden_dims) {
    if (h < 1) throw std::invalid_argument("init_model: hidden dimensions must be positive");
  }

  std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in) {
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    Matrix<Scalar> m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = static_cast<Scalar>(dist(rng));
    }
    return m;
  };

  HashModel<Scalar> model;
  model.seed = seed;
  Eigen::Index width = input_dim;
  for (auto h : hidden_dims) {
    DenseLayer<Scalar> layer;
    layer.weight = gaussian(h, width, width);
    layer.bias = Vector<Scalar>::Zero(h);
    layer.activation = Activation::relu;
    model.feature_layers.push_back(std::move(layer));
    width = h;
  }
  model.hash_weight = gaussian(width, code_length, width);
  model.hash_bias = Vector<Scalar>::Zero(code_length);
  return model;
}

template <typename Scalar, typename Derived>
ForwardTrace<Scalar> forward(const HashModel<Scalar>& model, const Eigen::MatrixBase<Derived>& batch) {
  if (batch.cols() != model.input_dim()) {
    throw std::invalid_argument("forward: feature dimension " + std::to_string(batch.cols()) +
                                " does not match model input " + std::to_string(model.input_dim()));
  }
  ForwardTrace<Scalar> trace;
  trace.input = batch.template cast<Scalar>();
  const Matrix<Scalar>* current = &trace.input;
  trace.pre_activations.reserve(model.feature_layers.size());
  trace.activations.reserve(model.feature_layers.size());
  for (const auto& layer : model.feature_layers) {
    Matrix<Scalar> z = (*current) * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    trace.pre_activations.push_back(z);
    if (layer.activation == Activation::relu) {
      trace.activations.push_back(z.cwiseMax(Scalar(0)));
    } else {
      trace.activations.push_back(std::move(z));
    }
    current = &trace.activations.back();
  }
  trace.u = (*current) * model.hash_weight;
  trace.u.rowwise() += model.hash_bias.transpose();
  return trace;
}

/// Elementwise sign with sgn(t) = +1 for t > 0 and -1 otherwise (including t = 0).
template <typename Derived>
auto sign_codes(const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  return u.unaryExpr([](Scalar t) { return t > Scalar(0) ? Scalar(1) : Scalar(-1); }).eval();
}

/// Binary codes of a batch of feature rows, one ±1 row per item.
template <typename Scalar, typename Derived>
Matrix<Scalar> encode_batch(const HashModel<Scalar>& model, const Eigen::MatrixBase<Derived>& batch) {
  return sign_codes(forward(model, batch).u);
}

template <typename Scalar, typename Derived>
Vector<Scalar> encode(const HashModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != 1 && x.rows() != 1) throw std::invalid_argument("encode: expected a single feature vector");
  Matrix<Scalar> row = x.template cast<Scalar>();
  if (row.cols() == 1) row.transposeInPlace();
  return encode_batch(model, row).row(0).transpose();
}

/// Backpropagates dL/du (batch x k) through the hashing layer and the feature network.
/// Gradients are summed over the batch. ReLU has subgradient 0 at 0.
template <typename Scalar, typename Derived>
ModelGradient<Scalar> backward(const HashModel<Scalar>& model, const ForwardTrace<Scalar>& trace,
                               const Eigen::MatrixBase<Derived>& grad_u) {
  if (grad_u.rows() != trace.u.rows() || grad_u.cols() != trace.u.cols()) {
    throw std::invalid_argument("backward: gradient shape does not match the forward trace");
  }
  if (trace.u.cols() != model.code_length() ||
      trace.pre_activations.size() != model.feature_layers.size() ||
      trace.input.cols() != model.input_dim()) {
    throw std::invalid_argument("backward: trace was not produced by this model");
  }

  ModelGradient<Scalar> grad;
  grad.seed = model.seed;
  grad.feature_layers.resize(model.feature_layers.size());
  const Matrix<Scalar> du = grad_u.template cast<Scalar>();

  grad.hash_weight = trace.features().transpose() * du;
  grad.hash_bias = du.colwise().sum().transpose();
  Matrix<Scalar> upstream = du * model.hash_weight.transpose();

  for (std::size_t t = model.feature_layers.size(); t-- > 0;) {
    const auto& layer = model.feature_layers[t];
    Matrix<Scalar> dz = upstream;
    if (layer.activation == Activation::relu) {
      dz = (trace.pre_activations[t].array() > Scalar(0)).select(upstream, Scalar(0));
    }
    const Matrix<Scalar>& below = t == 0 ? trace.input : trace.activations[t - 1];
    auto& g = grad.feature_layers[t];
    g.activation = layer.activation;
    g.weight = dz.transpose() * below;
    g.bias = dz.colwise().sum().transpose();
    if (t > 0) upstream = dz * layer.weight;
  }
  return grad;
}

/// model -= step * grad, blockwise.
template <typename Scalar>
void apply_gradient_step(HashModel<Scalar>& model, const ModelGradient<Scalar>& grad, Scalar step) {
  visit_parameter_pairs(model, grad, [step](auto& param, const auto& g) { param -= step * g; });
}

}  // namespace pseudohash

#endif  // PSEUDOHASH_HASHNET_HPP
