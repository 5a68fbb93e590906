#include "ratelab/nnet/dense_net.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "ratelab/common/errors.hpp"

namespace ratelab::nnet {

std::string_view to_string(Activation activation) {
  switch (activation) {
    case Activation::identity:
      return "identity";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::tanh:
      return "tanh";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "identity" || name == "none") return Activation::identity;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  throw FormatError("unknown activation '" + std::string(name) + "'");
}

namespace {

template <typename Derived>
void apply_activation(Eigen::MatrixBase<Derived>& values, Activation act) {
  using T = typename Derived::Scalar;
  switch (act) {
    case Activation::identity:
      break;
    case Activation::tanh:
      values = values.array().tanh().matrix();
      break;
    case Activation::sigmoid:
      values = (T(1) / (T(1) + (-values.array()).exp())).matrix();
      break;
  }
}

// Derivative expressed through the activation output a = f(z).
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> activation_slope(
    const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& out,
    Activation act) {
  switch (act) {
    case Activation::tanh:
      return (T(1) - out.array().square()).matrix();
    case Activation::sigmoid:
      return (out.array() * (T(1) - out.array())).matrix();
    case Activation::identity:
      break;
  }
  return Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Ones(out.rows(),
                                                                out.cols());
}

}  // namespace

template <typename T>
BasicDenseNet<T>::BasicDenseNet(std::vector<int> widths,
                                Activation output_activation)
    : widths_(std::move(widths)), output_(output_activation) {
  if (widths_.size() < 2) {
    throw std::invalid_argument(
        "dense net needs at least an input and an output width");
  }
  for (int w : widths_) {
    if (w <= 0) throw std::invalid_argument("layer widths must be positive");
  }
  std::size_t offset = 0;
  for (int l = 0; l < layer_count(); ++l) {
    weight_offset_.push_back(offset);
    offset += static_cast<std::size_t>(widths_[l]) * widths_[l + 1];
    bias_offset_.push_back(offset);
    offset += static_cast<std::size_t>(widths_[l + 1]);
  }
  params_ = Vector::Zero(static_cast<Eigen::Index>(offset));
}

template <typename T>
BasicDenseNet<T> BasicDenseNet<T>::xavier(std::vector<int> widths,
                                          Activation output_activation,
                                          Rng& rng) {
  BasicDenseNet net(std::move(widths), output_activation);
  for (int l = 0; l < net.layer_count(); ++l) {
    const double fan_in = net.widths_[l];
    const double fan_out = net.widths_[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto w = net.weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        w(i, j) = static_cast<T>(dist(rng));
      }
    }
  }
  return net;
}

template <typename T>
void BasicDenseNet<T>::set_parameters(const Vector& values) {
  if (values.size() != params_.size()) {
    throw DimensionError("dense net parameters",
                         static_cast<std::size_t>(params_.size()),
                         static_cast<std::size_t>(values.size()));
  }
  if (!values.allFinite()) {
    throw NonFiniteError("refusing non-finite dense net parameters");
  }
  params_ = values;
}

template <typename T>
void BasicDenseNet<T>::check_layer(int layer) const {
  if (layer < 0 || layer >= layer_count()) {
    throw std::out_of_range("layer index " + std::to_string(layer) +
                            " out of range");
  }
}

template <typename T>
typename BasicDenseNet<T>::MatrixMap BasicDenseNet<T>::weight(int layer) {
  check_layer(layer);
  return MatrixMap(params_.data() + weight_offset_[layer], widths_[layer + 1],
                   widths_[layer]);
}

template <typename T>
typename BasicDenseNet<T>::ConstMatrixMap BasicDenseNet<T>::weight(
    int layer) const {
  check_layer(layer);
  return ConstMatrixMap(params_.data() + weight_offset_[layer],
                        widths_[layer + 1], widths_[layer]);
}

template <typename T>
typename BasicDenseNet<T>::VectorMap BasicDenseNet<T>::bias(int layer) {
  check_layer(layer);
  return VectorMap(params_.data() + bias_offset_[layer], widths_[layer + 1]);
}

template <typename T>
typename BasicDenseNet<T>::ConstVectorMap BasicDenseNet<T>::bias(
    int layer) const {
  check_layer(layer);
  return ConstVectorMap(params_.data() + bias_offset_[layer],
                        widths_[layer + 1]);
}

template <typename T>
typename BasicDenseNet<T>::Matrix BasicDenseNet<T>::propagate(
    const Matrix& inputs, std::vector<Matrix>* cache) const {
  if (inputs.rows() != input_size()) {
    throw DimensionError("dense net input", static_cast<std::size_t>(input_size()),
                         static_cast<std::size_t>(inputs.rows()));
  }
  if (cache != nullptr) {
    cache->clear();
    cache->reserve(widths_.size());
    cache->push_back(inputs);
  }
  Matrix current = inputs;
  for (int l = 0; l < layer_count(); ++l) {
    Matrix next = weight(l) * current;
    next.colwise() += bias(l);
    apply_activation(next, l + 1 == layer_count() ? output_ : Activation::tanh);
    current = std::move(next);
    if (cache != nullptr) cache->push_back(current);
  }
  return current;
}

template <typename T>
typename BasicDenseNet<T>::Vector BasicDenseNet<T>::forward(
    const Vector& input) const {
  return propagate(input, nullptr);
}

template <typename T>
typename BasicDenseNet<T>::Matrix BasicDenseNet<T>::forward_batch(
    const Matrix& inputs) const {
  return propagate(inputs, nullptr);
}

template <typename T>
const typename BasicDenseNet<T>::Matrix& BasicDenseNet<T>::forward_train(
    const Matrix& inputs) {
  propagate(inputs, &cache_);
  return cache_.back();
}

template <typename T>
DenseGradients<T> BasicDenseNet<T>::backward(const Matrix& output_grad) const {
  if (cache_.empty()) {
    throw StateError("dense net backward called without a cached forward pass");
  }
  const Matrix& output = cache_.back();
  if (output_grad.rows() != output.rows() ||
      output_grad.cols() != output.cols()) {
    throw DimensionError("dense net output gradient",
                         static_cast<std::size_t>(output.size()),
                         static_cast<std::size_t>(output_grad.size()));
  }

  DenseGradients<T> grads;
  grads.parameters = Vector::Zero(params_.size());
  Matrix delta =
      (output_grad.array() * activation_slope<T>(output, output_).array())
          .matrix();
  for (int l = layer_count() - 1; l >= 0; --l) {
    const Matrix& layer_input = cache_[static_cast<std::size_t>(l)];
    MatrixMap dw(grads.parameters.data() + weight_offset_[l], widths_[l + 1],
                 widths_[l]);
    VectorMap db(grads.parameters.data() + bias_offset_[l], widths_[l + 1]);
    dw.noalias() = delta * layer_input.transpose();
    db = delta.rowwise().sum();
    Matrix upstream = weight(l).transpose() * delta;
    if (l > 0) {
      delta = (upstream.array() *
               activation_slope<T>(layer_input, Activation::tanh).array())
                  .matrix();
    } else {
      grads.input = std::move(upstream);
    }
  }
  return grads;
}

template class BasicDenseNet<float>;
template class BasicDenseNet<double>;

}  // namespace ratelab::nnet
