#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ratelab/common/random.hpp"

namespace ratelab::nnet {

enum class Activation { identity, sigmoid, tanh };

std::string_view to_string(Activation activation);

/// Parses "identity", "none" (alias of identity), "sigmoid" or "tanh".
Activation parse_activation(std::string_view name);

template <typename T>
struct DenseGradients {
  /// Flat gradient with the same layout as BasicDenseNet::parameters().
  Eigen::Matrix<T, Eigen::Dynamic, 1> parameters;
  /// Gradient with respect to the inputs, one column per sample.
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> input;
};

/// Multi-layer perceptron with tanh hidden units.
///
/// All weights and biases live in one contiguous parameter vector so an
/// optimizer can treat the network as a flat block. For layer l the weight
/// matrix (out x in, column-major) is followed by its bias vector.
///
/// Batched calls take one sample per column. forward_train() caches the
/// activations that backward() consumes; the cache survives until the next
/// forward_train() or clear_cache().
template <typename T>
class BasicDenseNet {
 public:
  using Scalar = T;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  /// All parameters zero. widths must hold at least an input and an output
  /// width, all positive.
  BasicDenseNet(std::vector<int> widths, Activation output_activation);

  /// Xavier-uniform weights, zero biases.
  static BasicDenseNet xavier(std::vector<int> widths,
                              Activation output_activation, Rng& rng);

  const std::vector<int>& widths() const noexcept { return widths_; }
  int input_size() const noexcept { return widths_.front(); }
  int output_size() const noexcept { return widths_.back(); }
  int layer_count() const noexcept {
    return static_cast<int>(widths_.size()) - 1;
  }
  Activation hidden_activation() const noexcept { return Activation::tanh; }
  Activation output_activation() const noexcept { return output_; }

  std::size_t parameter_count() const noexcept {
    return static_cast<std::size_t>(params_.size());
  }
  const Vector& parameters() const noexcept { return params_; }
  /// Mutable access for optimizers. Callers are responsible for keeping
  /// values finite; use set_parameters() for checked replacement.
  Vector& mutable_parameters() noexcept { return params_; }
  /// Throws DimensionError on size mismatch, NonFiniteError if any value is
  /// not finite (the network is left unchanged).
  void set_parameters(const Vector& values);
  bool all_finite() const { return params_.allFinite(); }

  MatrixMap weight(int layer);
  ConstMatrixMap weight(int layer) const;
  VectorMap bias(int layer);
  ConstVectorMap bias(int layer) const;

  Vector forward(const Vector& input) const;
  Matrix forward_batch(const Matrix& inputs) const;

  const Matrix& forward_train(const Matrix& inputs);
  /// output_grad holds dLoss/dOutput per sample (one column each); parameter
  /// gradients are summed over the columns. Throws StateError when no
  /// forward_train() result is cached.
  DenseGradients<T> backward(const Matrix& output_grad) const;
  bool has_cache() const noexcept { return !cache_.empty(); }
  void clear_cache() { cache_.clear(); }

 private:
  void check_layer(int layer) const;
  Matrix propagate(const Matrix& inputs, std::vector<Matrix>* cache) const;

  std::vector<int> widths_;
  Activation output_;
  Vector params_;
  std::vector<std::size_t> weight_offset_;
  std::vector<std::size_t> bias_offset_;
  std::vector<Matrix> cache_;
};

using DenseNet = BasicDenseNet<double>;
using DenseNetF = BasicDenseNet<float>;

extern template class BasicDenseNet<float>;
extern template class BasicDenseNet<double>;

}  // namespace ratelab::nnet
