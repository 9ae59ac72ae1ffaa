#pragma once

#include <vector>

#include <Eigen/Core>

#include "aorl/random.hpp"

namespace aorl {

enum class OutputActivation { linear, tanh };

/// Fully connected network with tanh hidden layers and a linear or tanh output.
///
/// Parameters live in one flat vector so optimizers, Polyak averaging and
/// checkpoints treat every network alike. Layout, layer by layer: weight
/// matrix (out x in, column-major) followed by the bias vector.
///
/// Batches are column-major matrices with one sample per column.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, each hidden, output
  };

  Mlp() = default;
  /// widths = {input, hidden..., output}; at least one hidden layer.
  Mlp(std::vector<int> widths, OutputActivation output = OutputActivation::linear);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases; the last
  /// layer is further multiplied by output_scale.
  void initialize(RandomStream& rng, double output_scale = 1.0);

  [[nodiscard]] Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Cache& cache) const;

  /// Backpropagates dL/d(output) through a cached forward pass. Parameter
  /// gradients are added into `grad` (resized and zeroed when empty); the
  /// return value is dL/d(input).
  Eigen::MatrixXd backward(const Cache& cache, const Eigen::MatrixXd& d_output,
                           Eigen::VectorXd& grad) const;

  [[nodiscard]] Eigen::VectorXd& parameters() { return params_; }
  [[nodiscard]] const Eigen::VectorXd& parameters() const { return params_; }
  [[nodiscard]] Eigen::Index parameter_count() const { return params_.size(); }
  [[nodiscard]] const std::vector<int>& widths() const { return widths_; }
  [[nodiscard]] int input_size() const { return widths_.front(); }
  [[nodiscard]] int output_size() const { return widths_.back(); }
  [[nodiscard]] OutputActivation output_activation() const { return output_; }

 private:
  struct LayerSlice {
    Eigen::Index weight_offset;
    Eigen::Index bias_offset;
    int rows;
    int cols;
  };

  [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
  [[nodiscard]] Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;

  std::vector<int> widths_;
  OutputActivation output_ = OutputActivation::linear;
  std::vector<LayerSlice> layers_;
  Eigen::VectorXd params_;
};

/// Adam with bias correction; minimizes.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);

  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad);
  [[nodiscard]] double learning_rate() const { return lr_; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

/// target <- rho * target + (1 - rho) * online.
void polyak_update(Eigen::VectorXd& target, const Eigen::VectorXd& online, double rho);

}  // namespace aorl
