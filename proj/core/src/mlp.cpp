#include "aorl/mlp.hpp"

#include <cmath>

#include "aorl/errors.hpp"

namespace aorl {

Mlp::Mlp(std::vector<int> widths, OutputActivation output)
    : widths_(std::move(widths)), output_(output) {
  if (widths_.size() < 3) throw ConfigError("network needs input, hidden and output widths");
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    if (widths_[l] < 1 || widths_[l + 1] < 1) throw ConfigError("layer widths must be positive");
    LayerSlice s{offset, offset + static_cast<Eigen::Index>(widths_[l + 1]) * widths_[l],
                 widths_[l + 1], widths_[l]};
    offset = s.bias_offset + s.rows;
    layers_.push_back(s);
  }
  params_ = Eigen::VectorXd::Zero(offset);
}

void Mlp::initialize(RandomStream& rng, double output_scale) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerSlice& s = layers_[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.cols));
    const double scale = l + 1 == layers_.size() ? output_scale : 1.0;
    for (Eigen::Index i = s.weight_offset; i < s.bias_offset + s.rows; ++i) {
      params_[i] = scale * rng.uniform(-bound, bound);
    }
  }
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(std::size_t layer) const {
  const LayerSlice& s = layers_[layer];
  return {params_.data() + s.weight_offset, s.rows, s.cols};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t layer) const {
  const LayerSlice& s = layers_[layer];
  return {params_.data() + s.bias_offset, s.rows};
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  Cache cache;
  return forward(input, cache);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Cache& cache) const {
  if (input.rows() != input_size()) throw DimensionError("network input width mismatch");
  cache.activations.clear();
  cache.activations.reserve(layers_.size() + 1);
  cache.activations.push_back(input);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = weight(l) * cache.activations.back();
    z.colwise() += bias(l);
    const bool last = l + 1 == layers_.size();
    if (!last || output_ == OutputActivation::tanh) z = z.array().tanh().matrix();
    cache.activations.push_back(std::move(z));
  }
  return cache.activations.back();
}

Eigen::MatrixXd Mlp::backward(const Cache& cache, const Eigen::MatrixXd& d_output,
                              Eigen::VectorXd& grad) const {
  if (grad.size() == 0) grad = Eigen::VectorXd::Zero(params_.size());
  if (grad.size() != params_.size()) throw DimensionError("gradient buffer size mismatch");
  Eigen::MatrixXd delta = d_output;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Eigen::MatrixXd& out = cache.activations[l + 1];
    const bool last = l + 1 == layers_.size();
    if (!last || output_ == OutputActivation::tanh) {
      delta = delta.cwiseProduct((1.0 - out.array().square()).matrix());
    }
    const LayerSlice& s = layers_[l];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + s.weight_offset, s.rows, s.cols);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + s.bias_offset, s.rows);
    gw.noalias() += delta * cache.activations[l].transpose();
    gb += delta.rowwise().sum();
    delta = weight(l).transpose() * delta;
  }
  return delta;
}

Adam::Adam(Eigen::Index size, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw DimensionError("Adam state size mismatch");
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

void polyak_update(Eigen::VectorXd& target, const Eigen::VectorXd& online, double rho) {
  if (target.size() != online.size()) throw DimensionError("Polyak size mismatch");
  if (rho == 1.0) return;
  target = rho * target + (1.0 - rho) * online;
}

}  // namespace aorl
