#include <gtest/gtest.h>

#include "aorl/mlp.hpp"
#include "aorl/random.hpp"
#include "aorl/rl_common.hpp"
#include "test_support.hpp"

using namespace aorl;
using aorl::testing::numeric_gradient;
using aorl::testing::relative_error;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, RandomStream& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// L = sum(W .* f(x)) for a fixed weighting W, so dL/dout = W.
void check_network(std::vector<int> widths, OutputActivation out) {
  RandomStream rng(21, 0);
  Mlp net(widths, out);
  net.initialize(rng);
  const Eigen::MatrixXd x = random_matrix(widths.front(), 5, rng);
  const Eigen::MatrixXd w = random_matrix(widths.back(), 5, rng);

  Mlp::Cache cache;
  net.forward(x, cache);
  Eigen::VectorXd grad;
  const Eigen::MatrixXd dx = net.backward(cache, w, grad);

  const auto loss_p = [&](const Eigen::VectorXd& p) {
    Mlp copy = net;
    copy.parameters() = p;
    return (copy.forward(x).array() * w.array()).sum();
  };
  EXPECT_LE(relative_error(grad, numeric_gradient(loss_p, net.parameters())), 1e-6);

  Eigen::VectorXd flat_x = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  const auto loss_x = [&](const Eigen::VectorXd& v) {
    const Eigen::MatrixXd in = Eigen::Map<const Eigen::MatrixXd>(v.data(), x.rows(), x.cols());
    return (net.forward(in).array() * w.array()).sum();
  };
  const Eigen::VectorXd flat_dx = Eigen::Map<const Eigen::VectorXd>(dx.data(), dx.size());
  EXPECT_LE(relative_error(flat_dx, numeric_gradient(loss_x, flat_x)), 1e-6);
}

}  // namespace

TEST(Mlp, GradientLinearOutput) { check_network({4, 8, 3}, OutputActivation::linear); }
TEST(Mlp, GradientTanhOutput) { check_network({4, 8, 3}, OutputActivation::tanh); }
TEST(Mlp, GradientTwoHiddenLayers) { check_network({4, 6, 5, 2}, OutputActivation::linear); }

TEST(Mlp, ParameterCountAndShape) {
  Mlp net({4, 150, 64});
  EXPECT_EQ(net.parameter_count(), 4 * 150 + 150 + 150 * 64 + 64);
  EXPECT_EQ(net.input_size(), 4);
  EXPECT_EQ(net.output_size(), 64);
}

TEST(Mlp, InitializationIsSeededAndBounded) {
  RandomStream a(3, streams::network_init), b(3, streams::network_init);
  Mlp n1({4, 10, 2}), n2({4, 10, 2});
  n1.initialize(a, 0.1);
  n2.initialize(b, 0.1);
  EXPECT_TRUE(n1.parameters() == n2.parameters());
  EXPECT_LE(n1.parameters().head(40).cwiseAbs().maxCoeff(), 0.5);
  EXPECT_LE(n1.parameters().tail(22).cwiseAbs().maxCoeff(), 0.1 / std::sqrt(10.0));
}

TEST(Adam, MinimizesQuadratic) {
  Eigen::VectorXd p = Eigen::VectorXd::Constant(3, 5.0);
  const Eigen::VectorXd target = (Eigen::VectorXd(3) << 1.0, -2.0, 0.5).finished();
  Adam opt(3, 0.05);
  for (int i = 0; i < 2000; ++i) opt.step(p, 2.0 * (p - target));
  EXPECT_LE((p - target).norm(), 1e-3);
}

TEST(Adam, FirstStepHasLearningRateMagnitude) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
  Adam opt(2, 0.01);
  opt.step(p, (Eigen::VectorXd(2) << 3.0, -1e-3).finished());
  EXPECT_NEAR(p[0], -0.01, 1e-6);
  EXPECT_NEAR(p[1], 0.01, 1e-4);
}

TEST(Polyak, ExtremesAreExact) {
  RandomStream rng(5, 0);
  const Eigen::VectorXd online = random_matrix(50, 1, rng);
  const Eigen::VectorXd start = random_matrix(50, 1, rng);
  Eigen::VectorXd t = start;
  polyak_update(t, online, 1.0);
  EXPECT_TRUE(t == start);
  polyak_update(t, online, 0.0);
  EXPECT_TRUE(t == online);
}

TEST(Polyak, Interpolates) {
  Eigen::VectorXd t = Eigen::VectorXd::Constant(2, 1.0);
  polyak_update(t, Eigen::VectorXd::Constant(2, 3.0), 0.99);
  EXPECT_NEAR(t[0], 1.02, 1e-15);
}

TEST(Regression, GradientMatchesFiniteDifference) {
  RandomStream rng(6, 0);
  Mlp net({4, 7, 1});
  net.initialize(rng);
  const Eigen::MatrixXd x = random_matrix(4, 9, rng);
  const Eigen::VectorXd y = random_matrix(9, 1, rng);
  const auto g = regression_loss(net, x, y);
  const auto f = [&](const Eigen::VectorXd& p) {
    Mlp copy = net;
    copy.parameters() = p;
    return regression_loss(copy, x, y).loss;
  };
  EXPECT_LE(relative_error(g.params, numeric_gradient(f, net.parameters())), 1e-6);
}

TEST(Critic, ActionGradientMatchesFiniteDifference) {
  RandomStream rng(7, 0);
  Mlp q({4 + 3, 6, 1});
  q.initialize(rng);
  const Eigen::MatrixXd feats = random_matrix(4, 5, rng);
  const Eigen::MatrixXd acts = random_matrix(3, 5, rng);
  const Eigen::MatrixXd g = action_gradient(q, feats, acts);
  Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(acts.data(), acts.size());
  const auto f = [&](const Eigen::VectorXd& v) {
    const Eigen::MatrixXd a = Eigen::Map<const Eigen::MatrixXd>(v.data(), 3, 5);
    return q.forward(critic_input(feats, a)).sum();
  };
  const Eigen::VectorXd flat_g = Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
  EXPECT_LE(relative_error(flat_g, numeric_gradient(f, flat)), 1e-6);
}
