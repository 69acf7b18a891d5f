#include <catch2/catch_amalgamated.hpp>

#include "rowrl/mlp.hpp"

using namespace rowrl;

namespace {

// Straight-line re-implementation used as the forward oracle.
std::vector<double> oracle_forward(const Mlp& net, std::vector<double> x) {
  for (int l = 0; l < net.layer_count(); ++l) {
    std::vector<double> z(net.dims[l + 1]);
    for (int r = 0; r < net.dims[l + 1]; ++r) {
      double acc = net.biases[l][r];
      for (int c = 0; c < net.dims[l]; ++c)
        acc += net.weights[l][r * net.dims[l] + c] * x[c];
      z[r] = acc;
    }
    if (l + 1 < net.layer_count()) {
      for (double& v : z) v = std::max(v, 0.0);
    } else if (net.head == Head::logistic) {
      for (double& v : z) v = 1.0 / (1.0 + std::exp(-v));
    }
    x = std::move(z);
  }
  return x;
}

double scalar_output(const Mlp& net, const std::vector<double>& x) {
  return forward(net, x)[0];
}

}  // namespace

TEST_CASE("zero network outputs the head's value at zero") {
  std::mt19937_64 rng = make_rng(1, 1);
  Mlp critic = make_mlp({2, 4, 1}, Head::identity, rng);
  Mlp actor = make_mlp({2, 4, 1}, Head::logistic, rng);
  for (auto& w : critic.weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& w : actor.weights) std::fill(w.begin(), w.end(), 0.0);
  CHECK(forward(critic, {0.3, -0.8})[0] == 0.0);
  CHECK(forward(actor, {0.3, -0.8})[0] == 0.5);
}

TEST_CASE("forward matches the straight-line oracle") {
  std::mt19937_64 rng = make_rng(2, 0);
  for (int probe = 0; probe < 20; ++probe) {
    Mlp net = make_mlp({3, 8, 5, 2},
                       probe % 2 ? Head::logistic : Head::identity, rng);
    std::vector<double> x{uniform(rng, -2, 2), uniform(rng, -2, 2),
                          uniform(rng, -2, 2)};
    const auto got = forward(net, x);
    const auto want = oracle_forward(net, x);
    for (std::size_t i = 0; i < want.size(); ++i)
      CHECK(got[i] == Catch::Approx(want[i]).margin(1e-12));
  }
}

TEST_CASE("actor outputs stay strictly inside (0,1)") {
  std::mt19937_64 rng = make_rng(3, 0);
  Mlp actor = make_mlp({2, 8, 1}, Head::logistic, rng);
  for (double scale : {1.0, 100.0, 10000.0}) {
    const double y = forward(actor, {scale, -scale})[0];
    CHECK(y > 0.0);
    CHECK(y < 1.0);
  }
}

TEST_CASE("single linear layer gradients are the textbook ones") {
  std::mt19937_64 rng = make_rng(4, 0);
  Mlp net = make_mlp({3, 1}, Head::identity, rng);
  const std::vector<double> x{0.5, -1.5, 2.0};
  ForwardTrace trace;
  forward(net, x, &trace);
  GradientSet g = zero_gradients(net);
  backward(net, trace, {1.0}, g);
  for (int c = 0; c < 3; ++c) {
    CHECK(g.weights[0][c] == Catch::Approx(x[c]).margin(1e-15));
    CHECK(g.input[c] == Catch::Approx(net.weights[0][c]).margin(1e-15));
  }
  CHECK(g.biases[0][0] == 1.0);
}

TEST_CASE("zero network routes upstream only into the output bias") {
  // rectifier derivative at exactly 0 is 0, so hidden biases get nothing
  std::mt19937_64 rng = make_rng(40, 0);
  Mlp net = make_mlp({2, 4, 1}, Head::identity, rng);
  for (auto& w : net.weights) std::fill(w.begin(), w.end(), 0.0);
  ForwardTrace trace;
  forward(net, {0.3, 0.7}, &trace);
  GradientSet g = zero_gradients(net);
  backward(net, trace, {1.0}, g);
  for (double x : g.weights[0]) CHECK(x == 0.0);
  for (double x : g.weights[1]) CHECK(x == 0.0);
  for (double x : g.biases[0]) CHECK(x == 0.0);
  CHECK(g.biases[1][0] == 1.0);
}

TEST_CASE("analytic gradients match central finite differences") {
  std::mt19937_64 rng = make_rng(5, 0);
  Mlp net = make_mlp({2, 16, 16, 1}, Head::identity, rng);
  const std::vector<double> x{0.7, -0.4};
  ForwardTrace trace;
  forward(net, x, &trace);
  GradientSet g = zero_gradients(net);
  backward(net, trace, {1.0}, g);

  const double step = 1e-5;
  double worst = 0.0;
  for (int l = 0; l < net.layer_count(); ++l) {
    for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
      const double keep = net.weights[l][i];
      net.weights[l][i] = keep + step;
      const double up = scalar_output(net, x);
      net.weights[l][i] = keep - step;
      const double dn = scalar_output(net, x);
      net.weights[l][i] = keep;
      const double fd = (up - dn) / (2 * step);
      const double denom = std::max({std::fabs(fd), std::fabs(g.weights[l][i]),
                                     1e-8});
      worst = std::max(worst, std::fabs(fd - g.weights[l][i]) / denom);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("huber loss values and derivatives") {
  auto [l1, g1] = huber_loss(0.5);
  CHECK(l1 == Catch::Approx(0.125).margin(1e-15));
  CHECK(g1 == Catch::Approx(0.5).margin(1e-15));
  auto [l2, g2] = huber_loss(2.0);
  CHECK(l2 == Catch::Approx(1.5).margin(1e-15));
  CHECK(g2 == Catch::Approx(1.0).margin(1e-15));
  auto [l3, g3] = huber_loss(1.0);
  auto [l4, g4] = huber_loss(-1.0);
  CHECK(l3 == Catch::Approx(0.5).margin(1e-15));
  CHECK(l4 == Catch::Approx(0.5).margin(1e-15));
  CHECK(g3 == 1.0);
  CHECK(g4 == -1.0);
  CHECK(huber_loss(0.0).first == 0.0);
  CHECK_THROWS_AS(huber_loss(1.0, 0.0), DomainError);
}

TEST_CASE("optimizer: zero gradients leave parameters unchanged") {
  std::mt19937_64 rng = make_rng(6, 0);
  Mlp net = make_mlp({2, 4, 1}, Head::identity, rng);
  const Mlp before = net;
  OptimizerState opt = make_optimizer(net, 1e-3);
  optimizer_step(net, zero_gradients(net), opt);
  for (int l = 0; l < net.layer_count(); ++l)
    for (std::size_t i = 0; i < net.weights[l].size(); ++i)
      CHECK(net.weights[l][i] == before.weights[l][i]);
}

TEST_CASE("optimizer: first unit-gradient step moves by about the rate") {
  std::mt19937_64 rng = make_rng(7, 0);
  Mlp net = make_mlp({1, 1}, Head::identity, rng);
  OptimizerState opt = make_optimizer(net, 1e-3);
  GradientSet g = zero_gradients(net);
  g.weights[0][0] = 1.0;
  const double before = net.weights[0][0];
  optimizer_step(net, g, opt);
  CHECK(before - net.weights[0][0] == Catch::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("optimizer reproduces the hand-stepped trace on f(w) = w^2") {
  // three steps from w = 1 with lr 0.1, betas 0.9/0.999, eps 1e-8
  const double expected[3] = {0.9000000005, 0.8004122286917928,
                              0.7015862729460303};
  Mlp net;
  net.dims = {1, 1};
  net.head = Head::identity;
  net.weights = {{1.0}};
  net.biases = {{0.0}};
  OptimizerState opt = make_optimizer(net, 0.1);
  for (int step = 0; step < 3; ++step) {
    GradientSet g = zero_gradients(net);
    g.weights[0][0] = 2.0 * net.weights[0][0];
    g.biases[0][0] = 0.0;
    optimizer_step(net, g, opt);
    CHECK(net.weights[0][0] == Catch::Approx(expected[step]).margin(1e-12));
  }
}

TEST_CASE("soft update blends by eta") {
  Mlp target, online;
  target.dims = online.dims = {1, 1};
  target.head = online.head = Head::identity;
  target.weights = {{0.0}};
  target.biases = {{0.0}};
  online.weights = {{1.0}};
  online.biases = {{2.0}};
  soft_update(target, online, 0.005);
  CHECK(target.weights[0][0] == Catch::Approx(0.005).margin(1e-15));
  CHECK(target.biases[0][0] == Catch::Approx(0.01).margin(1e-15));

  soft_update(target, online, 1.0);
  CHECK(target.weights[0][0] == 1.0);
  CHECK(target.biases[0][0] == 2.0);

  Mlp copy = online;
  soft_update(copy, online, 0.37);
  CHECK(copy.weights[0][0] == online.weights[0][0]);
}

TEST_CASE("soft update contracts the target toward the online network") {
  std::mt19937_64 rng = make_rng(8, 0);
  Mlp online = make_mlp({2, 6, 1}, Head::identity, rng);
  Mlp target = make_mlp({2, 6, 1}, Head::identity, rng);
  const double eta = 0.005;
  for (int l = 0; l < online.layer_count(); ++l) {
    for (std::size_t i = 0; i < online.weights[l].size(); ++i) {
      const double gap = target.weights[l][i] - online.weights[l][i];
      Mlp t2 = target;
      soft_update(t2, online, eta);
      const double new_gap = t2.weights[l][i] - online.weights[l][i];
      CHECK(new_gap == Catch::Approx((1 - eta) * gap).margin(1e-12));
      break;  // one element per layer is representative
    }
  }
  Mlp mismatched = make_mlp({2, 5, 1}, Head::identity, rng);
  CHECK_THROWS_AS(soft_update(mismatched, online, eta), DomainError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  std::mt19937_64 rng = make_rng(9, 0);
  for (Head head : {Head::logistic, Head::identity}) {
    Mlp net = make_mlp({2, 64, 64, 1}, head, rng, 1e-3);
    const std::string text = save_checkpoint(net);
    const Mlp back = load_checkpoint(text);
    REQUIRE(back.dims == net.dims);
    REQUIRE(back.head == net.head);
    for (int l = 0; l < net.layer_count(); ++l) {
      for (std::size_t i = 0; i < net.weights[l].size(); ++i)
        REQUIRE(back.weights[l][i] == net.weights[l][i]);
      for (std::size_t i = 0; i < net.biases[l].size(); ++i)
        REQUIRE(back.biases[l][i] == net.biases[l][i]);
    }
    CHECK(save_checkpoint(back) == text);
  }
  CHECK_THROWS_AS(load_checkpoint("garbage"), DomainError);
}
