#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "mmcon/numerics.hpp"
#include "mmcon/rng.hpp"

using namespace mmcon;

namespace {

EncoderParams identity_encoder(int dim, Activation act, bool normalize) {
  EncoderParams p;
  p.activation = act;
  p.normalize_output = normalize;
  EncoderLayer layer;
  layer.weight = Matrix(dim, dim);
  for (int i = 0; i < dim; ++i) layer.weight.at(i, i) = 1.0;
  layer.bias.assign(static_cast<size_t>(dim), 0.0);
  p.layers.push_back(std::move(layer));
  return p;
}

// independent straightforward re-evaluation of the affine+activation chain
Vec naive_forward(const EncoderParams& p, const Vec& x) {
  Vec cur = x;
  for (size_t l = 0; l < p.layers.size(); ++l) {
    const EncoderLayer& layer = p.layers[l];
    Vec next(static_cast<size_t>(layer.weight.rows));
    for (int r = 0; r < layer.weight.rows; ++r) {
      double s = layer.bias[static_cast<size_t>(r)];
      for (int c = 0; c < layer.weight.cols; ++c)
        s += layer.weight.at(r, c) * cur[static_cast<size_t>(c)];
      next[static_cast<size_t>(r)] = s;
    }
    if (l + 1 < p.layers.size()) {
      for (double& v : next)
        v = p.activation == Activation::Relu ? (v > 0.0 ? v : 0.0) : std::tanh(v);
    }
    cur = next;
  }
  if (p.normalize_output) {
    double n = 0.0;
    for (double v : cur) n += v * v;
    n = std::sqrt(n);
    for (double& v : cur) v /= n;
  }
  return cur;
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("identity relu network passes input through") {
  const EncoderParams p = identity_encoder(2, Activation::Relu, false);
  const Vec out = encoder_forward(p, {1.0, 2.0});
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("normalized output of (3,4) is (0.6,0.8)") {
  const EncoderParams p = identity_encoder(2, Activation::Tanh, true);
  const Vec out = encoder_forward(p, {3.0, 4.0});
  CHECK(std::abs(out[0] - 0.6) <= 1e-15);
  CHECK(std::abs(out[1] - 0.8) <= 1e-15);
}

TEST_CASE("random nets match an independent re-evaluation") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const bool normalize = trial % 2 == 0;
    const Activation act = trial % 3 == 0 ? Activation::Relu : Activation::Tanh;
    const EncoderParams p = make_encoder({5, 7, 4}, act, normalize, rng());
    Vec x(5);
    for (double& v : x) v = gauss(rng);
    const Vec fast = encoder_forward(p, x);
    const Vec slow = naive_forward(p, x);
    REQUIRE(fast.size() == slow.size());
    for (size_t i = 0; i < fast.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) <= 1e-12);
  }
}

TEST_CASE("normalized outputs sit on the unit sphere") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const EncoderParams p = make_encoder({6, 5, 3}, Activation::Tanh, true, rng());
    Vec x(6);
    for (double& v : x) v = gauss(rng);
    CHECK(std::abs(norm(encoder_forward(p, x)) - 1.0) <= 1e-12);
  }
}

TEST_CASE("forward is deterministic") {
  const EncoderParams p = make_encoder({4, 6, 3}, Activation::Tanh, true, 99);
  const Vec x{0.3, -1.2, 0.7, 2.0};
  const Vec a = encoder_forward(p, x);
  const Vec b = encoder_forward(p, x);
  CHECK(a == b);
}

TEST_CASE("dimension and degeneracy errors") {
  const EncoderParams p = identity_encoder(2, Activation::Tanh, false);
  CHECK_THROWS_AS(encoder_forward(p, {1.0, 2.0, 3.0}), DimensionMismatch);

  EncoderParams zero = identity_encoder(2, Activation::Tanh, true);
  zero.layers[0].weight = Matrix(2, 2, 0.0);
  CHECK_THROWS_AS(encoder_forward(zero, {1.0, 2.0}), DegenerateEmbedding);
}

TEST_CASE("identity net backward returns the upstream gradient") {
  const EncoderParams p = identity_encoder(2, Activation::Tanh, false);
  const BackwardResult res = encoder_backward(p, {0.5, -0.25}, {1.0, 0.0});
  CHECK(res.input_grad[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(res.input_grad[1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("zero upstream gradient gives all-zero parameter gradients") {
  const EncoderParams p = make_encoder({3, 4, 2}, Activation::Tanh, true, 5);
  const BackwardResult res = encoder_backward(p, {1.0, -2.0, 0.5}, {0.0, 0.0});
  for (double g : flatten_gradients(res.grads)) CHECK(g == 0.0);
}

TEST_CASE("backward matches finite differences over 20 random draws") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const bool normalize = trial % 2 == 0;
    EncoderParams p = make_encoder({4, 5, 3}, Activation::Tanh, normalize, rng());
    Vec x(4), head(3);
    for (double& v : x) v = gauss(rng);
    for (double& v : head) v = gauss(rng);

    const BackwardResult res = encoder_backward(p, x, head);
    const Vec analytic = flatten_gradients(res.grads);
    const Vec at = flatten_parameters(p);

    auto loss = [&](const Vec& flat) {
      EncoderParams probe = p;
      assign_parameters(probe, flat);
      return dot(encoder_forward(probe, x), head);
    };
    const GradCheckReport report = finite_difference_check(loss, at, analytic, 1e-5);
    CHECK(report.max_relative_error <= 1e-5);
  }
}

TEST_CASE("sgd examples") {
  EncoderParams p = identity_encoder(1, Activation::Tanh, false);
  p.layers[0].weight.at(0, 0) = 1.0;
  EncoderGrads g = zero_grads_like(p);

  SUBCASE("p=1, g=2, lr=0.5 lands on 0") {
    g.layers[0].weight.at(0, 0) = 2.0;
    CHECK(sgd_step(p, g, 0.5).layers[0].weight.at(0, 0) == 0.0);
  }
  SUBCASE("p=1, g=1, lr=0.001 lands on 0.999") {
    g.layers[0].weight.at(0, 0) = 1.0;
    CHECK(sgd_step(p, g, 0.001).layers[0].weight.at(0, 0) == doctest::Approx(0.999).epsilon(1e-15));
  }
  SUBCASE("zero gradient leaves parameters unchanged") {
    const EncoderParams out = sgd_step(p, g, 0.1);
    CHECK(flatten_parameters(out) == flatten_parameters(p));
  }
  SUBCASE("lr=0 is the identity") {
    g.layers[0].weight.at(0, 0) = 123.0;
    g.layers[0].bias[0] = -7.0;
    CHECK(flatten_parameters(sgd_step(p, g, 0.0)) == flatten_parameters(p));
  }
  SUBCASE("negative lr rejected") {
    CHECK_THROWS_AS(sgd_step(p, g, -0.1), InvalidConfig);
  }
}

TEST_CASE("finite difference checker on a quadratic") {
  auto f = [](const Vec& w) { return w[0] * w[0]; };
  const GradCheckReport report = finite_difference_check(f, {3.0}, {6.0}, 1e-5);
  CHECK(std::abs(report.numeric_gradient[0] - 6.0) <= 1e-8);
  CHECK(report.max_relative_error <= 1e-9);
}

TEST_CASE("finite difference checker on a constant") {
  const double step = 1e-4;
  auto f = [](const Vec&) { return 42.0; };
  const GradCheckReport report = finite_difference_check(f, {1.0, -2.0}, {0.0, 0.0}, step);
  for (double g : report.numeric_gradient) CHECK(std::abs(g) <= step * step);
}

TEST_CASE("finite difference checker rejects bad steps and non-finite losses") {
  auto f = [](const Vec& w) { return w[0]; };
  CHECK_THROWS_AS(finite_difference_check(f, {1.0}, {1.0}, 1e-8), InvalidConfig);
  CHECK_THROWS_AS(finite_difference_check(f, {1.0}, {1.0}, 1e-2), InvalidConfig);
  auto bad = [](const Vec&) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(finite_difference_check(bad, {1.0}, {0.0}, 1e-5), NonFiniteLoss);
}

TEST_CASE("flatten and assign round-trip") {
  const EncoderParams p = make_encoder({3, 4, 2}, Activation::Relu, false, 8);
  EncoderParams q = make_encoder({3, 4, 2}, Activation::Relu, false, 9);
  assign_parameters(q, flatten_parameters(p));
  CHECK(flatten_parameters(q) == flatten_parameters(p));
  CHECK_THROWS_AS(assign_parameters(q, Vec(3, 0.0)), DimensionMismatch);
}

}  // TEST_SUITE
