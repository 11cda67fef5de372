// Copyright 2026 The aexplore Authors
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

#include <doctest.h>

#include "aex/net.hpp"

using namespace aex;

namespace {

// One hidden unit, weights chosen by hand so the forward pass is computable
// with pencil arithmetic.
NetworkParams tiny_net() {
  NetworkParams p;
  p.hidden.resize(1);
  p.hidden[0].W = Mat::Constant(1, 2, 0.5);
  p.hidden[0].b = Vec::Constant(1, 0.25);
  p.mean_head.W = Mat::Constant(1, 1, 2.0);
  p.mean_head.b = Vec::Constant(1, -1.0);
  p.log_var_head.W = Mat::Constant(1, 1, 1.0);
  p.log_var_head.b = Vec::Constant(1, 0.0);
  return p;
}

double gradcheck_max_err(NetworkParams& p, const Mat& x, const Mat& target, double eps) {
  auto loss = [&](const NetworkParams& q) {
    ForwardCache c = forward(q, x);
    return gaussian_log_density_rows(target, c.mean, c.log_var).sum();
  };
  ForwardCache c = forward(p, x);
  Mat d_mean, d_log_var;
  gaussian_log_density_grads(target, c.mean, c.log_var, d_mean, d_log_var);
  NetworkGrads g = zeros_like(p);
  backward(p, c, d_mean, d_log_var, g);
  const Vec analytic = to_vector(g);

  Vec theta = to_vector(p);
  double max_err = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double orig = theta[i];
    theta[i] = orig + eps;
    from_vector(p, theta);
    const double up = loss(p);
    theta[i] = orig - eps;
    from_vector(p, theta);
    const double down = loss(p);
    theta[i] = orig;
    from_vector(p, theta);
    const double fd = (up - down) / (2.0 * eps);
    const double err = std::abs(analytic[i] - fd) / std::max({1.0, std::abs(analytic[i]), std::abs(fd)});
    max_err = std::max(max_err, err);
  }
  return max_err;
}

}  // namespace

TEST_CASE("forward matches hand computation") {
  NetworkParams p = tiny_net();
  Mat x(1, 2);
  x << 1.0, 2.0;
  // pre = 0.5*1 + 0.5*2 + 0.25 = 1.75 (positive branch), mean = 2*1.75 - 1,
  // log_var = 1.75.
  ForwardCache c = forward(p, x);
  CHECK(c.mean(0, 0) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(c.log_var(0, 0) == doctest::Approx(1.75).epsilon(1e-12));

  x << -2.0, -2.0;
  // pre = -1.75 -> leaky output -0.0175.
  c = forward(p, x);
  CHECK(c.mean(0, 0) == doctest::Approx(2.0 * -0.0175 - 1.0).epsilon(1e-12));
}

TEST_CASE("log-variance output is clamped") {
  NetworkParams p = tiny_net();
  p.log_var_max = 1.0;
  p.log_var_min = -0.5;
  Mat x(2, 2);
  x << 10.0, 10.0, -100.0, -100.0;
  ForwardCache c = forward(p, x);
  CHECK(c.log_var(0, 0) == 1.0);
  CHECK(c.log_var(1, 0) == -0.5);
  // Saturated outputs must not leak gradient into the log-var head.
  Mat d_mean = Mat::Zero(2, 1), d_log_var = Mat::Ones(2, 1);
  NetworkGrads g = zeros_like(p);
  backward(p, c, d_mean, d_log_var, g);
  CHECK(g.log_var_head.W.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.log_var_head.b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gaussian log density at the mean") {
  const Mat x = Mat::Zero(1, 3);
  const Mat mean = Mat::Zero(1, 3);
  const Mat log_var = Mat::Zero(1, 3);  // unit variance
  const Vec d = gaussian_log_density_rows(x, mean, log_var);
  CHECK(d[0] == doctest::Approx(-1.5 * kLnTwoPi).epsilon(1e-12));
}

TEST_CASE("initialization is fan-in bounded and seed deterministic") {
  Rng a(7), b(7);
  NetworkParams p = make_network(4, 3, {8, 8}, a);
  NetworkParams q = make_network(4, 3, {8, 8}, b);
  CHECK((to_vector(p) - to_vector(q)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.hidden[0].W.cwiseAbs().maxCoeff() <= 0.5);          // 1/sqrt(4)
  CHECK(p.hidden[1].W.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(8.0));
  CHECK(param_count(p) == (4 + 1) * 8 + (8 + 1) * 8 + 2 * (8 + 1) * 3);
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(42);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    NetworkParams p = make_network(3, 2, {5, 4}, rng);
    Mat x(6, 3), target(6, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
    for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] = standard_normal(rng);
    worst = std::max(worst, gradcheck_max_err(p, x, target, 1e-5));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("flat parameter views round-trip") {
  Rng rng(1);
  NetworkParams p = make_network(2, 2, {3}, rng);
  const Vec v = to_vector(p);
  NetworkParams q = p;
  from_vector(q, v);
  CHECK((to_vector(q) - v).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS(from_vector(q, Vec::Zero(v.size() + 1)));
}

TEST_CASE("json round-trip is bit exact") {
  Rng rng(3);
  NetworkParams p = make_network(5, 4, {6}, rng);
  const NetworkParams q = network_from_json(to_json(p));
  CHECK((to_vector(p) - to_vector(q)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(q.log_var_min == p.log_var_min);
  CHECK(q.log_var_max == p.log_var_max);
}
