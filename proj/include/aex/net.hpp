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

#ifndef AEX_NET_HPP
#define AEX_NET_HPP

#include <nlohmann/json.hpp>

#include "aex/common.hpp"

namespace aex {

inline constexpr double kLeakySlope = 0.01;

struct DenseLayer {
  Mat W;  // (out x in)
  Vec b;  // (out)
};

/// Dense feedforward net with leaky-rectifier hidden layers and two linear
/// heads: a mean head and a log-variance head of equal width. The
/// log-variance output is clamped to [log_var_min, log_var_max], which keeps
/// every predicted variance strictly positive and finite.
struct NetworkParams {
  std::vector<DenseLayer> hidden;
  DenseLayer mean_head;
  DenseLayer log_var_head;
  double log_var_min = -10.0;
  double log_var_max = 4.0;

  int in_dim() const { return hidden.empty() ? static_cast<int>(mean_head.W.cols()) : static_cast<int>(hidden.front().W.cols()); }
  int out_dim() const { return static_cast<int>(mean_head.W.rows()); }
};

/// Gradients (and Adam moments) mirror the parameter shapes exactly.
struct NetworkGrads {
  std::vector<DenseLayer> hidden;
  DenseLayer mean_head;
  DenseLayer log_var_head;
};

inline NetworkGrads zeros_like(const NetworkParams& p) {
  NetworkGrads g;
  g.hidden.reserve(p.hidden.size());
  for (const auto& l : p.hidden)
    g.hidden.push_back({Mat::Zero(l.W.rows(), l.W.cols()), Vec::Zero(l.b.size())});
  g.mean_head = {Mat::Zero(p.mean_head.W.rows(), p.mean_head.W.cols()), Vec::Zero(p.mean_head.b.size())};
  g.log_var_head = {Mat::Zero(p.log_var_head.W.rows(), p.log_var_head.W.cols()), Vec::Zero(p.log_var_head.b.size())};
  return g;
}

/// Fan-in-scaled uniform init. Per-member seed streams are the sole source
/// of ensemble diversity.
inline NetworkParams make_network(int in_dim, int out_dim, const std::vector<int>& hidden_widths,
                                  Rng& rng, double log_var_min = -10.0, double log_var_max = 4.0) {
  auto init_layer = [&](int out, int in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer l{Mat(out, in), Vec(out)};
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) l.W(r, c) = (2.0 * uniform01(rng) - 1.0) * bound;
    for (int r = 0; r < out; ++r) l.b[r] = (2.0 * uniform01(rng) - 1.0) * bound;
    return l;
  };
  NetworkParams p;
  p.log_var_min = log_var_min;
  p.log_var_max = log_var_max;
  int prev = in_dim;
  for (int w : hidden_widths) {
    p.hidden.push_back(init_layer(w, prev));
    prev = w;
  }
  p.mean_head = init_layer(out_dim, prev);
  p.log_var_head = init_layer(out_dim, prev);
  return p;
}

inline Mat leaky_relu(const Mat& x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
}

struct ForwardCache {
  std::vector<Mat> pre;   // pre-activation of each hidden layer (batch x width)
  std::vector<Mat> post;  // post-activation, post[0] is the input batch
  Mat mean;               // (batch x out)
  Mat log_var;            // clamped, (batch x out)
  Mat log_var_raw;        // before clamping, needed for the clamp gradient
};

/// Batched forward pass; rows of `x` are samples.
inline ForwardCache forward(const NetworkParams& p, const Mat& x) {
  ForwardCache c;
  c.post.push_back(x);
  for (const auto& l : p.hidden) {
    c.pre.push_back((c.post.back() * l.W.transpose()).rowwise() + l.b.transpose());
    c.post.push_back(leaky_relu(c.pre.back()));
  }
  const Mat& h = c.post.back();
  c.mean = (h * p.mean_head.W.transpose()).rowwise() + p.mean_head.b.transpose();
  c.log_var_raw = (h * p.log_var_head.W.transpose()).rowwise() + p.log_var_head.b.transpose();
  c.log_var = c.log_var_raw.cwiseMax(p.log_var_min).cwiseMin(p.log_var_max);
  return c;
}

/// Backward pass accumulating into `g`. Inputs are treated as constants
/// (no gradient w.r.t. x is produced); the multi-step training rule never
/// needs one. The clamp on the log-variance head zeroes gradients at
/// saturation.
inline void backward(const NetworkParams& p, const ForwardCache& c,
                     const Mat& d_mean, const Mat& d_log_var, NetworkGrads& g) {
  Mat d_lv = d_log_var;
  for (Eigen::Index i = 0; i < d_lv.rows(); ++i)
    for (Eigen::Index j = 0; j < d_lv.cols(); ++j)
      if (c.log_var_raw(i, j) <= p.log_var_min || c.log_var_raw(i, j) >= p.log_var_max)
        d_lv(i, j) = 0.0;

  const Mat& h = c.post.back();
  g.mean_head.W.noalias() += d_mean.transpose() * h;
  g.mean_head.b += d_mean.colwise().sum().transpose();
  g.log_var_head.W.noalias() += d_lv.transpose() * h;
  g.log_var_head.b += d_lv.colwise().sum().transpose();

  Mat dh = d_mean * p.mean_head.W + d_lv * p.log_var_head.W;
  for (int li = static_cast<int>(p.hidden.size()) - 1; li >= 0; --li) {
    Mat dpre = dh.cwiseProduct(c.pre[li].unaryExpr(
        [](double v) { return v > 0.0 ? 1.0 : kLeakySlope; }));
    g.hidden[li].W.noalias() += dpre.transpose() * c.post[li];
    g.hidden[li].b += dpre.colwise().sum().transpose();
    if (li > 0) dh = dpre * p.hidden[li].W;
  }
}

// --- flat parameter views (finite-difference checks, optimizer-agnostic io)

inline Eigen::Index param_count(const NetworkParams& p) {
  Eigen::Index n = 0;
  for (const auto& l : p.hidden) n += l.W.size() + l.b.size();
  n += p.mean_head.W.size() + p.mean_head.b.size();
  n += p.log_var_head.W.size() + p.log_var_head.b.size();
  return n;
}

namespace detail {
template <typename LayerSeq, typename Fn>
void for_each_layer(LayerSeq& s, Fn&& fn) {
  for (auto& l : s.hidden) fn(l);
  fn(s.mean_head);
  fn(s.log_var_head);
}
}  // namespace detail

inline Vec to_vector(const NetworkParams& p) {
  Vec out(param_count(p));
  Eigen::Index k = 0;
  detail::for_each_layer(p, [&](const DenseLayer& l) {
    out.segment(k, l.W.size()) = Eigen::Map<const Vec>(l.W.data(), l.W.size());
    k += l.W.size();
    out.segment(k, l.b.size()) = l.b;
    k += l.b.size();
  });
  return out;
}

inline Vec to_vector(const NetworkGrads& g) {
  Eigen::Index n = 0;
  detail::for_each_layer(g, [&](const DenseLayer& l) { n += l.W.size() + l.b.size(); });
  Vec out(n);
  Eigen::Index k = 0;
  detail::for_each_layer(g, [&](const DenseLayer& l) {
    out.segment(k, l.W.size()) = Eigen::Map<const Vec>(l.W.data(), l.W.size());
    k += l.W.size();
    out.segment(k, l.b.size()) = l.b;
    k += l.b.size();
  });
  return out;
}

inline void from_vector(NetworkParams& p, const Vec& v) {
  if (v.size() != param_count(p)) throw std::invalid_argument("from_vector: size mismatch");
  Eigen::Index k = 0;
  detail::for_each_layer(p, [&](DenseLayer& l) {
    Eigen::Map<Vec>(l.W.data(), l.W.size()) = v.segment(k, l.W.size());
    k += l.W.size();
    l.b = v.segment(k, l.b.size());
    k += l.b.size();
  });
}

// --- serialization

inline nlohmann::json to_json(const DenseLayer& l) {
  nlohmann::json j;
  j["rows"] = l.W.rows();
  j["cols"] = l.W.cols();
  j["W"] = std::vector<double>(l.W.data(), l.W.data() + l.W.size());
  j["b"] = std::vector<double>(l.b.data(), l.b.data() + l.b.size());
  return j;
}

inline DenseLayer dense_layer_from_json(const nlohmann::json& j) {
  DenseLayer l;
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto w = j.at("W").get<std::vector<double>>();
  const auto b = j.at("b").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(w.size()) != rows * cols) throw std::runtime_error("bad layer blob");
  l.W = Eigen::Map<const Mat>(w.data(), rows, cols);
  l.b = Eigen::Map<const Vec>(b.data(), static_cast<Eigen::Index>(b.size()));
  return l;
}

inline nlohmann::json to_json(const NetworkParams& p) {
  nlohmann::json j;
  j["hidden"] = nlohmann::json::array();
  for (const auto& l : p.hidden) j["hidden"].push_back(to_json(l));
  j["mean_head"] = to_json(p.mean_head);
  j["log_var_head"] = to_json(p.log_var_head);
  j["log_var_min"] = p.log_var_min;
  j["log_var_max"] = p.log_var_max;
  return j;
}

inline NetworkParams network_from_json(const nlohmann::json& j) {
  NetworkParams p;
  for (const auto& l : j.at("hidden")) p.hidden.push_back(dense_layer_from_json(l));
  p.mean_head = dense_layer_from_json(j.at("mean_head"));
  p.log_var_head = dense_layer_from_json(j.at("log_var_head"));
  p.log_var_min = j.at("log_var_min").get<double>();
  p.log_var_max = j.at("log_var_max").get<double>();
  return p;
}

// --- diagonal Gaussian log-density pieces

/// Sum over components of ln N(x; mean, exp(log_var)) for each row.
inline Vec gaussian_log_density_rows(const Mat& x, const Mat& mean, const Mat& log_var) {
  const Mat diff = x - mean;
  const Mat inv_var = (-log_var).array().exp();
  return (-0.5 * (diff.array().square() * inv_var.array() + log_var.array() + kLnTwoPi))
      .rowwise()
      .sum();
}

/// Gradients of the summed log-density w.r.t. the mean and log-var outputs.
inline void gaussian_log_density_grads(const Mat& x, const Mat& mean, const Mat& log_var,
                                       Mat& d_mean, Mat& d_log_var) {
  const Mat diff = x - mean;
  const Mat inv_var = (-log_var).array().exp();
  d_mean = diff.cwiseProduct(inv_var);
  d_log_var = 0.5 * (diff.array().square() * inv_var.array() - 1.0).matrix();
}

}  // namespace aex

#endif  // AEX_NET_HPP
