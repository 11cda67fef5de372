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

#ifndef AEX_ENSEMBLE_HPP
#define AEX_ENSEMBLE_HPP

#include <algorithm>
#include <optional>

#include "aex/net.hpp"
#include "aex/replay.hpp"

namespace aex {

enum class VarianceMode { Fixed, Learned };

/// What to do when a model rollout produces a non-finite or runaway state.
enum class BlowupPolicy { ClampToBox, Abort };

struct EnsembleConfig {
  int state_dim = 0;
  int action_dim = 0;
  int num_members = 5;
  std::vector<int> dyn_hidden = {64, 64};
  std::vector<int> rew_hidden = {64};
  VarianceMode variance_mode = VarianceMode::Fixed;
  double sigma_const = 0.001;
  double log_var_min = -10.0;
  double log_var_max = 4.0;
  // Rollout sanity box: predicted states outside [-state_clamp, state_clamp]
  // are clamped (or the trajectory aborted, depending on policy).
  double state_clamp = 10.0;
  BlowupPolicy blowup_policy = BlowupPolicy::ClampToBox;
};

struct ModelTrainingConfig {
  int horizon = 20;  // H, also the maximum multi-step distance
  double learning_rate = 1e-3;
  int batch_size = 64;  // windows per optimizer step
  int steps_per_transition = 20;
  int max_steps_per_fit = 600;
};

/// Step-distance weights: beta_1 = 0.5, beta_m = 1/(2(H-1)) for m > 1,
/// degenerating to {1} when H = 1. They always sum to one.
inline Vec step_weights(int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  Vec w(horizon);
  if (horizon == 1) {
    w[0] = 1.0;
  } else {
    w[0] = 0.5;
    for (int m = 1; m < horizon; ++m) w[m] = 0.5 / static_cast<double>(horizon - 1);
  }
  return w;
}

struct GaussianPrediction {
  Vec mean;
  Vec std;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  NetworkGrads m;
  NetworkGrads v;
  long step = 0;
};

inline AdamState make_adam_state(const NetworkParams& p) {
  return AdamState{zeros_like(p), zeros_like(p), 0};
}

namespace detail {
inline void adam_tensor(Mat& p, const Mat& g, Mat& m, Mat& v, double lr, const AdamConfig& c,
                        double bc1, double bc2) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v.array().matrix() + (1.0 - c.beta2) * g.cwiseProduct(g);
  p -= (lr * (m / bc1).array() / ((v / bc2).array().sqrt() + c.eps)).matrix();
}
inline void adam_tensor(Vec& p, const Vec& g, Vec& m, Vec& v, double lr, const AdamConfig& c,
                        double bc1, double bc2) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v.array().matrix() + (1.0 - c.beta2) * g.cwiseProduct(g);
  p -= (lr * (m / bc1).array() / ((v / bc2).array().sqrt() + c.eps)).matrix();
}
}  // namespace detail

inline void adam_update(NetworkParams& p, const NetworkGrads& g, AdamState& s, double lr,
                        const AdamConfig& c = {}) {
  ++s.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < p.hidden.size(); ++i) {
    detail::adam_tensor(p.hidden[i].W, g.hidden[i].W, s.m.hidden[i].W, s.v.hidden[i].W, lr, c, bc1, bc2);
    detail::adam_tensor(p.hidden[i].b, g.hidden[i].b, s.m.hidden[i].b, s.v.hidden[i].b, lr, c, bc1, bc2);
  }
  detail::adam_tensor(p.mean_head.W, g.mean_head.W, s.m.mean_head.W, s.v.mean_head.W, lr, c, bc1, bc2);
  detail::adam_tensor(p.mean_head.b, g.mean_head.b, s.m.mean_head.b, s.v.mean_head.b, lr, c, bc1, bc2);
  detail::adam_tensor(p.log_var_head.W, g.log_var_head.W, s.m.log_var_head.W, s.v.log_var_head.W, lr, c, bc1, bc2);
  detail::adam_tensor(p.log_var_head.b, g.log_var_head.b, s.m.log_var_head.b, s.v.log_var_head.b, lr, c, bc1, bc2);
}

/// One particle of the parameter belief: a dynamics net, a reward net, their
/// optimizer states and a private rng stream. Members never share state.
struct EnsembleMember {
  NetworkParams dynamics;
  NetworkParams reward;
  AdamState dyn_opt;
  AdamState rew_opt;
  Rng rng;
  std::uint64_t seed = 0;
};

struct Ensemble {
  EnsembleConfig cfg;
  std::vector<EnsembleMember> members;
};

inline Ensemble make_ensemble(const EnsembleConfig& cfg, std::uint64_t seed) {
  if (cfg.num_members < 2)
    throw std::invalid_argument("ensemble needs at least 2 members");
  if (cfg.state_dim < 1 || cfg.action_dim < 1)
    throw std::invalid_argument("state/action dims must be positive");
  Ensemble e;
  e.cfg = cfg;
  e.members.reserve(cfg.num_members);
  const int in_dim = cfg.state_dim + cfg.action_dim;
  for (int i = 0; i < cfg.num_members; ++i) {
    EnsembleMember m;
    m.seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    m.rng.seed(m.seed);
    m.dynamics = make_network(in_dim, cfg.state_dim, cfg.dyn_hidden, m.rng, cfg.log_var_min, cfg.log_var_max);
    m.reward = make_network(in_dim, 1, cfg.rew_hidden, m.rng, cfg.log_var_min, cfg.log_var_max);
    m.dyn_opt = make_adam_state(m.dynamics);
    m.rew_opt = make_adam_state(m.reward);
    e.members.push_back(std::move(m));
  }
  return e;
}

namespace detail {
inline Mat with_fixed_variance(const EnsembleConfig& cfg, const Mat& log_var) {
  if (cfg.variance_mode == VarianceMode::Learned) return log_var;
  return Mat::Constant(log_var.rows(), log_var.cols(), 2.0 * std::log(cfg.sigma_const));
}
}  // namespace detail

/// Batched mean/log-variance of the next-state model at rows (state, action).
inline std::pair<Mat, Mat> dyn_eval(const EnsembleMember& m, const EnsembleConfig& cfg, const Mat& x) {
  ForwardCache c = forward(m.dynamics, x);
  return {std::move(c.mean), detail::with_fixed_variance(cfg, c.log_var)};
}

/// Batched mean/log-variance of the reward model at rows (state, action).
inline std::pair<Mat, Mat> rew_eval(const EnsembleMember& m, const EnsembleConfig& cfg, const Mat& x) {
  ForwardCache c = forward(m.reward, x);
  return {std::move(c.mean), detail::with_fixed_variance(cfg, c.log_var)};
}

/// Single-input prediction. The dynamics output is the distribution over the
/// next state given (state, action); the reward output conditions on the
/// same pair.
inline std::pair<GaussianPrediction, GaussianPrediction> predict(
    const EnsembleMember& m, const EnsembleConfig& cfg, const Vec& state, const Vec& action) {
  if (state.size() != cfg.state_dim || action.size() != cfg.action_dim)
    throw std::invalid_argument("predict: dimension mismatch");
  if (!state.allFinite() || !action.allFinite())
    throw std::invalid_argument("predict: non-finite input");
  Mat x(1, state.size() + action.size());
  x << state.transpose(), action.transpose();
  auto [sm, slv] = dyn_eval(m, cfg, x);
  auto [rm, rlv] = rew_eval(m, cfg, x);
  GaussianPrediction s{sm.row(0).transpose(), (0.5 * slv.row(0)).array().exp().transpose()};
  GaussianPrediction r{rm.row(0).transpose(), (0.5 * rlv.row(0)).array().exp().transpose()};
  return {std::move(s), std::move(r)};
}

struct RolloutResult {
  Mat states;   // (T+1 x state_dim), row 0 = start state
  Vec rewards;  // (T)
  bool blown = false;  // only set under BlowupPolicy::Abort
};

/// Sequential sampled rollout of a single member. Deterministic given rng.
inline RolloutResult rollout(const EnsembleMember& m, const EnsembleConfig& cfg, const Vec& start,
                             const Mat& actions, Rng& rng) {
  if (start.size() != cfg.state_dim) throw std::invalid_argument("rollout: bad start state");
  if (actions.rows() > 0 && actions.cols() != cfg.action_dim)
    throw std::invalid_argument("rollout: bad action dim");
  const Eigen::Index T = actions.rows();
  RolloutResult res;
  res.states = Mat(T + 1, cfg.state_dim);
  res.states.row(0) = start.transpose();
  res.rewards = Vec::Zero(T);
  Mat x(1, cfg.state_dim + cfg.action_dim);
  for (Eigen::Index t = 0; t < T; ++t) {
    x << res.states.row(t), actions.row(t);
    auto [sm, slv] = dyn_eval(m, cfg, x);
    Vec next = sm.row(0).transpose() +
               (0.5 * slv.row(0)).array().exp().matrix().transpose().cwiseProduct(
                   normal_vec(rng, cfg.state_dim));
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > cfg.state_clamp) {
      if (cfg.blowup_policy == BlowupPolicy::Abort) {
        res.blown = true;
        res.states.conservativeResize(t + 1, Eigen::NoChange);
        res.rewards.conservativeResize(t);
        return res;
      }
      next = next.unaryExpr([&](double v) {
        if (!std::isfinite(v)) return 0.0;
        return std::clamp(v, -cfg.state_clamp, cfg.state_clamp);
      });
    }
    res.states.row(t + 1) = next.transpose();
    x << res.states.row(t + 1), actions.row(t);
    auto [rm, rlv] = rew_eval(m, cfg, x);
    res.rewards[t] = rm(0, 0) + std::exp(0.5 * rlv(0, 0)) * standard_normal(rng);
  }
  return res;
}

// --- training losses ----------------------------------------------------

namespace detail {

struct EpisodeWindow {
  Mat states;   // (T+1 x s)
  Mat actions;  // (T x a)
  Vec rewards;  // (T)
};

inline EpisodeWindow make_window(const std::vector<Transition>& ep, std::size_t start, std::size_t len) {
  EpisodeWindow w;
  const Eigen::Index T = static_cast<Eigen::Index>(len);
  const Eigen::Index sd = ep[start].prev_state.size();
  const Eigen::Index ad = ep[start].action.size();
  w.states = Mat(T + 1, sd);
  w.actions = Mat(T, ad);
  w.rewards = Vec(T);
  w.states.row(0) = ep[start].prev_state.transpose();
  for (Eigen::Index t = 0; t < T; ++t) {
    const Transition& tr = ep[start + t];
    w.states.row(t + 1) = tr.next_state.transpose();
    w.actions.row(t) = tr.action.transpose();
    w.rewards[t] = tr.reward;
  }
  return w;
}

}  // namespace detail

/// Multi-step prediction loss over one contiguous episode window, with
/// analytic gradients accumulated into `dyn_grads` / `rew_grads`.
///
/// For each step distance m the window's states are re-predicted m steps
/// ahead from the model's own samples; the per-distance log-likelihoods are
/// combined with step_weights(). Sampled intermediate states are treated as
/// constants when differentiating the following network evaluation, so the
/// gradient never flows through the transition model more than once per
/// sample. Returns the negated (to-be-minimized) objective.
inline double multi_step_loss(const EnsembleMember& m, const EnsembleConfig& cfg,
                              const ModelTrainingConfig& tcfg, const detail::EpisodeWindow& w,
                              Rng& rng, NetworkGrads& dyn_grads, NetworkGrads& rew_grads) {
  const Eigen::Index T = w.actions.rows();
  if (T < 1) throw std::invalid_argument("multi_step_loss: empty episode window");
  const int H = tcfg.horizon;
  const Vec beta = step_weights(H);
  const Eigen::Index sd = cfg.state_dim;
  const Eigen::Index ad = cfg.action_dim;
  const bool learned_var = cfg.variance_mode == VarianceMode::Learned;

  // shat[i] row tau holds the i-step re-prediction of s_tau; shat[1] are the
  // observed states themselves. Row tau of shat[i] is valid for tau >= i-1.
  std::vector<Mat> shat(static_cast<std::size_t>(std::min<Eigen::Index>(H, T)) + 1);
  shat[1] = w.states;
  const int max_m = static_cast<int>(std::min<Eigen::Index>(H, T));
  for (int i = 2; i <= max_m; ++i) {
    const Eigen::Index n = T - i + 2;  // tau = i-1 .. T
    Mat x(n, sd + ad);
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::Index tau = i - 1 + r;
      x.row(r) << shat[i - 1].row(tau - 1), w.actions.row(tau - 1);
    }
    auto [mean, log_var] = dyn_eval(m, cfg, x);
    shat[i] = Mat(T + 1, sd);
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::Index tau = i - 1 + r;
      shat[i].row(tau) =
          mean.row(r) + ((0.5 * log_var.row(r)).array().exp() *
                         normal_vec(rng, sd).transpose().array()).matrix();
    }
  }

  double objective = 0.0;
  for (int mm = 1; mm <= max_m; ++mm) {
    const Eigen::Index n = T - mm + 1;  // tau = mm .. T
    const double scale = beta[mm - 1] / static_cast<double>(n);

    // Dynamics term: predict observed s_tau from shat[mm]_{tau-1}.
    {
      Mat x(n, sd + ad), target(n, sd);
      for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::Index tau = mm + r;
        x.row(r) << shat[mm].row(tau - 1), w.actions.row(tau - 1);
        target.row(r) = w.states.row(tau);
      }
      ForwardCache c = forward(m.dynamics, x);
      Mat log_var = detail::with_fixed_variance(cfg, c.log_var);
      objective += scale * gaussian_log_density_rows(target, c.mean, log_var).sum();
      Mat d_mean, d_log_var;
      gaussian_log_density_grads(target, c.mean, log_var, d_mean, d_log_var);
      d_mean *= -scale;  // minimize the negated objective
      d_log_var *= -scale;
      if (!learned_var) d_log_var.setZero();
      backward(m.dynamics, c, d_mean, d_log_var, dyn_grads);
    }

    // Reward term: predict observed r_tau from shat[mm]_tau.
    {
      Mat x(n, sd + ad), target(n, 1);
      for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::Index tau = mm + r;
        x.row(r) << shat[mm].row(tau), w.actions.row(tau - 1);
        target(r, 0) = w.rewards[tau - 1];
      }
      ForwardCache c = forward(m.reward, x);
      Mat log_var = detail::with_fixed_variance(cfg, c.log_var);
      objective += scale * gaussian_log_density_rows(target, c.mean, log_var).sum();
      Mat d_mean, d_log_var;
      gaussian_log_density_grads(target, c.mean, log_var, d_mean, d_log_var);
      d_mean *= -scale;
      d_log_var *= -scale;
      if (!learned_var) d_log_var.setZero();
      backward(m.reward, c, d_mean, d_log_var, rew_grads);
    }
  }
  return -objective;
}

/// Convenience overload over a transition sequence.
inline double multi_step_loss(const EnsembleMember& m, const EnsembleConfig& cfg,
                              const ModelTrainingConfig& tcfg, const std::vector<Transition>& episode,
                              Rng& rng, NetworkGrads& dyn_grads, NetworkGrads& rew_grads) {
  if (episode.empty()) throw std::invalid_argument("multi_step_loss: episode must have >= 1 transition");
  return multi_step_loss(m, cfg, tcfg, detail::make_window(episode, 0, episode.size()), rng,
                         dyn_grads, rew_grads);
}

/// Mean single-step negative log-likelihood of the whole buffer under one
/// member (dynamics + reward term per transition).
inline double single_step_nll(const EnsembleMember& m, const EnsembleConfig& cfg,
                              const ReplayBuffer& buffer) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& ep : buffer.episodes()) {
    if (ep.empty()) continue;
    const Eigen::Index T = static_cast<Eigen::Index>(ep.size());
    Mat x(T, cfg.state_dim + cfg.action_dim), xs(T, cfg.state_dim + cfg.action_dim);
    Mat target_s(T, cfg.state_dim), target_r(T, 1);
    for (Eigen::Index t = 0; t < T; ++t) {
      x.row(t) << ep[t].prev_state.transpose(), ep[t].action.transpose();
      xs.row(t) << ep[t].next_state.transpose(), ep[t].action.transpose();
      target_s.row(t) = ep[t].next_state.transpose();
      target_r(t, 0) = ep[t].reward;
    }
    auto [sm, slv] = dyn_eval(m, cfg, x);
    auto [rm, rlv] = rew_eval(m, cfg, xs);
    total -= gaussian_log_density_rows(target_s, sm, slv).sum();
    total -= gaussian_log_density_rows(target_r, rm, rlv).sum();
    count += ep.size();
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

struct FitReport {
  std::vector<std::vector<double>> member_losses;  // per member, per optimizer step
  int steps_per_member = 0;
};

/// Independent per-member optimization over episode-aligned windows, for
/// min(steps_per_transition * |buffer|, max_steps_per_fit) optimizer steps.
/// Members only consume their own rng streams, so member results are
/// invariant to the order in which members are trained.
inline FitReport fit(Ensemble& e, const ReplayBuffer& buffer, const ModelTrainingConfig& tcfg) {
  if (buffer.empty()) throw std::invalid_argument("fit: replay buffer is empty");
  const long want = static_cast<long>(tcfg.steps_per_transition) *
                    static_cast<long>(buffer.total_transitions());
  const int steps = static_cast<int>(std::min<long>(want, tcfg.max_steps_per_fit));
  FitReport report;
  report.steps_per_member = steps;
  report.member_losses.resize(e.members.size());

  for (std::size_t mi = 0; mi < e.members.size(); ++mi) {
    EnsembleMember& m = e.members[mi];
    auto& losses = report.member_losses[mi];
    losses.reserve(steps);
    for (int step = 0; step < steps; ++step) {
      NetworkGrads dg = zeros_like(m.dynamics);
      NetworkGrads rg = zeros_like(m.reward);
      double loss = 0.0;
      for (int b = 0; b < tcfg.batch_size; ++b) {
        const std::size_t ei = static_cast<std::size_t>(m.rng() % buffer.num_episodes());
        const auto& ep = buffer.episode(ei);
        const std::size_t start = static_cast<std::size_t>(m.rng() % ep.size());
        const std::size_t len = std::min<std::size_t>(tcfg.horizon, ep.size() - start);
        loss += multi_step_loss(m, e.cfg, tcfg, detail::make_window(ep, start, len), m.rng, dg, rg);
      }
      const double inv_b = 1.0 / static_cast<double>(tcfg.batch_size);
      loss *= inv_b;
      auto scale = [&](NetworkGrads& g) {
        for (auto& l : g.hidden) { l.W *= inv_b; l.b *= inv_b; }
        g.mean_head.W *= inv_b; g.mean_head.b *= inv_b;
        g.log_var_head.W *= inv_b; g.log_var_head.b *= inv_b;
      };
      scale(dg);
      scale(rg);
      adam_update(m.dynamics, dg, m.dyn_opt, tcfg.learning_rate);
      adam_update(m.reward, rg, m.rew_opt, tcfg.learning_rate);
      losses.push_back(loss);
    }
  }
  return report;
}

// --- checkpoint io -------------------------------------------------------

inline nlohmann::json to_json(const AdamState& s) {
  auto grads_json = [](const NetworkGrads& g) {
    nlohmann::json j;
    j["hidden"] = nlohmann::json::array();
    for (const auto& l : g.hidden) j["hidden"].push_back(to_json(l));
    j["mean_head"] = to_json(g.mean_head);
    j["log_var_head"] = to_json(g.log_var_head);
    return j;
  };
  return nlohmann::json{{"m", grads_json(s.m)}, {"v", grads_json(s.v)}, {"step", s.step}};
}

inline AdamState adam_state_from_json(const nlohmann::json& j) {
  auto grads = [](const nlohmann::json& jg) {
    NetworkGrads g;
    for (const auto& l : jg.at("hidden")) g.hidden.push_back(dense_layer_from_json(l));
    g.mean_head = dense_layer_from_json(jg.at("mean_head"));
    g.log_var_head = dense_layer_from_json(jg.at("log_var_head"));
    return g;
  };
  return AdamState{grads(j.at("m")), grads(j.at("v")), j.at("step").get<long>()};
}

inline nlohmann::json to_json(const EnsembleConfig& c) {
  return nlohmann::json{{"state_dim", c.state_dim},
                        {"action_dim", c.action_dim},
                        {"num_members", c.num_members},
                        {"dyn_hidden", c.dyn_hidden},
                        {"rew_hidden", c.rew_hidden},
                        {"variance_mode", c.variance_mode == VarianceMode::Fixed ? "fixed" : "learned"},
                        {"sigma_const", c.sigma_const},
                        {"log_var_min", c.log_var_min},
                        {"log_var_max", c.log_var_max},
                        {"state_clamp", c.state_clamp},
                        {"blowup_policy", c.blowup_policy == BlowupPolicy::ClampToBox ? "clamp" : "abort"}};
}

inline EnsembleConfig ensemble_config_from_json(const nlohmann::json& j) {
  EnsembleConfig c;
  c.state_dim = j.at("state_dim").get<int>();
  c.action_dim = j.at("action_dim").get<int>();
  c.num_members = j.at("num_members").get<int>();
  c.dyn_hidden = j.at("dyn_hidden").get<std::vector<int>>();
  c.rew_hidden = j.at("rew_hidden").get<std::vector<int>>();
  c.variance_mode = j.at("variance_mode").get<std::string>() == "fixed" ? VarianceMode::Fixed
                                                                        : VarianceMode::Learned;
  c.sigma_const = j.at("sigma_const").get<double>();
  c.log_var_min = j.at("log_var_min").get<double>();
  c.log_var_max = j.at("log_var_max").get<double>();
  c.state_clamp = j.at("state_clamp").get<double>();
  c.blowup_policy = j.at("blowup_policy").get<std::string>() == "clamp" ? BlowupPolicy::ClampToBox
                                                                        : BlowupPolicy::Abort;
  return c;
}

inline nlohmann::json to_json(const Ensemble& e, int schema_version = 1) {
  nlohmann::json j;
  j["schema_version"] = schema_version;
  j["config"] = to_json(e.cfg);
  j["members"] = nlohmann::json::array();
  for (const auto& m : e.members) {
    j["members"].push_back(nlohmann::json{{"dynamics", to_json(m.dynamics)},
                                          {"reward", to_json(m.reward)},
                                          {"dyn_opt", to_json(m.dyn_opt)},
                                          {"rew_opt", to_json(m.rew_opt)},
                                          {"rng", rng_state_string(m.rng)},
                                          {"seed", m.seed}});
  }
  return j;
}

inline Ensemble ensemble_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != 1) throw std::runtime_error("unknown checkpoint schema");
  Ensemble e;
  e.cfg = ensemble_config_from_json(j.at("config"));
  for (const auto& jm : j.at("members")) {
    EnsembleMember m;
    m.dynamics = network_from_json(jm.at("dynamics"));
    m.reward = network_from_json(jm.at("reward"));
    m.dyn_opt = adam_state_from_json(jm.at("dyn_opt"));
    m.rew_opt = adam_state_from_json(jm.at("rew_opt"));
    rng_state_from_string(m.rng, jm.at("rng").get<std::string>());
    m.seed = jm.at("seed").get<std::uint64_t>();
    e.members.push_back(std::move(m));
  }
  return e;
}

}  // namespace aex

#endif  // AEX_ENSEMBLE_HPP
