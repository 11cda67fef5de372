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

#ifndef AEX_AGENT_HPP
#define AEX_AGENT_HPP

#include "aex/env.hpp"
#include "aex/planner.hpp"

namespace aex {

/// Exploration weight schedule. Adaptive mode recomputes
/// beta = alpha * f(r_1, ..., r_N) + gamma on every step from the per-step
/// rewards of the entire training; the running max starts at 0 (empty
/// history convention, so beta = gamma until the first positive reward).
struct BetaSchedule {
  enum class Mode { Constant, Adaptive };
  enum class Aggregator { Max, RunningAverage };

  Mode mode = Mode::Constant;
  double beta0 = 1e6;
  double alpha = 1e8;
  double gamma = 2e5;
  Aggregator aggregator = Aggregator::Max;

  double max_reward = 0.0;
  double reward_sum = 0.0;
  long reward_count = 0;

  void observe(double reward) {
    max_reward = std::max(max_reward, reward);
    reward_sum += reward;
    ++reward_count;
  }

  double value() const {
    if (mode == Mode::Constant) return beta0;
    const double f = aggregator == Aggregator::Max
                         ? max_reward
                         : (reward_count ? reward_sum / static_cast<double>(reward_count) : 0.0);
    return alpha * f + gamma;
  }
};

inline nlohmann::json to_json(const BetaSchedule& b) {
  return nlohmann::json{{"mode", b.mode == BetaSchedule::Mode::Constant ? "constant" : "adaptive"},
                        {"beta0", b.beta0},
                        {"alpha", b.alpha},
                        {"gamma", b.gamma},
                        {"aggregator", b.aggregator == BetaSchedule::Aggregator::Max ? "max" : "running_average"},
                        {"max_reward", b.max_reward},
                        {"reward_sum", b.reward_sum},
                        {"reward_count", b.reward_count}};
}

inline BetaSchedule beta_schedule_from_json(const nlohmann::json& j) {
  BetaSchedule b;
  b.mode = j.at("mode").get<std::string>() == "constant" ? BetaSchedule::Mode::Constant
                                                         : BetaSchedule::Mode::Adaptive;
  b.beta0 = j.at("beta0").get<double>();
  b.alpha = j.at("alpha").get<double>();
  b.gamma = j.at("gamma").get<double>();
  b.aggregator = j.at("aggregator").get<std::string>() == "max"
                     ? BetaSchedule::Aggregator::Max
                     : BetaSchedule::Aggregator::RunningAverage;
  b.max_reward = j.at("max_reward").get<double>();
  b.reward_sum = j.at("reward_sum").get<double>();
  b.reward_count = j.at("reward_count").get<long>();
  return b;
}

struct AgentConfig {
  int episode_length = 50;  // T
  int episodes = 100;       // N
  long variance_learning_start_step = -1;  // < 0: never switch to learned variances
  bool use_intrinsic = true;               // false reproduces the purely extrinsic baseline
  EstimatorKind estimator = EstimatorKind::MI;
  BetaSchedule beta;
  PlannerConfig planner;
  ModelTrainingConfig model;
};

struct EpisodeRecord {
  std::vector<Transition> transitions;
  std::vector<Vec> observations;  // length transitions + 1
  double cumulative_reward = 0.0;
  bool aborted = false;  // env fault left a partial record
};

struct TrainLogRow {
  long step = 0;
  int episode = 0;
  double train_reward = 0.0;
  double eval_reward = 0.0;
  double beta = 0.0;
  double model_nll = 0.0;
  double intrinsic_value = 0.0;
};

/// The full training loop: MPC-controlled episodes, replay storage, per
/// episode ensemble refits, beta scheduling, interleaved beta = 0 evaluation
/// episodes.
class Agent {
 public:
  Agent(AgentConfig cfg, EnsembleConfig model_cfg, std::uint64_t seed)
      : cfg_(std::move(cfg)),
        ensemble_(make_ensemble(model_cfg, mix_seed(seed, 0))),
        memory_(50000),
        plan_rng_(mix_seed(seed, 1)),
        env_rng_(mix_seed(seed, 2)),
        eval_rng_(mix_seed(seed, 3)) {}

  const Ensemble& ensemble() const { return ensemble_; }
  Ensemble& ensemble() { return ensemble_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const PlanMemory& memory() const { return memory_; }
  PlanMemory& memory() { return memory_; }
  BetaSchedule& beta_schedule() { return beta_; }
  long total_steps() const { return total_steps_; }

  double current_beta() const { return cfg_.use_intrinsic ? beta_.value() : 0.0; }

  /// Receding-horizon MPC action: plan with memory-buffer CEM at the given
  /// beta and execute the first action of the plan. Evaluation calls never
  /// store plans.
  Vec act(const Vec& current_state, double beta, Rng& rng, bool store_plan = true) {
    ObjectiveConfig ocfg;
    ocfg.beta = beta;
    ocfg.kind = cfg_.estimator;
    ocfg.worst_objective = cfg_.planner.worst_objective;
    const BatchObjective objective = make_model_objective(ensemble_, current_state, ocfg, rng);
    const PlanDistribution plan =
        cem_plan_with_memory(objective, current_state, memory_, cfg_.planner, rng, store_plan);
    return plan.mu.head(cfg_.planner.action_dim);
  }

  /// One episode of fixed length. Training mode stores plans, feeds the beta
  /// schedule and counts steps; evaluation mode runs beta = 0 and touches
  /// neither the replay buffer nor the plan memory.
  EpisodeRecord run_episode(const Env& env, Rng& rng, bool eval) {
    EpisodeRecord rec;
    EnvState state = env.reset(rng);
    rec.observations.push_back(state.observe());
    const int episode_id = static_cast<int>(buffer_.num_episodes());
    for (int t = 0; t < cfg_.episode_length; ++t) {
      const double beta = eval ? 0.0 : current_beta();
      const Vec obs = state.observe();
      const Vec action = act(obs, beta, rng, /*store_plan=*/!eval);
      StepResult sr;
      try {
        sr = env.step(state, action);
      } catch (const std::exception&) {
        rec.aborted = true;
        break;
      }
      Transition tr;
      tr.prev_state = obs;
      tr.action = action.cwiseMax(-1.0).cwiseMin(1.0);
      tr.next_state = sr.state.observe();
      tr.reward = sr.reward;
      tr.episode_id = episode_id;
      tr.step_index = t;
      rec.transitions.push_back(std::move(tr));
      rec.observations.push_back(sr.state.observe());
      rec.cumulative_reward += sr.reward;
      state = sr.state;
      if (!eval) {
        beta_.observe(sr.reward);
        ++total_steps_;
        if (cfg_.variance_learning_start_step >= 0 &&
            total_steps_ >= cfg_.variance_learning_start_step)
          ensemble_.cfg.variance_mode = VarianceMode::Learned;
      }
    }
    return rec;
  }

  using EpisodeCallback =
      std::function<void(int episode, const EpisodeRecord& train_rec, const EpisodeRecord& eval_rec)>;

  /// Alternates data collection and ensemble refits for the configured
  /// number of episodes; runs one beta = 0 evaluation episode per training
  /// episode.
  std::vector<TrainLogRow> train(const Env& env, const EpisodeCallback& on_episode = nullptr) {
    std::vector<TrainLogRow> log;
    for (int e = 0; e < cfg_.episodes; ++e) {
      EpisodeRecord train_rec = run_episode(env, plan_rng_, /*eval=*/false);
      if (!train_rec.transitions.empty()) buffer_.add_episode(train_rec.transitions);
      if (!buffer_.empty()) fit(ensemble_, buffer_, cfg_.model);
      EpisodeRecord eval_rec = run_episode(env, eval_rng_, /*eval=*/true);

      TrainLogRow row;
      row.step = total_steps_;
      row.episode = e;
      row.train_reward = train_rec.cumulative_reward;
      row.eval_reward = eval_rec.cumulative_reward;
      row.beta = current_beta();
      row.model_nll = mean_model_nll();
      row.intrinsic_value = residual_intrinsic(env);
      log.push_back(row);
      if (on_episode) on_episode(e, train_rec, eval_rec);
    }
    return log;
  }

  nlohmann::json checkpoint() const {
    return nlohmann::json{{"schema_version", 1},
                          {"ensemble", to_json(ensemble_)},
                          {"plan_memory", to_json(memory_)},
                          {"replay_buffer", to_json(buffer_)},
                          {"beta", to_json(beta_)},
                          {"total_steps", total_steps_},
                          {"plan_rng", rng_state_string(plan_rng_)},
                          {"env_rng", rng_state_string(env_rng_)},
                          {"eval_rng", rng_state_string(eval_rng_)}};
  }

  void restore(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != 1) throw std::runtime_error("unknown checkpoint schema");
    ensemble_ = ensemble_from_json(j.at("ensemble"));
    memory_ = plan_memory_from_json(j.at("plan_memory"));
    buffer_ = replay_buffer_from_json(j.at("replay_buffer"));
    beta_ = beta_schedule_from_json(j.at("beta"));
    total_steps_ = j.at("total_steps").get<long>();
    rng_state_from_string(plan_rng_, j.at("plan_rng").get<std::string>());
    rng_state_from_string(env_rng_, j.at("env_rng").get<std::string>());
    rng_state_from_string(eval_rng_, j.at("eval_rng").get<std::string>());
  }

  Rng& env_rng() { return env_rng_; }
  Rng& plan_rng() { return plan_rng_; }
  Rng& eval_rng() { return eval_rng_; }
  const AgentConfig& config() const { return cfg_; }

 private:
  double mean_model_nll() const {
    if (buffer_.empty()) return 0.0;
    double total = 0.0;
    for (const auto& m : ensemble_.members) total += single_step_nll(m, ensemble_.cfg, buffer_);
    return total / static_cast<double>(ensemble_.members.size());
  }

  /// Diagnostic: remaining ensemble disagreement around the start state,
  /// measured as the estimator value of a zero-action plan.
  double residual_intrinsic(const Env& env) {
    if (!cfg_.use_intrinsic) return 0.0;
    Rng probe_rng(mix_seed(0xd1a6u, static_cast<std::uint64_t>(total_steps_)));
    EnvState start = env.reset(probe_rng);
    const Mat actions = Mat::Zero(cfg_.planner.horizon, cfg_.planner.action_dim);
    TrajectoryBatch batch = sample_trajectory_batch(ensemble_, start.observe(), actions, probe_rng);
    const Mat L = cross_log_density_matrix(batch);
    return cfg_.estimator == EstimatorKind::MI ? nmc_mutual_information(L)
                                               : nmc_lautum_information(L);
  }

  AgentConfig cfg_;
  Ensemble ensemble_;
  PlanMemory memory_;
  ReplayBuffer buffer_;
  BetaSchedule beta_;
  long total_steps_ = 0;
  Rng plan_rng_;
  Rng env_rng_;
  Rng eval_rng_;
};

}  // namespace aex

#endif  // AEX_AGENT_HPP
