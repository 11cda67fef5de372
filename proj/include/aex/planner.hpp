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

#ifndef AEX_PLANNER_HPP
#define AEX_PLANNER_HPP

#include <deque>
#include <functional>
#include <numeric>

#include "aex/infogain.hpp"

namespace aex {

/// Per-timestep Gaussian over a flattened action sequence; the CEM
/// optimization variable.
struct PlanDistribution {
  Vec mu;
  Vec sigma;
};

struct PlannerConfig {
  int iterations = 12;            // n
  int population = 500;           // N
  int elites = 20;                // M
  int neighbors = 50;             // K
  int samples_per_neighbor = 10;  // S
  int horizon = 20;               // H
  int action_dim = 1;
  Vec action_low;   // per action dimension, broadcast over the horizon
  Vec action_high;
  double sigma_floor = 1e-3;  // keeps the search from collapsing to a point
  double worst_objective = -1e12;

  int flat_dim() const { return horizon * action_dim; }
};

inline PlannerConfig make_planner_config(int horizon, int action_dim, double bound = 1.0) {
  PlannerConfig c;
  c.horizon = horizon;
  c.action_dim = action_dim;
  c.action_low = Vec::Constant(action_dim, -bound);
  c.action_high = Vec::Constant(action_dim, bound);
  return c;
}

/// Objective over a batch of flattened candidate action sequences (one row
/// per candidate); returns one score per row.
using BatchObjective = std::function<Vec(const Mat&)>;

// --- plan memory -----------------------------------------------------------

/// Fixed-capacity store of (state, plan distribution) pairs with oldest-first
/// eviction and exact Euclidean nearest-neighbor queries. Used to warm-start
/// CEM with plans from the past.
class PlanMemory {
 public:
  struct Entry {
    Vec state_key;
    PlanDistribution plan;
    std::uint64_t order = 0;  // insertion counter, tie-break for queries
  };

  explicit PlanMemory(std::size_t capacity = 50000) : capacity_(capacity) {}

  void insert(Vec state_key, PlanDistribution plan) {
    entries_.push_back(Entry{std::move(state_key), std::move(plan), next_order_++});
    if (entries_.size() > capacity_) entries_.pop_front();
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<Entry>& entries() const { return entries_; }

  /// The min(K, size) stored entries closest to `state`, ties broken by
  /// insertion order.
  std::vector<const Entry*> knn_query(const Vec& state, int k) const {
    if (k < 0) throw std::invalid_argument("knn_query: K must be >= 0");
    std::vector<std::pair<double, const Entry*>> scored;
    scored.reserve(entries_.size());
    for (const auto& e : entries_)
      scored.emplace_back((e.state_key - state).squaredNorm(), &e);
    const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + want, scored.end(),
                      [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first < b.first;
                        return a.second->order < b.second->order;
                      });
    std::vector<const Entry*> out;
    out.reserve(want);
    for (std::size_t i = 0; i < want; ++i) out.push_back(scored[i].second);
    return out;
  }

 private:
  std::size_t capacity_;
  std::deque<Entry> entries_;
  std::uint64_t next_order_ = 0;
};

inline nlohmann::json to_json(const PlanMemory& mem) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : mem.entries()) {
    entries.push_back(nlohmann::json{
        {"state", std::vector<double>(e.state_key.data(), e.state_key.data() + e.state_key.size())},
        {"mu", std::vector<double>(e.plan.mu.data(), e.plan.mu.data() + e.plan.mu.size())},
        {"sigma", std::vector<double>(e.plan.sigma.data(), e.plan.sigma.data() + e.plan.sigma.size())}});
  }
  return nlohmann::json{{"capacity", mem.capacity()}, {"entries", std::move(entries)}};
}

inline PlanMemory plan_memory_from_json(const nlohmann::json& j) {
  PlanMemory mem(j.at("capacity").get<std::size_t>());
  auto vec = [](const nlohmann::json& a) {
    auto v = a.get<std::vector<double>>();
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
  };
  for (const auto& je : j.at("entries"))
    mem.insert(vec(je.at("state")), PlanDistribution{vec(je.at("mu")), vec(je.at("sigma"))});
  return mem;
}

// --- cross-entropy method ----------------------------------------------

namespace detail {

inline void sample_candidate_rows(Mat& cands, Eigen::Index first_row, Eigen::Index n_rows,
                                  const Vec& mu, const Vec& sigma, const PlannerConfig& cfg,
                                  Rng& rng) {
  const int ad = cfg.action_dim;
  for (Eigen::Index r = 0; r < n_rows; ++r)
    for (Eigen::Index d = 0; d < cands.cols(); ++d) {
      const double raw = mu[d] + sigma[d] * standard_normal(rng);
      cands(first_row + r, d) =
          std::clamp(raw, cfg.action_low[d % ad], cfg.action_high[d % ad]);
    }
}

inline std::vector<Eigen::Index> elite_indices(const Vec& scores, int m) {
  std::vector<Eigen::Index> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Stable: equal scores keep index order.
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return scores[a] > scores[b]; });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(m)));
  return idx;
}

inline void refit_to_elites(const Mat& cands, const std::vector<Eigen::Index>& elite, Vec& mu,
                            Vec& sigma, double sigma_floor) {
  const double inv_m = 1.0 / static_cast<double>(elite.size());
  mu.setZero();
  for (Eigen::Index i : elite) mu += cands.row(i).transpose();
  mu *= inv_m;
  Vec var = Vec::Zero(mu.size());
  for (Eigen::Index i : elite) var += (cands.row(i).transpose() - mu).cwiseAbs2();
  sigma = (var * inv_m).cwiseSqrt().cwiseMax(sigma_floor);
}

inline PlanDistribution cem_loop(const BatchObjective& objective, const PlannerConfig& cfg,
                                 Rng& rng, const std::vector<const PlanMemory::Entry*>* warm) {
  if (cfg.elites > cfg.population) throw std::invalid_argument("cem: elites > population");
  const Eigen::Index dim = cfg.flat_dim();
  Vec mu = Vec::Zero(dim);
  Vec sigma = Vec::Ones(dim);
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const bool with_warm = iter == 0 && warm != nullptr && !warm->empty();
    const Eigen::Index extra =
        with_warm ? static_cast<Eigen::Index>(warm->size()) * cfg.samples_per_neighbor : 0;
    Mat cands(cfg.population + extra, dim);
    sample_candidate_rows(cands, 0, cfg.population, mu, sigma, cfg, rng);
    if (with_warm) {
      Eigen::Index row = cfg.population;
      for (const auto* entry : *warm) {
        sample_candidate_rows(cands, row, cfg.samples_per_neighbor, entry->plan.mu,
                              entry->plan.sigma, cfg, rng);
        row += cfg.samples_per_neighbor;
      }
    }
    const Vec scores = objective(cands);
    if (scores.size() != cands.rows()) throw std::runtime_error("cem: objective returned wrong size");
    refit_to_elites(cands, elite_indices(scores, cfg.elites), mu, sigma, cfg.sigma_floor);
  }
  return PlanDistribution{std::move(mu), std::move(sigma)};
}

}  // namespace detail

/// Vanilla CEM: init mu = 0, sigma = 1; per iteration sample the population,
/// keep the top-M candidates and refit mu/sigma to them (population standard
/// deviation). Samples are clamped to the action bounds.
inline PlanDistribution cem_plan(const BatchObjective& objective, const PlannerConfig& cfg,
                                 Rng& rng) {
  return detail::cem_loop(objective, cfg, rng, nullptr);
}

/// Memory-buffer CEM: identical to cem_plan except that iteration 1 appends
/// S samples from each of the K plans stored nearest to the current state,
/// and the final distribution is stored back into memory. With an empty
/// memory this is bit-identical to cem_plan under a shared rng.
inline PlanDistribution cem_plan_with_memory(const BatchObjective& objective,
                                             const Vec& current_state, PlanMemory& memory,
                                             const PlannerConfig& cfg, Rng& rng,
                                             bool store = true) {
  const auto warm = memory.knn_query(current_state, cfg.neighbors);
  PlanDistribution plan = detail::cem_loop(objective, cfg, rng, &warm);
  if (store) memory.insert(current_state, plan);
  return plan;
}

// --- model-based planning objective -------------------------------------

struct ObjectiveConfig {
  double beta = 0.0;
  EstimatorKind kind = EstimatorKind::MI;
  double worst_objective = -1e12;
};

/// Scores a batch of candidate action sequences under the ensemble: one
/// sampled rollout per member per candidate provides both the MC expected
/// reward (mean over members of summed rewards) and, via the cross
/// log-density matrix of the same rollouts, the intrinsic information term.
inline Vec evaluate_candidates(const Ensemble& e, const Vec& start, const Mat& cands,
                               const ObjectiveConfig& ocfg, Rng& rng) {
  const EnsembleConfig& cfg = e.cfg;
  const Eigen::Index n_cand = cands.rows();
  const int P = static_cast<int>(e.members.size());
  const Eigen::Index sd = cfg.state_dim;
  const Eigen::Index ad = cfg.action_dim;
  if (cands.cols() % ad != 0) throw std::invalid_argument("evaluate_candidates: bad candidate width");
  const Eigen::Index T = cands.cols() / ad;

  // Rollouts: states[p][t] is (n_cand x sd); rewards[p] is (n_cand x T).
  std::vector<std::vector<Mat>> states(P);
  std::vector<Mat> rewards(P, Mat(n_cand, T));
  std::vector<Eigen::Array<bool, Eigen::Dynamic, 1>> blown(
      P, Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n_cand, false));
  // Cached self-evaluations, reused for the L(i,i) densities.
  std::vector<std::vector<Mat>> self_dyn_mean(P), self_dyn_lv(P), self_rew_mean(P), self_rew_lv(P);

  Mat x(n_cand, sd + ad);
  for (int p = 0; p < P; ++p) {
    states[p].resize(T + 1);
    states[p][0] = start.transpose().replicate(n_cand, 1);
    for (Eigen::Index t = 0; t < T; ++t) {
      const auto a_t = cands.middleCols(t * ad, ad);
      x << states[p][t], a_t;
      auto [sm, slv] = dyn_eval(e.members[p], cfg, x);
      Mat noise(n_cand, sd);
      for (Eigen::Index r = 0; r < n_cand; ++r)
        for (Eigen::Index c2 = 0; c2 < sd; ++c2) noise(r, c2) = standard_normal(rng);
      Mat next = sm + ((0.5 * slv).array().exp() * noise.array()).matrix();
      for (Eigen::Index r = 0; r < n_cand; ++r)
        for (Eigen::Index c2 = 0; c2 < sd; ++c2) {
          double& v = next(r, c2);
          if (!std::isfinite(v) || std::abs(v) > cfg.state_clamp) {
            if (cfg.blowup_policy == BlowupPolicy::Abort) blown[p][r] = true;
            v = std::isfinite(v) ? std::clamp(v, -cfg.state_clamp, cfg.state_clamp) : 0.0;
          }
        }
      states[p][t + 1] = std::move(next);
      x << states[p][t + 1], a_t;
      auto [rm, rlv] = rew_eval(e.members[p], cfg, x);
      for (Eigen::Index r = 0; r < n_cand; ++r)
        rewards[p](r, t) = rm(r, 0) + std::exp(0.5 * rlv(r, 0)) * standard_normal(rng);
      self_dyn_mean[p].push_back(std::move(sm));
      self_dyn_lv[p].push_back(std::move(slv));
      self_rew_mean[p].push_back(std::move(rm));
      self_rew_lv[p].push_back(std::move(rlv));
    }
  }

  Vec scores = Vec::Zero(n_cand);
  for (int p = 0; p < P; ++p) scores += rewards[p].rowwise().sum();
  scores /= static_cast<double>(P);

  if (ocfg.beta != 0.0 && P >= 2) {
    // L[i][k](c) = ln p(trajectory of member i, candidate c | member k).
    std::vector<std::vector<Vec>> L(P, std::vector<Vec>(P, Vec::Zero(n_cand)));
    for (int i = 0; i < P; ++i) {
      for (int k = 0; k < P; ++k) {
        Vec acc = Vec::Zero(n_cand);
        for (Eigen::Index t = 0; t < T; ++t) {
          const auto a_t = cands.middleCols(t * ad, ad);
          Mat dm, dlv, rm2, rlv2;
          if (k == i) {
            dm = self_dyn_mean[i][t];
            dlv = self_dyn_lv[i][t];
            rm2 = self_rew_mean[i][t];
            rlv2 = self_rew_lv[i][t];
          } else {
            x << states[i][t], a_t;
            std::tie(dm, dlv) = dyn_eval(e.members[k], cfg, x);
            x << states[i][t + 1], a_t;
            std::tie(rm2, rlv2) = rew_eval(e.members[k], cfg, x);
          }
          acc += gaussian_log_density_rows(states[i][t + 1], dm, dlv);
          acc += gaussian_log_density_rows(rewards[i].col(t), rm2, rlv2);
        }
        L[i][k] = std::move(acc);
      }
    }
    Mat logp(P, P);
    for (Eigen::Index c = 0; c < n_cand; ++c) {
      for (int i = 0; i < P; ++i)
        for (int k = 0; k < P; ++k) logp(i, k) = L[i][k][c];
      const double intrinsic = ocfg.kind == EstimatorKind::MI ? nmc_mutual_information(logp)
                                                              : nmc_lautum_information(logp);
      scores[c] += ocfg.beta * intrinsic;
    }
  }

  for (Eigen::Index c = 0; c < n_cand; ++c) {
    bool any_blown = false;
    for (int p = 0; p < P; ++p) any_blown = any_blown || blown[p][c];
    if (any_blown || !std::isfinite(scores[c])) scores[c] = ocfg.worst_objective;
  }
  return scores;
}

/// Single-sequence convenience wrapper; `action_sequence` has one action per
/// row.
inline double evaluate_objective(const Ensemble& e, const Vec& start, const Mat& action_sequence,
                                 const ObjectiveConfig& ocfg, Rng& rng) {
  Mat flat(1, action_sequence.size());
  for (Eigen::Index t = 0; t < action_sequence.rows(); ++t)
    flat.block(0, t * action_sequence.cols(), 1, action_sequence.cols()) = action_sequence.row(t);
  return evaluate_candidates(e, start, flat, ocfg, rng)[0];
}

/// BatchObjective adapter around the model-based objective, drawing rollout
/// noise from its own stream.
inline BatchObjective make_model_objective(const Ensemble& e, const Vec& start,
                                           const ObjectiveConfig& ocfg, Rng& rng) {
  return [&e, start, ocfg, &rng](const Mat& cands) {
    return evaluate_candidates(e, start, cands, ocfg, rng);
  };
}

}  // namespace aex

#endif  // AEX_PLANNER_HPP
