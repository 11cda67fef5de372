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

#ifndef AEX_INFOGAIN_HPP
#define AEX_INFOGAIN_HPP

#include "aex/ensemble.hpp"

namespace aex {

enum class EstimatorKind { MI, LI };

struct EstimatorConfig {
  int n_particles = 5;
  EstimatorKind kind = EstimatorKind::MI;
  double density_floor = 1e-300;  // guards log(0) on discrete models
};

/// Sampled rollouts paired with their generating particles: trajectory i was
/// sampled under member i. Input to the nested Monte-Carlo estimators.
struct TrajectoryBatch {
  const Ensemble* ensemble = nullptr;
  Vec start_state;
  Mat action_sequence;               // (T x action_dim)
  std::vector<Mat> states;           // per member, (T+1 x state_dim)
  std::vector<Vec> rewards;          // per member, (T)
};

/// Log of the joint state/reward density of a trajectory under one member:
/// sum over steps of ln N(s_tau; dyn(s_{tau-1}, a_tau)) +
/// ln N(r_tau; rew(s_tau, a_tau)).
inline double log_joint_density(const EnsembleMember& m, const EnsembleConfig& cfg,
                                const Vec& start_state, const Mat& actions, const Mat& states,
                                const Vec& rewards) {
  const Eigen::Index T = actions.rows();
  if (states.rows() != T + 1 || rewards.size() != T)
    throw std::invalid_argument("log_joint_density: trajectory/action length mismatch");
  if ((states.row(0).transpose() - start_state).cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("log_joint_density: trajectory does not begin at start state");
  if (T == 0) return 0.0;
  Mat x(T, cfg.state_dim + cfg.action_dim), xs(T, cfg.state_dim + cfg.action_dim);
  Mat target_s(T, cfg.state_dim), target_r(T, 1);
  for (Eigen::Index t = 0; t < T; ++t) {
    x.row(t) << states.row(t), actions.row(t);
    xs.row(t) << states.row(t + 1), actions.row(t);
    target_s.row(t) = states.row(t + 1);
    target_r(t, 0) = rewards[t];
  }
  auto [sm, slv] = dyn_eval(m, cfg, x);
  auto [rm, rlv] = rew_eval(m, cfg, xs);
  const double v = gaussian_log_density_rows(target_s, sm, slv).sum() +
                   gaussian_log_density_rows(target_r, rm, rlv).sum();
  if (std::isnan(v)) throw std::runtime_error("log_joint_density: non-finite density");
  return v;
}

/// Samples one trajectory per ensemble member from the given start state and
/// candidate plan.
inline TrajectoryBatch sample_trajectory_batch(const Ensemble& e, const Vec& start_state,
                                               const Mat& actions, Rng& rng) {
  TrajectoryBatch b;
  b.ensemble = &e;
  b.start_state = start_state;
  b.action_sequence = actions;
  b.states.reserve(e.members.size());
  b.rewards.reserve(e.members.size());
  for (const auto& m : e.members) {
    RolloutResult r = rollout(m, e.cfg, start_state, actions, rng);
    b.states.push_back(std::move(r.states));
    b.rewards.push_back(std::move(r.rewards));
  }
  return b;
}

/// Cross log-density matrix L(i, k) = ln p(trajectory i | member k).
inline Mat cross_log_density_matrix(const TrajectoryBatch& b) {
  const auto n = static_cast<Eigen::Index>(b.states.size());
  const Ensemble& e = *b.ensemble;
  Mat L(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      L(i, k) = log_joint_density(e.members[k], e.cfg, b.start_state, b.action_sequence,
                                  b.states[i], b.rewards[i]);
  return L;
}

/// Sample-reusing nested MC estimate of the mutual information from a cross
/// log-density matrix: (1/n) sum_i [ L(i,i) - log mean_{k != i} exp L(i,k) ].
/// The inner mean runs over the n-1 terms left after the k = i exclusion.
inline double nmc_mutual_information(const Mat& log_densities) {
  const Eigen::Index n = log_densities.rows();
  if (n < 2 || log_densities.cols() != n)
    throw std::invalid_argument("nmc_mutual_information: need a square matrix with n >= 2");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec row = log_densities.row(i).transpose();
    acc += row[i] - log_mean_exp_excluding(row, i);
  }
  return acc / static_cast<double>(n);
}

/// Sample-reusing nested MC estimate of the Lautum information:
/// (1/n) sum_i [ log mean_{k != i} exp L(i,k) - mean_{j != i} L(i,j) ].
/// The same trajectories serve every particle in both inner sums. Note that
/// for n = 2 both inner sums collapse to the single cross term, so the
/// estimate is identically zero; at least 3 particles are needed for a
/// non-degenerate value.
inline double nmc_lautum_information(const Mat& log_densities) {
  const Eigen::Index n = log_densities.rows();
  if (n < 2 || log_densities.cols() != n)
    throw std::invalid_argument("nmc_lautum_information: need a square matrix with n >= 2");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec row = log_densities.row(i).transpose();
    const double log_mean = log_mean_exp_excluding(row, i);
    // Mean of logs, centered on the row reference value so that identical
    // particles yield an exact zero.
    double mean_log = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) mean_log += row[j] - row[i];
    mean_log = mean_log / static_cast<double>(n - 1) + row[i];
    acc += log_mean - mean_log;
  }
  return acc / static_cast<double>(n);
}

inline double estimate_mi(const TrajectoryBatch& b, const EstimatorConfig& cfg) {
  if (cfg.kind != EstimatorKind::MI) throw std::invalid_argument("estimate_mi: config kind is not MI");
  return nmc_mutual_information(cross_log_density_matrix(b));
}

inline double estimate_li(const TrajectoryBatch& b, const EstimatorConfig& cfg) {
  if (cfg.kind != EstimatorKind::LI) throw std::invalid_argument("estimate_li: config kind is not LI");
  return nmc_lautum_information(cross_log_density_matrix(b));
}

// --- exact discrete oracles ----------------------------------------------

/// Finite p(s, theta | pi) tables; ground truth for estimator validation.
struct DiscreteGenerativeModel {
  Vec prior;                    // over theta, sums to 1
  std::vector<Mat> likelihood;  // per policy, (n_theta x n_outcomes), rows sum to 1

  int n_theta() const { return static_cast<int>(prior.size()); }
  int n_outcomes() const { return likelihood.empty() ? 0 : static_cast<int>(likelihood[0].cols()); }
  int n_policies() const { return static_cast<int>(likelihood.size()); }
};

inline void validate(const DiscreteGenerativeModel& m, double tol = 1e-12) {
  if (std::abs(m.prior.sum() - 1.0) > tol || m.prior.minCoeff() < 0.0)
    throw std::invalid_argument("discrete model: bad prior");
  for (const auto& lik : m.likelihood) {
    if (lik.rows() != m.prior.size()) throw std::invalid_argument("discrete model: shape mismatch");
    if (lik.minCoeff() < 0.0) throw std::invalid_argument("discrete model: negative likelihood");
    for (Eigen::Index t = 0; t < lik.rows(); ++t)
      if (std::abs(lik.row(t).sum() - 1.0) > tol)
        throw std::invalid_argument("discrete model: likelihood row does not sum to 1");
  }
}

/// Exhaustive-enumeration mutual information
/// sum_theta sum_s p(theta) p(s|theta) ln[ p(s|theta) / p(s) ].
inline double exact_mi(const DiscreteGenerativeModel& m, int policy) {
  const Mat& lik = m.likelihood.at(policy);
  const Vec marginal = lik.transpose() * m.prior;  // p(s)
  double mi = 0.0;
  for (Eigen::Index t = 0; t < lik.rows(); ++t)
    for (Eigen::Index s = 0; s < lik.cols(); ++s) {
      const double joint = m.prior[t] * lik(t, s);
      if (joint > 0.0) mi += joint * std::log(lik(t, s) / marginal[s]);
    }
  return mi;
}

/// Exhaustive-enumeration Lautum information
/// E_{p(s)} KL[ p(theta) || p(theta|s) ] = sum_{s,theta} p(s) p(theta)
/// [ ln p(s) - ln p(s|theta) ]. Outcomes with p(s) = 0 contribute nothing.
inline double exact_li(const DiscreteGenerativeModel& m, int policy) {
  const Mat& lik = m.likelihood.at(policy);
  const Vec marginal = lik.transpose() * m.prior;
  double li = 0.0;
  for (Eigen::Index s = 0; s < lik.cols(); ++s) {
    if (marginal[s] <= 0.0) continue;
    for (Eigen::Index t = 0; t < lik.rows(); ++t) {
      if (m.prior[t] <= 0.0) continue;
      li += marginal[s] * m.prior[t] * (std::log(marginal[s]) - std::log(lik(t, s)));
    }
  }
  return li;
}

namespace detail {
/// Symmetric Dirichlet(1) row, i.e. uniform on the simplex.
inline Vec dirichlet1_row(Rng& rng, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = -std::log(uniform01(rng));
  return v / v.sum();
}

inline int sample_categorical(Rng& rng, const Eigen::Ref<const Vec>& probs) {
  double u = uniform01(rng);
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    u -= probs[i];
    if (u <= 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}
}  // namespace detail

inline DiscreteGenerativeModel random_discrete_model(Rng& rng, int n_theta, int n_outcomes,
                                                     int n_policies) {
  DiscreteGenerativeModel m;
  m.prior = detail::dirichlet1_row(rng, n_theta);
  m.likelihood.reserve(n_policies);
  for (int p = 0; p < n_policies; ++p) {
    Mat lik(n_theta, n_outcomes);
    for (int t = 0; t < n_theta; ++t) lik.row(t) = detail::dirichlet1_row(rng, n_outcomes).transpose();
    m.likelihood.push_back(std::move(lik));
  }
  return m;
}

/// NMC estimate on a discrete model directly: n particles theta^i from the
/// prior, one outcome s^i per particle, densities read off the likelihood
/// table (floored before the log).
inline double estimate_on_discrete_model(const DiscreteGenerativeModel& m, int policy,
                                         const EstimatorConfig& cfg, Rng& rng) {
  const int n = cfg.n_particles;
  if (n < 2) throw std::invalid_argument("estimate_on_discrete_model: need >= 2 particles");
  const Mat& lik = m.likelihood.at(policy);
  std::vector<int> thetas(n), outcomes(n);
  for (int i = 0; i < n; ++i) {
    thetas[i] = detail::sample_categorical(rng, m.prior);
    outcomes[i] = detail::sample_categorical(rng, lik.row(thetas[i]).transpose());
  }
  Mat L(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      L(i, k) = std::log(std::max(lik(thetas[k], outcomes[i]), cfg.density_floor));
  return cfg.kind == EstimatorKind::MI ? nmc_mutual_information(L) : nmc_lautum_information(L);
}

// --- cosine-similarity validation study -----------------------------------

struct StudyRow {
  int sample_count = 0;       // total budget (theta samples + s samples)
  EstimatorKind kind = EstimatorKind::MI;
  double mean = 0.0;          // mean cosine similarity over the models
  double std_dev = 0.0;
  int zero_norm_flags = 0;    // estimates with zero-norm vectors, recorded as 0
};

struct StudyDims {
  int n_theta = 5;
  int n_outcomes = 8;
  int n_policies = 8;
};

inline double cosine_similarity(const Vec& a, const Vec& b, bool* zero_flag = nullptr) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    if (zero_flag) *zero_flag = true;
    return 0.0;
  }
  return a.dot(b) / (na * nb);
}

/// For each random model, compares the exact per-policy information vector
/// with its NMC estimate at each total sample budget. With sample reuse each
/// particle doubles as one theta sample and one trajectory sample, so a
/// budget of n_total maps to n_total / 2 particles.
inline std::vector<StudyRow> cosine_similarity_study(Rng& rng, const std::vector<int>& sample_counts,
                                                     int n_models, const StudyDims& dims = {}) {
  std::vector<StudyRow> rows;
  std::vector<DiscreteGenerativeModel> models;
  models.reserve(n_models);
  for (int i = 0; i < n_models; ++i)
    models.push_back(random_discrete_model(rng, dims.n_theta, dims.n_outcomes, dims.n_policies));

  for (EstimatorKind kind : {EstimatorKind::MI, EstimatorKind::LI}) {
    std::vector<std::vector<double>> exact(models.size());
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      exact[mi].resize(dims.n_policies);
      for (int p = 0; p < dims.n_policies; ++p)
        exact[mi][p] = kind == EstimatorKind::MI ? exact_mi(models[mi], p) : exact_li(models[mi], p);
    }
    for (int budget : sample_counts) {
      EstimatorConfig cfg;
      cfg.kind = kind;
      cfg.n_particles = std::max(2, budget / 2);
      StudyRow row;
      row.sample_count = budget;
      row.kind = kind;
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t mi = 0; mi < models.size(); ++mi) {
        Vec est(dims.n_policies), ex(dims.n_policies);
        for (int p = 0; p < dims.n_policies; ++p) {
          est[p] = estimate_on_discrete_model(models[mi], p, cfg, rng);
          ex[p] = exact[mi][p];
        }
        bool zero = false;
        const double cs = cosine_similarity(est, ex, &zero);
        if (zero) ++row.zero_norm_flags;
        sum += cs;
        sum_sq += cs * cs;
      }
      const double n = static_cast<double>(models.size());
      row.mean = sum / n;
      row.std_dev = std::sqrt(std::max(0.0, sum_sq / n - row.mean * row.mean));
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::string to_string(EstimatorKind k) { return k == EstimatorKind::MI ? "mi" : "li"; }

}  // namespace aex

#endif  // AEX_INFOGAIN_HPP
