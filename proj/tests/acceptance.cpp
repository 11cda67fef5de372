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

// Acceptance gate: one self-contained check per shipped claim, each printing
// a single PASS/FAIL line with the measured numbers. Run without arguments
// for the full gate, or pass criterion numbers to run a subset.

#include <cstdarg>
#include <cstdio>
#include <set>

#include "aex/aex.hpp"

using namespace aex;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// --- 1: estimator validity (cosine-similarity study) -----------------------

Outcome criterion1() {
  Rng rng(20260823);
  const std::vector<int> budgets = {16, 32, 64, 128, 256};
  const int n_models = 200;
  const auto rows = cosine_similarity_study(rng, budgets, n_models, StudyDims{5, 8, 8});

  std::vector<StudyRow> mi, li;
  for (const auto& r : rows) (r.kind == EstimatorKind::MI ? mi : li).push_back(r);

  bool pass = mi.back().mean >= 0.90 && li.back().mean >= 0.90;
  auto monotone = [&](const std::vector<StudyRow>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double se = std::sqrt((v[i].std_dev * v[i].std_dev +
                                   v[i + 1].std_dev * v[i + 1].std_dev) / n_models);
      if (v[i + 1].mean < v[i].mean - se) return false;
    }
    return true;
  };
  pass = pass && monotone(mi) && monotone(li);
  int li_wins = 0;
  for (std::size_t i = 0; i < mi.size(); ++i)
    if (li[i].mean >= mi[i].mean) ++li_wins;
  pass = pass && li_wins * 5 >= static_cast<int>(budgets.size()) * 4;

  return {pass, fmt("mi@256=%.3f li@256=%.3f li>=mi at %d/%zu budgets", mi.back().mean,
                    li.back().mean, li_wins, budgets.size())};
}

// --- 2: estimator consistency at large n ------------------------------------

Outcome criterion2() {
  Rng rng(777);
  EstimatorConfig cfg;
  cfg.n_particles = 4096;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const DiscreteGenerativeModel m = random_discrete_model(rng, 5, 8, 1);
    for (EstimatorKind kind : {EstimatorKind::MI, EstimatorKind::LI}) {
      cfg.kind = kind;
      const double est = estimate_on_discrete_model(m, 0, cfg, rng);
      const double exact = kind == EstimatorKind::MI ? exact_mi(m, 0) : exact_li(m, 0);
      worst = std::max(worst, std::abs(est - exact));
    }
  }
  bool zero_ok = true;
  for (int n : {2, 3, 4096}) {
    const Mat L = Mat::Constant(n, n, -42.125);
    zero_ok = zero_ok && nmc_mutual_information(L) == 0.0 && nmc_lautum_information(L) == 0.0;
  }
  const bool pass = worst <= 0.05 && zero_ok;
  return {pass, fmt("max |nmc - exact| = %.4f nats at n=4096; identical-particle zero %s", worst,
                    zero_ok ? "exact" : "VIOLATED")};
}

// --- 3: gradient correctness -------------------------------------------------

// Frozen re-prediction table, built exactly like the training loss builds it
// (same rng draw order), so the finite-difference oracle can hold the
// sampled states constant while the parameters move.
std::vector<Mat> build_shat(const EnsembleMember& m, const EnsembleConfig& cfg, int H,
                            const detail::EpisodeWindow& w, Rng& rng) {
  const Eigen::Index T = w.actions.rows();
  const Eigen::Index sd = cfg.state_dim, ad = cfg.action_dim;
  const int max_m = static_cast<int>(std::min<Eigen::Index>(H, T));
  std::vector<Mat> shat(static_cast<std::size_t>(max_m) + 1);
  shat[1] = w.states;
  for (int i = 2; i <= max_m; ++i) {
    const Eigen::Index n = T - i + 2;
    Mat x(n, sd + ad);
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::Index tau = i - 1 + r;
      x.row(r) << shat[i - 1].row(tau - 1), w.actions.row(tau - 1);
    }
    auto [mean, log_var] = dyn_eval(m, cfg, x);
    shat[i] = Mat(T + 1, sd);
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::Index tau = i - 1 + r;
      shat[i].row(tau) = mean.row(r) + ((0.5 * log_var.row(r)).array().exp() *
                                        normal_vec(rng, sd).transpose().array()).matrix();
    }
  }
  return shat;
}

// The negated multi-step objective evaluated against a frozen table.
double frozen_loss(const EnsembleMember& m, const EnsembleConfig& cfg, int H,
                   const detail::EpisodeWindow& w, const std::vector<Mat>& shat) {
  const Eigen::Index T = w.actions.rows();
  const Eigen::Index sd = cfg.state_dim, ad = cfg.action_dim;
  const Vec beta = step_weights(H);
  const int max_m = static_cast<int>(shat.size()) - 1;
  double obj = 0.0;
  for (int mm = 1; mm <= max_m; ++mm) {
    const Eigen::Index n = T - mm + 1;
    const double scale = beta[mm - 1] / static_cast<double>(n);
    Mat x(n, sd + ad), target(n, sd), xr(n, sd + ad), tr(n, 1);
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::Index tau = mm + r;
      x.row(r) << shat[mm].row(tau - 1), w.actions.row(tau - 1);
      target.row(r) = w.states.row(tau);
      xr.row(r) << shat[mm].row(tau), w.actions.row(tau - 1);
      tr(r, 0) = w.rewards[tau - 1];
    }
    auto [dm, dlv] = dyn_eval(m, cfg, x);
    obj += scale * gaussian_log_density_rows(target, dm, dlv).sum();
    auto [rm, rlv] = rew_eval(m, cfg, xr);
    obj += scale * gaussian_log_density_rows(tr, rm, rlv).sum();
  }
  return -obj;
}

Outcome criterion3() {
  Rng rng(4242);
  double worst = 0.0;
  double worst_consistency = 0.0;
  const double eps = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    EnsembleConfig cfg;
    cfg.state_dim = 2;
    cfg.action_dim = 1;
    cfg.num_members = 2;
    cfg.dyn_hidden = {4, 3};
    cfg.rew_hidden = {4};
    cfg.variance_mode = VarianceMode::Learned;
    Ensemble e = make_ensemble(cfg, 5000 + trial);
    EnsembleMember& m = e.members[0];

    detail::EpisodeWindow w;
    const int T = 6;
    w.states = Mat(T + 1, 2);
    w.actions = Mat(T, 1);
    w.rewards = Vec(T);
    for (Eigen::Index i = 0; i < w.states.size(); ++i) w.states.data()[i] = standard_normal(rng);
    for (int t = 0; t < T; ++t) {
      w.actions(t, 0) = 2.0 * uniform01(rng) - 1.0;
      w.rewards[t] = standard_normal(rng);
    }

    for (int H : {1, 3, 5}) {
      ModelTrainingConfig tcfg;
      tcfg.horizon = H;
      const std::uint64_t draw_seed = mix_seed(9000 + trial, H);

      NetworkGrads dg = zeros_like(m.dynamics), rg = zeros_like(m.reward);
      Rng r1(draw_seed);
      const double loss = multi_step_loss(m, cfg, tcfg, w, r1, dg, rg);
      Rng r2(draw_seed);
      const std::vector<Mat> shat = build_shat(m, cfg, H, w, r2);
      worst_consistency = std::max(worst_consistency,
                                   std::abs(loss - frozen_loss(m, cfg, H, w, shat)));

      auto fd_check = [&](NetworkParams& p, const Vec& analytic) {
        Vec theta = to_vector(p);
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
          const double orig = theta[i];
          theta[i] = orig + eps;
          from_vector(p, theta);
          const double up = frozen_loss(m, cfg, H, w, shat);
          theta[i] = orig - eps;
          from_vector(p, theta);
          const double down = frozen_loss(m, cfg, H, w, shat);
          theta[i] = orig;
          from_vector(p, theta);
          const double fd = (up - down) / (2.0 * eps);
          worst = std::max(worst, std::abs(analytic[i] - fd) /
                                      std::max({1.0, std::abs(analytic[i]), std::abs(fd)}));
        }
      };
      fd_check(m.dynamics, to_vector(dg));
      fd_check(m.reward, to_vector(rg));
    }
  }
  const bool pass = worst < 1e-4 && worst_consistency < 1e-9;
  return {pass, fmt("max FD relative error = %.2e (H in {1,3,5}); oracle/loss gap = %.1e", worst,
                    worst_consistency)};
}

// --- 4: CEM correctness -------------------------------------------------------

Outcome criterion4() {
  const PlannerConfig cfg = make_planner_config(20, 2);
  const BatchObjective obj = [](const Mat& c) {
    Vec s(c.rows());
    for (Eigen::Index i = 0; i < c.rows(); ++i) s[i] = -(c.row(i).array() - 0.3).square().sum();
    return s;
  };
  int hits = 0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(9100 + seed);
    const PlanDistribution plan = cem_plan(obj, cfg, rng);
    if ((plan.mu.array() - 0.3).abs().maxCoeff() < 0.05) ++hits;
  }

  Rng r1(5), r2(5);
  PlanMemory mem(100);
  const PlanDistribution a = cem_plan(obj, cfg, r1);
  const PlanDistribution b = cem_plan_with_memory(obj, Vec::Zero(2), mem, cfg, r2, false);
  const bool identical = (a.mu - b.mu).cwiseAbs().maxCoeff() == 0.0 &&
                         (a.sigma - b.sigma).cwiseAbs().maxCoeff() == 0.0;

  Rng krng(6);
  PlanMemory big(2000);
  std::vector<Vec> keys;
  for (int i = 0; i < 1000; ++i) {
    keys.push_back(normal_vec(krng, 3));
    big.insert(keys.back(), PlanDistribution{Vec::Zero(1), Vec::Ones(1)});
  }
  bool knn_ok = true;
  for (int q = 0; q < 5; ++q) {
    const Vec query = normal_vec(krng, 3);
    const auto got = big.knn_query(query, 50);
    std::vector<std::pair<double, int>> brute;
    for (int i = 0; i < 1000; ++i) brute.emplace_back((keys[i] - query).squaredNorm(), i);
    std::sort(brute.begin(), brute.end());
    for (int i = 0; i < 50; ++i)
      knn_ok = knn_ok &&
               (got[i]->state_key - keys[brute[i].second]).cwiseAbs().maxCoeff() == 0.0;
  }

  const bool pass = hits >= 95 && identical && knn_ok;
  return {pass, fmt("bowl hits %d/100; empty-memory reduction %s; knn vs brute force %s", hits,
                    identical ? "bit-identical" : "DIFFERS", knn_ok ? "exact" : "MISMATCH")};
}

// --- 5: detachment demonstration ---------------------------------------------

// Sparse-plateau corridor: 1-D position, 10-step episodes, the reward
// plateau sits at the far end and is reachable only by committing to
// full-speed pushes for the whole episode. Without a directed intrinsic
// signal the flat objective gives the planner nothing to climb.
bool corridor_reaches_goal(std::uint64_t seed, bool memory_mi) {
  EnsembleConfig mc;
  mc.state_dim = 1;
  mc.action_dim = 1;
  mc.num_members = 3;
  mc.dyn_hidden = {16};
  mc.rew_hidden = {16};
  ModelTrainingConfig tc;
  tc.horizon = 3;
  tc.batch_size = 8;
  tc.max_steps_per_fit = 60;
  PlannerConfig pc = make_planner_config(10, 1);
  pc.iterations = 4;
  pc.population = 32;
  pc.elites = 4;
  pc.neighbors = 8;
  pc.samples_per_neighbor = 4;

  Ensemble e = make_ensemble(mc, mix_seed(seed, 0xC0));
  PlanMemory mem(50000);
  ReplayBuffer buf;
  Rng rng(mix_seed(seed, 0xC1));

  for (int ep = 0; ep < 200; ++ep) {
    double x = 0.0;
    std::vector<Transition> transitions;
    for (int t = 0; t < 10; ++t) {
      const Vec s0 = Vec::Constant(1, x);
      ObjectiveConfig ocfg;
      ocfg.beta = memory_mi ? 1.0 : 0.0;
      const BatchObjective obj = make_model_objective(e, s0, ocfg, rng);
      const PlanDistribution plan = memory_mi
                                        ? cem_plan_with_memory(obj, s0, mem, pc, rng)
                                        : cem_plan(obj, pc, rng);
      const double a = std::clamp(plan.mu[0], -1.0, 1.0);
      const double nx = std::clamp(x + 0.1 * a, 0.0, 1.0);
      const double r = nx >= 0.9 ? 1.0 : 0.0;
      Transition tr;
      tr.prev_state = s0;
      tr.action = Vec::Constant(1, a);
      tr.next_state = Vec::Constant(1, nx);
      tr.reward = r;
      tr.episode_id = ep;
      tr.step_index = t;
      transitions.push_back(std::move(tr));
      if (r == 1.0) return true;
      x = nx;
    }
    buf.add_episode(transitions);
    fit(e, buf, tc);
  }
  return false;
}

Outcome criterion5() {
  int with = 0, without = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    if (corridor_reaches_goal(seed, true)) ++with;
    if (corridor_reaches_goal(seed, false)) ++without;
  }
  const bool pass = with >= 8 && without <= 2;
  return {pass, fmt("plateau reached: memory+MI %d/10 seeds, beta=0 %d/10 seeds", with, without)};
}

// --- 6 & 7: end-to-end surrogate runs ------------------------------------------

double best_eval_reward(const fs::path& run_dir) {
  double best = -1e300;
  for (const auto& row : read_csv(run_dir / "metrics.csv", "aex.metrics.v1"))
    best = std::max(best, std::stod(row[3]));
  return best;
}

// Nonzero visitation cells in the top 30% of the table: in the maze this
// band lies beyond the upper hole row, so reaching it requires threading
// both gaps. (The lower half is polluted by reward-zone visits, which both
// agents make once either stumbles on the zone.)
int top_band_nonzero_cells(const fs::path& run_dir) {
  const Eigen::MatrixXi g = read_histogram_csv(run_dir / "histogram_100.csv");
  int count = 0;
  for (Eigen::Index r = g.rows() - (g.rows() * 3) / 10; r < g.rows(); ++r)
    for (Eigen::Index c = 0; c < g.cols(); ++c)
      if (g(r, c) > 0) ++count;
  return count;
}

fs::path acceptance_root() {
  const fs::path p = fs::temp_directory_path() / "aex_acceptance";
  fs::create_directories(p);
  return p;
}

Outcome criterion6() {
  const fs::path root = acceptance_root() / "e2e";
  fs::remove_all(root);
  int mi_hits = 0, pets_hits = 0;
  for (const char* preset : {"desk_mi", "desk_pets"}) {
    ExperimentConfig cfg = load_experiment_config(nlohmann::json{{"base", preset}});
    cfg.seeds = {0, 1, 2, 3, 4};
    for (std::uint64_t s : cfg.seeds) {
      const fs::path dir = run_seed(cfg, s, root);
      // > 0.9 means the greedy (beta=0) eval policy collected at least one
      // full in-zone reward step net of action penalties.
      const bool hit = best_eval_reward(dir) > 0.9;
      if (std::string(preset) == "desk_mi")
        mi_hits += hit;
      else
        pets_hits += hit;
    }
  }
  // The beta=0 baseline can luck into the zone during episode 0 (before any
  // learning) in a minority of seeds, so the pinned contrast is a margin,
  // not a shutout.
  const bool pass = mi_hits >= 3 && pets_hits <= 2 && mi_hits - pets_hits >= 2;
  return {pass, fmt("eval reward > 0.9: mi %d/5 seeds, beta=0 %d/5 seeds (2000 env steps each)",
                    mi_hits, pets_hits)};
}

Outcome criterion7() {
  const fs::path root = acceptance_root() / "maze";
  fs::remove_all(root);
  std::vector<int> mi_cells, pets_cells;
  for (const char* preset : {"desk_maze_mi", "desk_maze_pets"}) {
    ExperimentConfig cfg = load_experiment_config(nlohmann::json{{"base", preset}});
    cfg.seeds = {0, 1, 2};
    for (std::uint64_t s : cfg.seeds) {
      const fs::path dir = run_seed(cfg, s, root);
      (std::string(preset) == "desk_maze_mi" ? mi_cells : pets_cells)
          .push_back(top_band_nonzero_cells(dir));
    }
  }
  std::sort(mi_cells.begin(), mi_cells.end());
  std::sort(pets_cells.begin(), pets_cells.end());
  const int mi_med = mi_cells[1], pets_med = pets_cells[1];
  // max(pets, 1) keeps the ratio meaningful when the baseline never gets
  // past the hole rows at all (zero top-band coverage).
  const bool pass = mi_med >= 3 && mi_med >= 2 * std::max(pets_med, 1);
  return {pass, fmt("top-band nonzero cells (median of 3): mi %d, beta=0 %d", mi_med, pets_med)};
}

// --- 8: determinism --------------------------------------------------------------

Outcome criterion8() {
  ExperimentConfig cfg = load_experiment_config(nlohmann::json{{"base", "desk_mi"}});
  cfg.name = "determinism";
  cfg.seeds = {11};
  cfg.agent.episodes = 3;
  cfg.agent.episode_length = 10;
  const fs::path r1 = acceptance_root() / "det1";
  const fs::path r2 = acceptance_root() / "det2";
  fs::remove_all(r1);
  fs::remove_all(r2);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  const auto d1 = run_experiment(cfg, r1);
  const auto d2 = run_experiment(cfg, r2);
  const bool metrics_eq = slurp(d1[0] / "metrics.csv") == slurp(d2[0] / "metrics.csv");
  const bool episodes_eq = slurp(d1[0] / "episodes.csv") == slurp(d2[0] / "episodes.csv");
  const bool agg_eq =
      slurp(r1 / cfg.name / "aggregate.csv") == slurp(r2 / cfg.name / "aggregate.csv");
  const bool pass = metrics_eq && episodes_eq && agg_eq;
  return {pass, fmt("rerun metrics %s, episode logs %s, aggregate %s",
                    metrics_eq ? "bit-exact" : "DIFFER", episodes_eq ? "bit-exact" : "DIFFER",
                    agg_eq ? "bit-exact" : "DIFFER")};
}

// --- 9: adaptive beta trace -------------------------------------------------------

Outcome criterion9() {
  BetaSchedule b;
  b.mode = BetaSchedule::Mode::Adaptive;
  b.aggregator = BetaSchedule::Aggregator::Max;
  b.alpha = 1e8;
  b.gamma = 2e5;
  const std::vector<double> trace = {0.0, -0.001, 0.0, 0.5, 0.2, 1.0, 0.3};
  bool pass = b.value() == 2e5;
  double r_max = 0.0;
  bool seen_positive = false;
  for (double r : trace) {
    b.observe(r);
    seen_positive = seen_positive || r > 0.0;
    r_max = std::max(r_max, r);
    const double expect = seen_positive ? 1e8 * r_max + 2e5 : 2e5;
    pass = pass && b.value() == expect;
  }
  return {pass, fmt("beta = gamma before first positive reward, alpha*r_max + gamma after "
                    "(final %.6g)", b.value())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"estimator validity (cosine-similarity study)", criterion1},
      {"estimator consistency at n=4096", criterion2},
      {"gradient correctness vs finite differences", criterion3},
      {"CEM correctness on the quadratic bowl", criterion4},
      {"detachment demonstration on the sparse plateau", criterion5},
      {"end-to-end sparse-reward discovery (desk scale)", criterion6},
      {"maze coverage (visitation histograms)", criterion7},
      {"bit-exact determinism of reruns", criterion8},
      {"adaptive beta trace", criterion9},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const Outcome out = criteria[i].second();
    std::printf("ACCEPTANCE %d %s: %s — %s\n", id, out.pass ? "PASS" : "FAIL", criteria[i].first,
                out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures;
}
