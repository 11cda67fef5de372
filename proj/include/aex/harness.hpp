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

#ifndef AEX_HARNESS_HPP
#define AEX_HARNESS_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "aex/agent.hpp"

namespace aex {

inline constexpr const char* kLibraryVersion = "0.1.0";

// --- csv helpers -----------------------------------------------------------

/// Round-trip exact double formatting; the determinism guarantee for metrics
/// files rests on this.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Every CSV starts with a `# schema=<id>` line that readers validate.
inline void write_schema_line(std::ostream& os, const std::string& id) {
  os << "# schema=" << id << "\n";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// Reads a schema-tagged CSV; returns the data rows (header excluded).
inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                                      const std::string& schema_id,
                                                      std::vector<std::string>* header = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "# schema=" + schema_id)
    throw std::runtime_error(path.string() + ": expected schema " + schema_id);
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
  if (header) *header = split_csv_line(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(split_csv_line(line));
  return rows;
}

// --- experiment configuration ----------------------------------------------

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<std::uint64_t> seeds = {0};
  std::string env_preset = "tilted_pushing";
  nlohmann::json env_overrides = nlohmann::json::object();
  std::string estimator = "mi";  // mi | li | none (purely extrinsic baseline)
  AgentConfig agent;
  EnsembleConfig model;
  int histogram_bins = 20;
};

inline nlohmann::json to_json(const PlannerConfig& c) {
  return nlohmann::json{{"iterations", c.iterations},
                        {"population", c.population},
                        {"elites", c.elites},
                        {"neighbors", c.neighbors},
                        {"samples_per_neighbor", c.samples_per_neighbor},
                        {"horizon", c.horizon},
                        {"action_dim", c.action_dim},
                        {"action_bound", c.action_high.size() ? c.action_high[0] : 1.0},
                        {"sigma_floor", c.sigma_floor},
                        {"worst_objective", c.worst_objective}};
}

inline PlannerConfig planner_config_from_json(const nlohmann::json& j) {
  PlannerConfig c = make_planner_config(j.at("horizon").get<int>(), j.at("action_dim").get<int>(),
                                        j.at("action_bound").get<double>());
  c.iterations = j.at("iterations").get<int>();
  c.population = j.at("population").get<int>();
  c.elites = j.at("elites").get<int>();
  c.neighbors = j.at("neighbors").get<int>();
  c.samples_per_neighbor = j.at("samples_per_neighbor").get<int>();
  c.sigma_floor = j.at("sigma_floor").get<double>();
  c.worst_objective = j.at("worst_objective").get<double>();
  return c;
}

inline nlohmann::json to_json(const ModelTrainingConfig& c) {
  return nlohmann::json{{"horizon", c.horizon},
                        {"learning_rate", c.learning_rate},
                        {"batch_size", c.batch_size},
                        {"steps_per_transition", c.steps_per_transition},
                        {"max_steps_per_fit", c.max_steps_per_fit}};
}

inline ModelTrainingConfig model_training_config_from_json(const nlohmann::json& j) {
  ModelTrainingConfig c;
  c.horizon = j.at("horizon").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.steps_per_transition = j.at("steps_per_transition").get<int>();
  c.max_steps_per_fit = j.at("max_steps_per_fit").get<int>();
  return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return nlohmann::json{{"name", c.name},
                        {"seeds", c.seeds},
                        {"env_preset", c.env_preset},
                        {"env_overrides", c.env_overrides},
                        {"estimator", c.estimator},
                        {"episodes", c.agent.episodes},
                        {"episode_length", c.agent.episode_length},
                        {"variance_learning_start_step", c.agent.variance_learning_start_step},
                        {"beta", to_json(c.agent.beta)},
                        {"planner", to_json(c.agent.planner)},
                        {"model_training", to_json(c.agent.model)},
                        {"ensemble", to_json(c.model)},
                        {"histogram_bins", c.histogram_bins}};
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.name = j.at("name").get<std::string>();
  c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  {
    auto sorted = c.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("experiment config: seeds must be distinct");
  }
  c.env_preset = j.at("env_preset").get<std::string>();
  c.env_overrides = j.value("env_overrides", nlohmann::json::object());
  c.estimator = j.at("estimator").get<std::string>();
  if (c.estimator != "mi" && c.estimator != "li" && c.estimator != "none")
    throw std::invalid_argument("experiment config: estimator must be mi, li or none");
  c.agent.episodes = j.at("episodes").get<int>();
  c.agent.episode_length = j.at("episode_length").get<int>();
  c.agent.variance_learning_start_step = j.at("variance_learning_start_step").get<long>();
  c.agent.beta = beta_schedule_from_json(j.at("beta"));
  c.agent.planner = planner_config_from_json(j.at("planner"));
  c.agent.model = model_training_config_from_json(j.at("model_training"));
  c.agent.use_intrinsic = c.estimator != "none";
  c.agent.estimator = c.estimator == "li" ? EstimatorKind::LI : EstimatorKind::MI;
  c.model = ensemble_config_from_json(j.at("ensemble"));
  c.histogram_bins = j.at("histogram_bins").get<int>();
  return c;
}

inline EnvConfig resolve_env(const ExperimentConfig& c) {
  nlohmann::json j = to_json(env_preset(c.env_preset));
  j.merge_patch(c.env_overrides);
  return env_config_from_json(j);
}

namespace detail {

inline nlohmann::json base_experiment(const std::string& name, const std::string& env,
                                      const std::string& estimator) {
  ExperimentConfig c;
  c.name = name;
  c.seeds = {0, 1, 2, 3, 4};
  c.env_preset = env;
  c.estimator = estimator;
  c.agent.episodes = 100;
  c.agent.episode_length = env_preset(env).episode_length;
  c.agent.planner = make_planner_config(20, 3);
  c.model.state_dim = 10;
  c.model.action_dim = 3;
  return to_json(c);
}

/// Shrunk-everything profile sized for single-core runs: smaller nets and
/// ensemble, a short planning horizon, and capped per-episode fits.
inline void apply_desk_scale(nlohmann::json& j) {
  j["episodes"] = 40;
  j["planner"]["horizon"] = 10;
  j["planner"]["iterations"] = 5;
  j["planner"]["population"] = 64;
  j["planner"]["elites"] = 8;
  j["planner"]["neighbors"] = 10;
  j["planner"]["samples_per_neighbor"] = 4;
  j["ensemble"]["num_members"] = 3;
  j["ensemble"]["dyn_hidden"] = std::vector<int>{32, 32};
  j["ensemble"]["rew_hidden"] = std::vector<int>{32};
  j["model_training"]["horizon"] = 5;
  j["model_training"]["batch_size"] = 16;
  j["model_training"]["max_steps_per_fit"] = 100;
}

}  // namespace detail

/// Built-in experiment profiles. Configs may inherit from one via a "base"
/// key; remaining keys are merge-patched on top.
inline nlohmann::json experiment_preset(const std::string& name) {
  if (name == "tilted_pushing_mi") {
    nlohmann::json j = detail::base_experiment(name, "tilted_pushing", "mi");
    j["episodes"] = 6000;  // ~300k steps
    return j;
  }
  if (name == "tilted_pushing_pets") {
    nlohmann::json j = detail::base_experiment(name, "tilted_pushing", "none");
    j["episodes"] = 6000;
    return j;
  }
  if (name == "tilted_pushing_maze_li") {
    nlohmann::json j = detail::base_experiment(name, "tilted_pushing_maze", "li");
    j["episodes"] = 6000;
    j["beta"]["mode"] = "adaptive";
    j["beta"]["aggregator"] = "max";
    j["beta"]["alpha"] = 1e8;
    j["beta"]["gamma"] = 2e5;
    return j;
  }
  if (name == "desk_mi" || name == "desk_pets") {
    nlohmann::json j =
        detail::base_experiment(name, "desk_tilted_pushing", name == "desk_mi" ? "mi" : "none");
    detail::apply_desk_scale(j);
    return j;
  }
  if (name == "desk_maze_mi" || name == "desk_maze_pets") {
    nlohmann::json j = detail::base_experiment(name, "desk_tilted_pushing_maze",
                                               name == "desk_maze_mi" ? "mi" : "none");
    detail::apply_desk_scale(j);
    return j;
  }
  throw std::invalid_argument("unknown experiment preset: " + name);
}

inline ExperimentConfig load_experiment_config(nlohmann::json j) {
  if (j.contains("base")) {
    nlohmann::json base = experiment_preset(j.at("base").get<std::string>());
    j.erase("base");
    base.merge_patch(j);
    j = std::move(base);
  }
  return experiment_config_from_json(j);
}

inline std::string config_hash(const nlohmann::json& j) {
  // FNV-1a over the canonical dump; enough to detect config drift.
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- run artifacts -----------------------------------------------------------

inline void write_histogram_csv(const Eigen::MatrixXi& grid, const std::filesystem::path& path) {
  std::ofstream os(path);
  write_schema_line(os, "aex.histogram.v1");
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) os << (c ? "," : "") << grid(r, c);
    os << "\n";
  }
}

inline Eigen::MatrixXi read_histogram_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "# schema=aex.histogram.v1")
    throw std::runtime_error(path.string() + ": bad histogram schema");
  std::vector<std::vector<int>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<int> row;
    for (const auto& cell : split_csv_line(line)) row.push_back(std::stoi(cell));
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXi grid(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      grid(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return grid;
}

/// Trains one seed and writes the run directory: config + manifest, the
/// deterministic metrics.csv, a wall-time sidecar, per-step episode logs for
/// replay, visitation histograms at every 10% of total steps, and a final
/// checkpoint. Everything except timing.csv is bit-reproducible.
inline std::filesystem::path run_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                                      const std::filesystem::path& out_root) {
  namespace fs = std::filesystem;
  const fs::path dir = out_root / cfg.name / ("seed_" + std::to_string(seed));
  fs::create_directories(dir);

  const nlohmann::json cfg_json = to_json(cfg);
  {
    std::ofstream os(dir / "config.json");
    os << cfg_json.dump(2) << "\n";
  }
  {
    std::ofstream os(dir / "manifest.json");
    os << nlohmann::json{{"schema_version", 1},
                         {"experiment", cfg.name},
                         {"seed", seed},
                         {"config_hash", config_hash(cfg_json)},
                         {"library_version", kLibraryVersion}}
              .dump(2)
       << "\n";
  }

  const Env env(resolve_env(cfg));
  Agent agent(cfg.agent, cfg.model, seed);

  std::ofstream metrics(dir / "metrics.csv");
  write_schema_line(metrics, "aex.metrics.v1");
  metrics << "step,episode,train_reward,eval_reward,beta,model_nll,intrinsic_value\n";
  std::ofstream timing(dir / "timing.csv");
  write_schema_line(timing, "aex.timing.v1");
  timing << "episode,wall_time\n";
  std::ofstream episodes(dir / "episodes.csv");
  write_schema_line(episodes, "aex.episodes.v1");
  episodes << "episode,step,kind,reward";
  for (int i = 0; i < 10; ++i) episodes << ",obs" << i;
  for (int i = 0; i < cfg.model.action_dim; ++i) episodes << ",act" << i;
  episodes << "\n";

  std::vector<std::vector<Vec>> train_obs;  // for visitation histograms
  const long total_steps = static_cast<long>(cfg.agent.episodes) * cfg.agent.episode_length;
  int milestone_idx = 1;
  const auto milestone_step = [total_steps](int idx) {
    return (static_cast<long>(idx) * total_steps + 9) / 10;
  };
  auto t_prev = std::chrono::steady_clock::now();

  auto log_episode = [&](int e, const EpisodeRecord& rec, const char* kind) {
    for (std::size_t t = 0; t < rec.transitions.size(); ++t) {
      const Transition& tr = rec.transitions[t];
      episodes << e << "," << t << "," << kind << "," << fmt_double(tr.reward);
      for (Eigen::Index i = 0; i < 10; ++i) episodes << "," << fmt_double(rec.observations[t][i]);
      for (Eigen::Index i = 0; i < tr.action.size(); ++i)
        episodes << "," << fmt_double(tr.action[i]);
      episodes << "\n";
    }
  };

  const auto on_episode = [&](int e, const EpisodeRecord& train_rec, const EpisodeRecord& eval_rec) {
    log_episode(e, train_rec, "train");
    log_episode(e, eval_rec, "eval");
    train_obs.push_back(train_rec.observations);
    while (milestone_idx <= 10 && agent.total_steps() >= milestone_step(milestone_idx)) {
      char name[32];
      std::snprintf(name, sizeof(name), "histogram_%03d.csv", milestone_idx * 10);
      write_histogram_csv(visitation_histogram(train_obs, env.config(), cfg.histogram_bins),
                          dir / name);
      ++milestone_idx;
    }
    const auto now = std::chrono::steady_clock::now();
    timing << e << "," << fmt_double(std::chrono::duration<double>(now - t_prev).count()) << "\n";
    t_prev = now;
  };

  const std::vector<TrainLogRow> log = agent.train(env, on_episode);
  for (const auto& r : log)
    metrics << r.step << "," << r.episode << "," << fmt_double(r.train_reward) << ","
            << fmt_double(r.eval_reward) << "," << fmt_double(r.beta) << ","
            << fmt_double(r.model_nll) << "," << fmt_double(r.intrinsic_value) << "\n";

  {
    std::ofstream os(dir / "checkpoint.json");
    if (!os) throw std::runtime_error("cannot write checkpoint in " + dir.string());
    os << agent.checkpoint().dump() << "\n";
  }
  return dir;
}

// --- aggregation -------------------------------------------------------------

/// Cross-seed mean/std per step of the train/eval rewards, truncated to the
/// shortest run.
inline void aggregate(const std::vector<std::filesystem::path>& run_dirs,
                      const std::filesystem::path& out_file) {
  if (run_dirs.empty()) throw std::invalid_argument("aggregate: no run directories");
  std::vector<std::vector<std::vector<std::string>>> runs;
  for (const auto& dir : run_dirs) runs.push_back(read_csv(dir / "metrics.csv", "aex.metrics.v1"));
  std::size_t n_rows = runs[0].size();
  for (const auto& r : runs) n_rows = std::min(n_rows, r.size());

  std::ofstream os(out_file);
  write_schema_line(os, "aex.aggregate.v1");
  os << "step,train_reward_mean,train_reward_std,eval_reward_mean,eval_reward_std\n";
  const double n = static_cast<double>(runs.size());
  for (std::size_t row = 0; row < n_rows; ++row) {
    auto stats = [&](int col) {
      double sum = 0.0, sum_sq = 0.0;
      for (const auto& r : runs) {
        const double v = std::stod(r[row][col]);
        sum += v;
        sum_sq += v * v;
      }
      const double mean = sum / n;
      return std::pair<double, double>(mean, std::sqrt(std::max(0.0, sum_sq / n - mean * mean)));
    };
    const auto [tm, ts] = stats(2);
    const auto [em, es] = stats(3);
    os << runs[0][row][0] << "," << fmt_double(tm) << "," << fmt_double(ts) << "," << fmt_double(em)
       << "," << fmt_double(es) << "\n";
  }
}

/// Runs every seed sequentially and writes the cross-seed aggregate next to
/// the run directories. Returns the per-seed directories.
inline std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg,
                                                         const std::filesystem::path& out_root) {
  std::vector<std::filesystem::path> dirs;
  for (std::uint64_t seed : cfg.seeds) dirs.push_back(run_seed(cfg, seed, out_root));
  aggregate(dirs, out_root / cfg.name / "aggregate.csv");
  return dirs;
}

// --- estimator study ---------------------------------------------------------

struct StudyConfig {
  std::vector<int> sample_counts = {16, 32, 64, 128, 256, 512, 1024};
  int n_models = 1000;
  StudyDims dims;
  std::uint64_t seed = 0;
};

/// Cosine-similarity validation study on random discrete models; one CSV per
/// estimator kind, columns sample_count, kind, mean, std.
inline void run_estimator_study(const StudyConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  Rng rng(mix_seed(cfg.seed, 0x57));
  const std::vector<StudyRow> rows =
      cosine_similarity_study(rng, cfg.sample_counts, cfg.n_models, cfg.dims);
  for (EstimatorKind kind : {EstimatorKind::MI, EstimatorKind::LI}) {
    std::ofstream os(out_dir / ("study_" + to_string(kind) + ".csv"));
    write_schema_line(os, "aex.study.v1");
    os << "sample_count,kind,mean,std\n";
    for (const auto& r : rows)
      if (r.kind == kind)
        os << r.sample_count << "," << to_string(r.kind) << "," << fmt_double(r.mean) << ","
           << fmt_double(r.std_dev) << "\n";
  }
}

// --- replay audit ------------------------------------------------------------

/// Rebuilds the full environment state from an observation. Valid at episode
/// start, where the ball is carried by construction.
inline EnvState env_state_from_obs(const Vec& obs, BallStatus status = BallStatus::Carried) {
  if (obs.size() != 10) throw std::invalid_argument("env_state_from_obs: need a 10-D observation");
  EnvState s;
  s.finger_pos = {obs[0], obs[1]};
  s.finger_vel = {obs[2], obs[3]};
  s.rotation = obs[4];
  s.angular_vel = obs[5];
  s.ball_pos = {obs[6], obs[7]};
  s.ball_vel = {obs[8], obs[9]};
  s.status = status;
  return s;
}

struct ReplayReport {
  int steps = 0;
  double max_state_deviation = 0.0;
  double max_reward_deviation = 0.0;
};

/// Re-simulates one logged training episode from its logged start state and
/// actions; deviations should be exactly zero for an untampered log.
inline ReplayReport replay_episode(const std::filesystem::path& run_dir, int episode_id) {
  const auto rows = read_csv(run_dir / "episodes.csv", "aex.episodes.v1");
  std::vector<std::vector<std::string>> ep;
  for (const auto& r : rows)
    if (std::stoi(r[0]) == episode_id && r[2] == "train") ep.push_back(r);
  if (ep.empty()) throw std::runtime_error("replay: no logged training episode with that id");

  nlohmann::json cfg_json;
  {
    std::ifstream in(run_dir / "config.json");
    if (!in) throw std::runtime_error("replay: missing config.json");
    in >> cfg_json;
  }
  const Env env(resolve_env(experiment_config_from_json(cfg_json)));

  auto obs_of = [](const std::vector<std::string>& r) {
    Vec v(10);
    for (int i = 0; i < 10; ++i) v[i] = std::stod(r[4 + i]);
    return v;
  };
  const int action_dim = static_cast<int>(ep[0].size()) - 14;
  EnvState state = env_state_from_obs(obs_of(ep[0]));
  ReplayReport report;
  for (std::size_t t = 0; t < ep.size(); ++t) {
    Vec action(action_dim);
    for (int i = 0; i < action_dim; ++i) action[i] = std::stod(ep[t][14 + i]);
    // The logged observation at step t is the state the action was taken in.
    report.max_state_deviation =
        std::max(report.max_state_deviation,
                 (state.observe() - obs_of(ep[t])).cwiseAbs().maxCoeff());
    const StepResult sr = env.step(state, action);
    report.max_reward_deviation =
        std::max(report.max_reward_deviation, std::abs(sr.reward - std::stod(ep[t][3])));
    state = sr.state;
    ++report.steps;
  }
  return report;
}

}  // namespace aex

#endif  // AEX_HARNESS_HPP
