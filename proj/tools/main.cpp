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

#include <CLI11.hpp>
#include <iostream>

#include "aex/aex.hpp"

namespace {

namespace fs = std::filesystem;

fs::path output_root() {
  if (const char* env = std::getenv("AEX_OUTPUT_ROOT")) return fs::path(env);
  return fs::path("runs");
}

aex::ExperimentConfig load_config(const std::string& config_file, const std::string& preset,
                                  const std::vector<std::uint64_t>& seeds, int episodes) {
  nlohmann::json j;
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) throw std::runtime_error("cannot open config file: " + config_file);
    in >> j;
  } else if (!preset.empty()) {
    j = nlohmann::json{{"base", preset}};
  } else {
    throw std::runtime_error("train needs either --config or --preset");
  }
  // Flag overrides beat config-file values.
  if (!seeds.empty()) j["seeds"] = seeds;
  if (episodes > 0) j["episodes"] = episodes;
  return aex::load_experiment_config(j);
}

int run(int argc, char** argv) {
  CLI::App app{"Information-seeking model-based RL experiments"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Run a training experiment over its seed list");
  std::string config_file, preset;
  std::vector<std::uint64_t> seeds;
  int episodes = -1;
  train->add_option("--config", config_file, "Experiment config JSON file");
  train->add_option("--preset", preset, "Built-in experiment preset name");
  train->add_option("--seeds", seeds, "Override the seed list");
  train->add_option("--episodes", episodes, "Override the episode count");

  // study-estimators
  auto* study = app.add_subcommand("study-estimators",
                                   "Estimator-vs-oracle cosine-similarity study on random "
                                   "discrete models");
  aex::StudyConfig study_cfg;
  study->add_option("--models", study_cfg.n_models, "Number of random models");
  study->add_option("--samples", study_cfg.sample_counts, "Total sample budgets");
  study->add_option("--seed", study_cfg.seed, "Study seed");
  std::string study_out = "study";
  study->add_option("--out", study_out, "Output directory (under the output root)");

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "Cross-seed mean/std summary of run metrics");
  std::vector<std::string> run_dirs;
  std::string agg_out = "aggregate.csv";
  agg->add_option("dirs", run_dirs, "Run directories")->required();
  agg->add_option("--out", agg_out, "Output CSV path");

  // histogram
  auto* hist = app.add_subcommand("histogram", "Visitation histogram from a run's episode log");
  std::string hist_dir, hist_out = "histogram.csv", hist_kind = "train";
  int bins = 20;
  hist->add_option("dir", hist_dir, "Run directory")->required();
  hist->add_option("--bins", bins, "Grid resolution");
  hist->add_option("--kind", hist_kind, "Episode kind: train or eval");
  hist->add_option("--out", hist_out, "Output CSV path");

  // replay
  auto* replay = app.add_subcommand("replay", "Re-simulate a logged episode for audit");
  std::string replay_dir;
  int replay_episode_id = 0;
  replay->add_option("dir", replay_dir, "Run directory")->required();
  replay->add_option("--episode", replay_episode_id, "Training episode id");

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) {
    const aex::ExperimentConfig cfg = load_config(config_file, preset, seeds, episodes);
    const auto dirs = aex::run_experiment(cfg, output_root());
    for (const auto& d : dirs) std::cout << d.string() << "\n";
    return 0;
  }
  if (study->parsed()) {
    aex::run_estimator_study(study_cfg, output_root() / study_out);
    std::cout << (output_root() / study_out).string() << "\n";
    return 0;
  }
  if (agg->parsed()) {
    std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
    aex::aggregate(dirs, agg_out);
    std::cout << agg_out << "\n";
    return 0;
  }
  if (hist->parsed()) {
    const auto rows = aex::read_csv(fs::path(hist_dir) / "episodes.csv", "aex.episodes.v1");
    nlohmann::json cfg_json;
    std::ifstream in(fs::path(hist_dir) / "config.json");
    if (!in) throw std::runtime_error("missing config.json in " + hist_dir);
    in >> cfg_json;
    const aex::EnvConfig env_cfg =
        aex::resolve_env(aex::experiment_config_from_json(cfg_json));
    std::vector<std::vector<aex::Vec>> episodes_obs(1);
    for (const auto& r : rows) {
      if (r[2] != hist_kind) continue;
      aex::Vec v(10);
      for (int i = 0; i < 10; ++i) v[i] = std::stod(r[4 + i]);
      episodes_obs[0].push_back(std::move(v));
    }
    aex::write_histogram_csv(aex::visitation_histogram(episodes_obs, env_cfg, bins), hist_out);
    std::cout << hist_out << "\n";
    return 0;
  }
  if (replay->parsed()) {
    const aex::ReplayReport rep = aex::replay_episode(replay_dir, replay_episode_id);
    std::cout << nlohmann::json{{"steps", rep.steps},
                                {"max_state_deviation", rep.max_state_deviation},
                                {"max_reward_deviation", rep.max_reward_deviation}}
                     .dump()
              << "\n";
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << std::endl;
    return 1;
  }
}
