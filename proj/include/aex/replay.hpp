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

#ifndef AEX_REPLAY_HPP
#define AEX_REPLAY_HPP

#include <nlohmann/json.hpp>

#include "aex/common.hpp"

namespace aex {

struct Transition {
  Vec prev_state;
  Vec action;
  Vec next_state;
  double reward = 0.0;
  int episode_id = 0;
  int step_index = 0;
};

/// Unbounded, episode-aligned transition store. Episode boundaries are
/// preserved because the multi-step training loss needs contiguous windows;
/// nothing is ever evicted.
class ReplayBuffer {
 public:
  void add_episode(std::vector<Transition> episode) {
    total_ += episode.size();
    episodes_.push_back(std::move(episode));
  }

  std::size_t num_episodes() const { return episodes_.size(); }
  std::size_t total_transitions() const { return total_; }
  bool empty() const { return total_ == 0; }

  const std::vector<Transition>& episode(std::size_t i) const { return episodes_.at(i); }
  const std::vector<std::vector<Transition>>& episodes() const { return episodes_; }

 private:
  std::vector<std::vector<Transition>> episodes_;
  std::size_t total_ = 0;
};

inline nlohmann::json to_json(const Transition& t) {
  return nlohmann::json{
      {"prev_state", std::vector<double>(t.prev_state.data(), t.prev_state.data() + t.prev_state.size())},
      {"action", std::vector<double>(t.action.data(), t.action.data() + t.action.size())},
      {"next_state", std::vector<double>(t.next_state.data(), t.next_state.data() + t.next_state.size())},
      {"reward", t.reward},
      {"episode_id", t.episode_id},
      {"step_index", t.step_index}};
}

inline Transition transition_from_json(const nlohmann::json& j) {
  auto vec = [](const nlohmann::json& a) {
    auto v = a.get<std::vector<double>>();
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
  };
  Transition t;
  t.prev_state = vec(j.at("prev_state"));
  t.action = vec(j.at("action"));
  t.next_state = vec(j.at("next_state"));
  t.reward = j.at("reward").get<double>();
  t.episode_id = j.at("episode_id").get<int>();
  t.step_index = j.at("step_index").get<int>();
  return t;
}

inline nlohmann::json to_json(const ReplayBuffer& b) {
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& ep : b.episodes()) {
    nlohmann::json je = nlohmann::json::array();
    for (const auto& t : ep) je.push_back(to_json(t));
    eps.push_back(std::move(je));
  }
  return nlohmann::json{{"episodes", std::move(eps)}};
}

inline ReplayBuffer replay_buffer_from_json(const nlohmann::json& j) {
  ReplayBuffer b;
  for (const auto& je : j.at("episodes")) {
    std::vector<Transition> ep;
    ep.reserve(je.size());
    for (const auto& jt : je) ep.push_back(transition_from_json(jt));
    b.add_episode(std::move(ep));
  }
  return b;
}

}  // namespace aex

#endif  // AEX_REPLAY_HPP
