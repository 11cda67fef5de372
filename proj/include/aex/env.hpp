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

#ifndef AEX_ENV_HPP
#define AEX_ENV_HPP

#include <nlohmann/json.hpp>

#include "aex/common.hpp"

namespace aex {

/// Axis-aligned rectangle on the table, used for the target zone and for
/// maze holes. y grows up the incline.
struct Rect {
  double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

/// Simplified 2D kinematic surrogate of the tilted-table ball-pushing task.
///
/// The table is a tilted plane; x spans the width, y runs up the incline.
/// The finger is a velocity-controlled point that carries the ball against
/// gravity. The ball stays with the finger while the commanded acceleration
/// is within the contact friction budget; exceeding it drops the ball, which
/// then rolls downhill and is unrecoverable for the rest of the episode.
struct EnvConfig {
  double table_width = 0.50;   // m (x)
  double table_length = 0.57;  // m (y, up the incline)
  double tilt = 0.2;           // rad
  double gravity = 9.81;       // m/s^2
  double ball_radius = 0.02;
  double finger_width = 0.02;
  double control_dt = 0.25;    // 4 Hz high-level control
  int substeps = 10;
  double rotation_limit = 0.3;    // rad
  double action_penalty = 0.001;  // coefficient of ||a||^2
  // Action scaling: a velocity difference per control period and a target
  // angular velocity, both from normalized [-1, 1] commands.
  double dv_scale = 0.6;      // m/s per unit command
  double max_speed = 0.4;     // finger speed cap per axis, m/s
  double omega_scale = 1.2;   // rad/s per unit command
  bool rotation_enabled = true;
  // Contact model.
  double friction_ball_finger = 0.5;   // lateral accel budget factor
  double friction_ball_table = 0.05;   // free-ball rolling resistance factor
  double rotation_slip_coeff = 0.3;    // extra lateral demand per rad/s of finger spin
  // Geometry.
  Rect target_zone;            // default derived from table size, see presets
  std::vector<Rect> holes;     // maze variant
  double start_y = 0.05;       // finger start height
  double start_jitter = 0.0;   // uniform jitter radius on the start pose
  int episode_length = 50;

  double contact_offset() const { return ball_radius + 0.5 * finger_width; }
};

/// Standard target zone: 8cm x 5cm, centered, beginning 8cm below the top
/// of the table, scaled proportionally for shrunk tables.
inline Rect default_target_zone(double width, double length, double scale = 1.0) {
  Rect r;
  const double zw = 0.08 * scale, zh = 0.05 * scale, below_top = 0.08 * scale;
  r.x_min = 0.5 * (width - zw);
  r.x_max = 0.5 * (width + zw);
  r.y_max = length - below_top;
  r.y_min = r.y_max - zh;
  return r;
}

inline EnvConfig tilted_pushing() {
  EnvConfig c;
  c.target_zone = default_target_zone(c.table_width, c.table_length);
  return c;
}

inline EnvConfig tilted_pushing_maze() {
  EnvConfig c = tilted_pushing();
  c.friction_ball_finger *= 1.25;  // slightly stickier contact in the maze
  // Two lower holes with a central gap, and an upper band with a gap at the
  // left, so the ball has to be steered around two corners.
  c.holes = {Rect{0.00, 0.19, 0.16, 0.22}, Rect{0.31, 0.50, 0.16, 0.22},
             Rect{0.12, 0.50, 0.34, 0.40}};
  return c;
}

/// Real-robot profile: narrower table, 30-step episodes, rotation disabled.
/// The table length here mirrors the printed value's plausible intent
/// (0.48 m); the literal print (5.18 m) is available by overriding.
inline EnvConfig tilted_pushing_real() {
  EnvConfig c;
  c.table_width = 0.54;
  c.table_length = 0.48;
  c.rotation_enabled = false;
  c.episode_length = 30;
  c.target_zone = default_target_zone(c.table_width, c.table_length);
  return c;
}

/// Shrunk desk-scale variant used for fast end-to-end runs.
inline EnvConfig desk_tilted_pushing() {
  EnvConfig c;
  c.table_width = 0.30;
  c.table_length = 0.30;
  // A proportionally larger zone keeps the discovery problem solvable within
  // the short desk-scale training budget.
  c.target_zone = default_target_zone(c.table_width, c.table_length, 1.6);
  c.start_y = 0.04;
  return c;
}

inline EnvConfig desk_tilted_pushing_maze() {
  EnvConfig c = desk_tilted_pushing();
  c.friction_ball_finger *= 1.25;
  c.holes = {Rect{0.00, 0.11, 0.08, 0.11}, Rect{0.19, 0.30, 0.08, 0.11},
             Rect{0.07, 0.30, 0.17, 0.20}};
  return c;
}

enum class BallStatus { Carried, Free, AtBottom, Trapped };

/// Full internal environment state. The observed vector is always the 10
/// dimensions [finger pos(2), finger vel(2), rotation, angular vel,
/// ball pos(2), ball vel(2)]; the ball status flag is internal.
struct EnvState {
  Eigen::Vector2d finger_pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d finger_vel = Eigen::Vector2d::Zero();
  double rotation = 0.0;
  double angular_vel = 0.0;
  Eigen::Vector2d ball_pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d ball_vel = Eigen::Vector2d::Zero();
  BallStatus status = BallStatus::Carried;

  Vec observe() const {
    Vec v(10);
    v << finger_pos.x(), finger_pos.y(), finger_vel.x(), finger_vel.y(), rotation, angular_vel,
        ball_pos.x(), ball_pos.y(), ball_vel.x(), ball_vel.y();
    return v;
  }
};

inline Eigen::Vector2d carried_ball_offset(const EnvConfig& cfg, double rotation) {
  // The ball rests on the uphill side of the finger; rotating the finger
  // moves the resting point laterally.
  const double d = cfg.contact_offset();
  return {-d * std::sin(rotation), d * std::cos(rotation)};
}

struct StepResult {
  EnvState state;
  double reward = 0.0;
};

class Env {
 public:
  explicit Env(EnvConfig cfg) : cfg_(std::move(cfg)) {}

  const EnvConfig& config() const { return cfg_; }

  /// Ball resting against the finger at the bottom-center start position,
  /// zero velocities. Deterministic up to the configured start jitter.
  EnvState reset(Rng& rng) const {
    EnvState s;
    s.finger_pos = {0.5 * cfg_.table_width, cfg_.start_y};
    if (cfg_.start_jitter > 0.0) {
      s.finger_pos.x() += (2.0 * uniform01(rng) - 1.0) * cfg_.start_jitter;
      s.finger_pos.y() += (2.0 * uniform01(rng) - 1.0) * cfg_.start_jitter;
    }
    s.ball_pos = s.finger_pos + carried_ball_offset(cfg_, 0.0);
    s.status = BallStatus::Carried;
    return s;
  }

  /// One 0.25 s control period. Deterministic.
  StepResult step(const EnvState& state, const Vec& action) const {
    if (action.size() != 3) throw std::invalid_argument("step: action must be 3-D");
    if (!action.allFinite()) throw std::invalid_argument("step: non-finite action");
    const Vec a = action.cwiseMax(-1.0).cwiseMin(1.0);
    EnvState s = state;
    const double dt = cfg_.control_dt;
    const double h = dt / cfg_.substeps;
    const double g_down = cfg_.gravity * std::sin(cfg_.tilt);

    // Finger velocity update (velocity-difference command) and rotation.
    const Eigen::Vector2d v_old = s.finger_vel;
    Eigen::Vector2d v_new = v_old + cfg_.dv_scale * Eigen::Vector2d(a[0], a[1]);
    v_new = v_new.cwiseMax(-cfg_.max_speed).cwiseMin(cfg_.max_speed);
    const double omega = cfg_.rotation_enabled ? a[2] * cfg_.omega_scale : 0.0;
    const Eigen::Vector2d finger_acc = (v_new - v_old) / dt;

    // Contact check for a carried ball: the finger supports the ball from
    // below, so the contact force vanishes if the finger accelerates
    // downhill faster than gravity; lateral demand beyond the Coulomb
    // budget (plus a rotation-jitter term) makes the ball slip off.
    if (s.status == BallStatus::Carried) {
      const double normal_acc = g_down + finger_acc.y();
      const double lateral_demand =
          std::abs(finger_acc.x()) + cfg_.rotation_slip_coeff * std::abs(omega);
      if (normal_acc < 0.0 || lateral_demand > cfg_.friction_ball_finger * normal_acc)
        s.status = BallStatus::Free;  // dropped; unrecoverable this episode
    }

    s.finger_vel = v_new;
    for (int sub = 0; sub < cfg_.substeps; ++sub) {
      // Finger: confined to the table; bound-crossing velocity components
      // are removed.
      s.finger_pos += s.finger_vel * h;
      clamp_axis(s.finger_pos.x(), s.finger_vel.x(), 0.0, cfg_.table_width);
      clamp_axis(s.finger_pos.y(), s.finger_vel.y(), 0.0, cfg_.table_length);
      s.rotation += omega * h;
      if (std::abs(s.rotation) >= cfg_.rotation_limit) {
        s.rotation = std::clamp(s.rotation, -cfg_.rotation_limit, cfg_.rotation_limit);
        s.angular_vel = 0.0;
      } else {
        s.angular_vel = omega;
      }

      switch (s.status) {
        case BallStatus::Carried:
          s.ball_pos = s.finger_pos + carried_ball_offset(cfg_, s.rotation);
          s.ball_pos.x() = std::clamp(s.ball_pos.x(), 0.0, cfg_.table_width);
          s.ball_pos.y() = std::clamp(s.ball_pos.y(), 0.0, cfg_.table_length);
          s.ball_vel = s.finger_vel;
          break;
        case BallStatus::Free: {
          s.ball_vel.y() -= g_down * h;
          const double speed = s.ball_vel.norm();
          if (speed > 0.0) {
            const double dec = cfg_.friction_ball_table * cfg_.gravity * std::cos(cfg_.tilt) * h;
            s.ball_vel *= std::max(0.0, 1.0 - dec / speed);
          }
          s.ball_pos += s.ball_vel * h;
          clamp_axis(s.ball_pos.x(), s.ball_vel.x(), 0.0, cfg_.table_width);
          if (s.ball_pos.y() > cfg_.table_length) {
            s.ball_pos.y() = cfg_.table_length;
            s.ball_vel.y() = 0.0;
          }
          if (s.ball_pos.y() <= cfg_.ball_radius) {
            s.ball_pos.y() = cfg_.ball_radius;
            s.ball_vel.setZero();
            s.status = BallStatus::AtBottom;
          }
          break;
        }
        case BallStatus::AtBottom:
        case BallStatus::Trapped:
          break;  // inert for the rest of the episode
      }

      if (s.status == BallStatus::Carried || s.status == BallStatus::Free) {
        for (const Rect& hole : cfg_.holes) {
          if (hole.contains(s.ball_pos.x(), s.ball_pos.y())) {
            // The finger keeps moving; the ball stays in the hole.
            s.status = BallStatus::Trapped;
            s.ball_vel.setZero();
            break;
          }
        }
      }
    }

    StepResult out;
    out.state = s;
    out.reward = reward(s, a);
    return out;
  }

  /// r(s, a) = g(s) - c * ||a||^2 with g = 1 iff the ball center projection
  /// lies inside the target zone.
  double reward(const EnvState& s, const Vec& clamped_action) const {
    const double g = goal_indicator(s) ? 1.0 : 0.0;
    return g - cfg_.action_penalty * clamped_action.squaredNorm();
  }

  bool goal_indicator(const EnvState& s) const {
    return (s.status == BallStatus::Carried || s.status == BallStatus::Free) &&
           cfg_.target_zone.contains(s.ball_pos.x(), s.ball_pos.y());
  }

 private:
  static void clamp_axis(double& pos, double& vel, double lo, double hi) {
    if (pos < lo) {
      pos = lo;
      if (vel < 0.0) vel = 0.0;
    } else if (pos > hi) {
      pos = hi;
      if (vel > 0.0) vel = 0.0;
    }
  }

  EnvConfig cfg_;
};

/// 2D count grid over ball positions across episodes of observed states.
/// Rows index y bins (bottom to top), columns x bins.
inline Eigen::MatrixXi visitation_histogram(const std::vector<std::vector<Vec>>& episodes,
                                            const EnvConfig& cfg, int bins) {
  Eigen::MatrixXi grid = Eigen::MatrixXi::Zero(bins, bins);
  for (const auto& ep : episodes)
    for (const auto& obs : ep) {
      const double bx = obs[6], by = obs[7];
      const int cx = std::clamp(static_cast<int>(bx / cfg.table_width * bins), 0, bins - 1);
      const int cy = std::clamp(static_cast<int>(by / cfg.table_length * bins), 0, bins - 1);
      grid(cy, cx) += 1;
    }
  return grid;
}

// --- config io -------------------------------------------------------------

inline nlohmann::json to_json(const Rect& r) {
  return nlohmann::json{{"x_min", r.x_min}, {"x_max", r.x_max}, {"y_min", r.y_min}, {"y_max", r.y_max}};
}

inline Rect rect_from_json(const nlohmann::json& j) {
  return Rect{j.at("x_min").get<double>(), j.at("x_max").get<double>(), j.at("y_min").get<double>(),
              j.at("y_max").get<double>()};
}

inline nlohmann::json to_json(const EnvConfig& c) {
  nlohmann::json j{{"table_width", c.table_width},
                   {"table_length", c.table_length},
                   {"tilt", c.tilt},
                   {"gravity", c.gravity},
                   {"ball_radius", c.ball_radius},
                   {"finger_width", c.finger_width},
                   {"control_dt", c.control_dt},
                   {"substeps", c.substeps},
                   {"rotation_limit", c.rotation_limit},
                   {"action_penalty", c.action_penalty},
                   {"dv_scale", c.dv_scale},
                   {"max_speed", c.max_speed},
                   {"omega_scale", c.omega_scale},
                   {"rotation_enabled", c.rotation_enabled},
                   {"friction_ball_finger", c.friction_ball_finger},
                   {"friction_ball_table", c.friction_ball_table},
                   {"rotation_slip_coeff", c.rotation_slip_coeff},
                   {"target_zone", to_json(c.target_zone)},
                   {"start_y", c.start_y},
                   {"start_jitter", c.start_jitter},
                   {"episode_length", c.episode_length}};
  j["holes"] = nlohmann::json::array();
  for (const auto& hole : c.holes) j["holes"].push_back(to_json(hole));
  return j;
}

inline EnvConfig env_config_from_json(const nlohmann::json& j) {
  EnvConfig c;
  c.table_width = j.at("table_width").get<double>();
  c.table_length = j.at("table_length").get<double>();
  c.tilt = j.at("tilt").get<double>();
  c.gravity = j.at("gravity").get<double>();
  c.ball_radius = j.at("ball_radius").get<double>();
  c.finger_width = j.at("finger_width").get<double>();
  c.control_dt = j.at("control_dt").get<double>();
  c.substeps = j.at("substeps").get<int>();
  c.rotation_limit = j.at("rotation_limit").get<double>();
  c.action_penalty = j.at("action_penalty").get<double>();
  c.dv_scale = j.at("dv_scale").get<double>();
  c.max_speed = j.at("max_speed").get<double>();
  c.omega_scale = j.at("omega_scale").get<double>();
  c.rotation_enabled = j.at("rotation_enabled").get<bool>();
  c.friction_ball_finger = j.at("friction_ball_finger").get<double>();
  c.friction_ball_table = j.at("friction_ball_table").get<double>();
  c.rotation_slip_coeff = j.at("rotation_slip_coeff").get<double>();
  c.target_zone = rect_from_json(j.at("target_zone"));
  for (const auto& jh : j.at("holes")) c.holes.push_back(rect_from_json(jh));
  c.start_y = j.at("start_y").get<double>();
  c.start_jitter = j.at("start_jitter").get<double>();
  c.episode_length = j.at("episode_length").get<int>();
  return c;
}

inline EnvConfig env_preset(const std::string& name) {
  if (name == "tilted_pushing") return tilted_pushing();
  if (name == "tilted_pushing_maze") return tilted_pushing_maze();
  if (name == "tilted_pushing_real") return tilted_pushing_real();
  if (name == "desk_tilted_pushing") return desk_tilted_pushing();
  if (name == "desk_tilted_pushing_maze") return desk_tilted_pushing_maze();
  throw std::invalid_argument("unknown env preset: " + name);
}

}  // namespace aex

#endif  // AEX_ENV_HPP
