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

#ifndef AEX_COMMON_HPP
#define AEX_COMMON_HPP

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aex {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kLnTwoPi = 1.8378770664093454835606594728112;

/// Cheap stateless mixing of a base seed with stream ids, so independent
/// components (ensemble members, seeds of a sweep, ...) get decorrelated
/// rng streams from a single experiment seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double uniform01(Rng& rng) {
  // 53-bit mantissa, strictly inside (0, 1).
  return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

/// Box-Muller, one value per call. Stateless, so rng consumption is easy to
/// reason about when proving bit-identical reductions between code paths.
inline double standard_normal(Rng& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

inline Vec normal_vec(Rng& rng, Eigen::Index n) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = standard_normal(rng);
  return v;
}

/// log(mean(exp(v))) over all entries except `skip` (pass -1 to use all).
/// Centered on the row max so that identical inputs reproduce the common
/// value exactly, not just up to rounding.
inline double log_mean_exp_excluding(const Vec& v, Eigen::Index skip) {
  Eigen::Index n = 0;
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i == skip) continue;
    ++n;
    mx = std::max(mx, v[i]);
  }
  if (n == 0) throw std::invalid_argument("log_mean_exp_excluding: empty");
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i == skip) continue;
    s += std::exp(v[i] - mx);
  }
  return mx + std::log(s / static_cast<double>(n));
}

inline bool all_finite(const Eigen::Ref<const Mat>& m) {
  return m.allFinite();
}

inline std::string rng_state_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

inline void rng_state_from_string(Rng& rng, const std::string& s) {
  std::istringstream is(s);
  is >> rng;
  if (is.fail()) throw std::runtime_error("bad rng state string");
}

}  // namespace aex

#endif  // AEX_COMMON_HPP
