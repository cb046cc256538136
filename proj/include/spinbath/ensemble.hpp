#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spinbath/half_integer.hpp"

namespace spinbath {

// Units: hbar = k_B = 1 throughout. omega is the level splitting, so every
// inverse temperature beta enters the formulas only through x = omega*beta.
struct EnsembleSpec {
  int n = 1;           // number of spins
  HalfInt spin{1};     // local spin s (default 1/2)
  double omega = 1.0;  // level splitting

  void validate() const {
    if (n < 1) throw std::invalid_argument("ensemble: n must be >= 1");
    if (spin.twice < 1) throw std::invalid_argument("ensemble: spin must be >= 1/2");
    if (!(omega > 0.0) || !std::isfinite(omega))
      throw std::invalid_argument("ensemble: omega must be positive and finite");
  }

  [[nodiscard]] int local_dim() const { return spin.twice + 1; }  // 2s+1
  [[nodiscard]] HalfInt max_total_spin() const { return HalfInt{n * spin.twice}; }
  // Ladder bottom: ns integer -> 0, ns half-integer -> 1/2.
  [[nodiscard]] HalfInt min_total_spin() const { return HalfInt{(n * spin.twice) % 2}; }
  [[nodiscard]] double ns() const { return 0.5 * n * spin.twice; }

  // Ascending ladder J0, J0+1, ..., ns of total-spin sectors.
  [[nodiscard]] std::vector<HalfInt> total_spin_ladder() const {
    std::vector<HalfInt> out;
    for (int tj = min_total_spin().twice; tj <= max_total_spin().twice; tj += 2)
      out.push_back(HalfInt{tj});
    return out;
  }
};

struct BathSpec {
  double beta_B = 1.0;  // bath inverse temperature; may be negative, must be finite
  double gamma = 1.0;   // overall dissipation rate scale

  void validate() const {
    if (!std::isfinite(beta_B)) throw std::invalid_argument("bath: beta_B must be finite");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw std::invalid_argument("bath: gamma must be positive and finite");
  }
};

enum class DissipationMode { Collective, Independent };

// The initial-preparation temperature beta0 admits +-infinity as first-class
// values (ground / fully inverted preparations).
inline void check_beta0(double beta0) {
  if (std::isnan(beta0)) throw std::invalid_argument("beta0 must not be NaN");
}

}  // namespace spinbath
