#include "spinbath/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "spinbath/log_math.hpp"

namespace spinbath {

using logmath::log1mexp;
using logmath::log_big;
using logmath::log_sum_exp;
using logmath::neg_inf;

namespace {
// Below this the expm1/log1mexp closed forms lose relative accuracy to
// cancellation, so the block functions switch to their Taylor series.
constexpr double kSeriesCut = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double log_block_partition(HalfInt total_spin, double x) {
  const int tj = total_spin.twice;
  if (tj == 0) return 0.0;  // Z_0 = 1 for any temperature
  const double J = 0.5 * tj;
  const double ax = std::abs(x);
  if (ax < kSeriesCut) {
    const double jj1 = J * (J + 1.0);
    return std::log(tj + 1.0) + x * x * jj1 / 6.0 -
           x * x * x * x * jj1 * (2.0 * jj1 + 1.0) / 360.0;
  }
  // Z_J = e^{J|x|} (1 - e^{-(2J+1)|x|}) / (1 - e^{-|x|}), even in x.
  return J * ax + log1mexp((tj + 1.0) * ax) - log1mexp(ax);
}

double block_excitation(HalfInt total_spin, double x) {
  const int tj = total_spin.twice;
  const double J = 0.5 * tj;
  if (std::abs(x) < kSeriesCut) {
    const double a2 = (tj + 1.0) * (tj + 1.0);
    const double jj1 = J * (J + 1.0);
    return J - x * jj1 / 3.0 + x * x * x * (a2 * a2 - 1.0) / 720.0 -
           x * x * x * x * x * (a2 * a2 * a2 - 1.0) / 30240.0;
  }
  if (x < 0.0) return tj - block_excitation(total_spin, -x);
  // Both terms are positive and below 1/x; expm1 overflow gives 0 safely.
  return 1.0 / std::expm1(x) - (tj + 1.0) / std::expm1((tj + 1.0) * x);
}

double block_energy(HalfInt total_spin, double x) {
  return block_excitation(total_spin, x) - 0.5 * total_spin.twice;
}

double block_entropy(HalfInt total_spin, double x) {
  if (std::isinf(x)) return 0.0;  // pure edge state in either limit
  return log_block_partition(total_spin, x) + x * block_energy(total_spin, x);
}

Equilibrium::Equilibrium(EnsembleSpec spec) : spec_(spec), table_(build_multiplicity_table(spec)) {
  ladder_ = spec_.total_spin_ladder();
  log_l_.reserve(ladder_.size());
  for (HalfInt J : ladder_) {
    // Parity admits sectors a small ensemble cannot realize (n = 1 below the
    // maximal J); their count is zero and their log-weight is -inf.
    const BigInt& count = table_.mult(J);
    log_l_.push_back(count == 0 ? logmath::neg_inf : log_big(count));
  }
  for (const auto& [m, count] : table_.level_count) log_I_.push_back(log_big(count));
  for (const auto& [m, count] : table_.neighbor_count) log_K_.push_back(log_big(count));
}

double Equilibrium::log_level(HalfInt m) const {
  const int idx = (m.twice + spec_.n * spec_.spin.twice) / 2;
  return log_I_.at(static_cast<std::size_t>(idx));
}

ThermalWeights Equilibrium::thermal_weights(double beta0) const {
  check_beta0(beta0);
  ThermalWeights w;
  w.spec = spec_;
  w.beta0 = beta0;
  w.ladder = ladder_;
  w.log_l = log_l_;
  w.log_p.resize(ladder_.size());

  const int nts = spec_.n * spec_.spin.twice;
  if (std::isinf(beta0)) {
    // Ground or fully inverted preparation: all weight in the top sector.
    for (std::size_t i = 0; i < ladder_.size(); ++i)
      w.log_p[i] = (ladder_[i].twice == nts) ? 0.0 : neg_inf;
    return w;
  }

  const double ax = std::abs(spec_.omega * beta0);  // p_J is even in beta0
  if (ax < kSeriesCut) {
    const double lzs = log_block_partition(spec_.spin, ax);
    for (std::size_t i = 0; i < ladder_.size(); ++i)
      w.log_p[i] = log_block_partition(ladder_[i], ax) - spec_.n * lzs;
    return w;
  }
  // log p_J = (J - ns)|x0| + L(2J+1) - n L(2s+1) + (n-1) L(1), L(k) = ln(1-e^{-k|x0|}).
  // The linear-in-|x0| parts combine exactly; only O(1) logs remain, which
  // keeps sum_J l_J p_J = 1 at the 1e-12 level even for |x0| ~ 50.
  const double L1 = log1mexp(ax);
  const double Ls = log1mexp((spec_.spin.twice + 1.0) * ax);
  for (std::size_t i = 0; i < ladder_.size(); ++i) {
    const int tj = ladder_[i].twice;
    w.log_p[i] = static_cast<double>((tj - nts) / 2) * ax + log1mexp((tj + 1.0) * ax) -
                 spec_.n * Ls + (spec_.n - 1) * L1;
  }
  return w;
}

std::vector<double> Equilibrium::log_weights(double beta0) const {
  ThermalWeights w = thermal_weights(beta0);
  std::vector<double> lw(w.log_p.size());
  for (std::size_t i = 0; i < lw.size(); ++i) lw[i] = w.log_weight(i);
  return lw;
}

double Equilibrium::steady_energy(double beta0, double beta_B) const {
  const auto lw = log_weights(beta0);
  const double xB = spec_.omega * beta_B;
  const double ns = spec_.ns();
  double acc = 0.0;
  for (std::size_t i = 0; i < ladder_.size(); ++i) {
    if (lw[i] == neg_inf) continue;
    // e_J + omega*ns, written as excitation + (ns - J): every term is >= 0,
    // so the ground-referenced energy has no cancellation at large |x|.
    acc += std::exp(lw[i]) * (block_excitation(ladder_[i], xB) + (ns - 0.5 * ladder_[i].twice));
  }
  return spec_.omega * acc;
}

double Equilibrium::thermal_energy(double beta) const {
  check_beta0(beta);
  if (std::isinf(beta)) return beta > 0 ? 0.0 : 2.0 * spec_.omega * spec_.ns();
  return spec_.n * spec_.omega * block_excitation(spec_.spin, spec_.omega * beta);
}

double Equilibrium::dicke_energy(double beta_B) const {
  return spec_.omega * block_excitation(spec_.max_total_spin(), spec_.omega * beta_B);
}

double Equilibrium::steady_energy_beta0_slope(double beta0, double beta_B) const {
  check_beta0(beta0);
  if (std::isinf(beta0)) return 0.0;  // weights are pinned to the top sector
  const auto lw = log_weights(beta0);
  const double x0 = spec_.omega * beta0;
  const double xB = spec_.omega * beta_B;
  std::vector<double> e0(ladder_.size()), eB(ladder_.size());
  for (std::size_t i = 0; i < ladder_.size(); ++i) {
    e0[i] = block_energy(ladder_[i], x0);
    eB[i] = block_energy(ladder_[i], xB);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < ladder_.size(); ++i) {
    if (lw[i] == neg_inf) continue;
    for (std::size_t j = i + 1; j < ladder_.size(); ++j) {
      if (lw[j] == neg_inf) continue;
      acc += std::exp(lw[i] + lw[j]) * (e0[j] - e0[i]) * (eB[j] - eB[i]);
    }
  }
  return -spec_.omega * spec_.omega * acc;
}

int Equilibrium::energy_derivative_sign(double beta0, double beta_B) const {
  const double v = steady_energy_beta0_slope(beta0, beta_B);
  return (v > 0.0) - (v < 0.0);
}

double Equilibrium::steady_entropy(double beta0, double beta_B) const {
  const auto w = thermal_weights(beta0);
  const double xB = spec_.omega * beta_B;
  double acc = 0.0;
  for (std::size_t i = 0; i < ladder_.size(); ++i) {
    const double lwi = w.log_weight(i);
    if (lwi == neg_inf) continue;  // 0 ln 0 := 0
    const double wi = std::exp(lwi);
    // Per-sector: beta_B e_J + ln Z_J - ln p_J, summed with weight l_J p_J.
    acc += wi * (xB * block_energy(ladder_[i], xB) + log_block_partition(ladder_[i], xB) -
                 w.log_p[i]);
  }
  return acc;
}

double Equilibrium::thermal_entropy(double beta) const {
  check_beta0(beta);
  if (std::isinf(beta)) return 0.0;
  return spec_.n * block_entropy(spec_.spin, spec_.omega * beta);
}

double Equilibrium::dicke_entropy(double beta_B) const {
  return block_entropy(spec_.max_total_spin(), spec_.omega * beta_B);
}

double Equilibrium::free_energy_variation(double beta0, double beta_B,
                                          DissipationMode mode) const {
  check_beta0(beta0);
  if (beta_B == 0.0 || std::isnan(beta_B))
    throw std::domain_error("free energy variation undefined at beta_B = 0");
  const double xB = spec_.omega * beta_B;
  double energy_after, entropy_after;
  if (mode == DissipationMode::Collective) {
    energy_after = steady_energy(beta0, beta_B);
    entropy_after = steady_entropy(beta0, beta_B);
  } else {
    energy_after = thermal_energy(beta_B);
    entropy_after = thermal_entropy(beta_B);
  }
  const double energy_before = thermal_energy(beta0);
  const double entropy_before = thermal_entropy(beta0);
  return (energy_after - energy_before) -
         spec_.omega * (entropy_after - entropy_before) / xB;
}

double Equilibrium::entropy_production(double beta0, double beta_B,
                                       DissipationMode mode) const {
  return -beta_B * free_energy_variation(beta0, beta_B, mode);
}

std::map<HalfInt, double> Equilibrium::local_populations_dicke(double beta_B) const {
  const double xB = spec_.omega * beta_B;
  const int ts = spec_.spin.twice;
  std::map<HalfInt, double> out;

  if (spec_.n == 1) {
    // Single spin: the top sector is the spin itself, locally thermal.
    const double lnZ = log_block_partition(spec_.spin, xB);
    for (int tm = -ts; tm <= ts; tm += 2)
      out[HalfInt{tm}] = std::exp(-0.5 * tm * xB - lnZ);
    return out;
  }

  const double lnZ = log_block_partition(spec_.max_total_spin(), xB);
  const int sub_span = (spec_.n - 1) * ts;
  for (int tm1 = -ts; tm1 <= ts; tm1 += 2) {
    std::vector<double> terms;
    terms.reserve(log_K_.size());
    for (int tm = -sub_span; tm <= sub_span; tm += 2) {
      const std::size_t k = static_cast<std::size_t>((tm + sub_span) / 2);
      terms.push_back(log_K_[k] - 0.5 * (tm + tm1) * xB - log_level(HalfInt{tm + tm1}));
    }
    out[HalfInt{tm1}] = std::exp(log_sum_exp(terms) - lnZ);
  }
  return out;
}

double Equilibrium::local_inverse_temperature(double beta0, double beta_B) const {
  if (spec_.spin.twice != 1)
    throw std::domain_error(
        "local inverse temperature defined only for s = 1/2 "
        "(the local state is non-thermal for s >= 1)");
  const double excited = steady_energy(beta0, beta_B) / (spec_.n * spec_.omega);
  if (!(excited > 0.0) || !(excited < 1.0))
    throw std::domain_error("local excited-state population must lie strictly in (0,1)");
  return std::log((1.0 - excited) / excited) / spec_.omega;
}

double Equilibrium::apparent_temperature_steady(double beta0, double beta_B) const {
  const auto lw = log_weights(beta0);
  const double xB = spec_.omega * beta_B;
  std::vector<double> emit, absorb;
  for (std::size_t i = 0; i < ladder_.size(); ++i) {
    if (lw[i] == neg_inf) continue;
    const double J = 0.5 * ladder_[i].twice;
    const double base = lw[i] - log_block_partition(ladder_[i], xB);
    for (int tm = -ladder_[i].twice; tm <= ladder_[i].twice; tm += 2) {
      const double m = 0.5 * tm;
      const double down = (J + m) * (J - m + 1.0);  // <J+ J-> weight
      const double up = (J - m) * (J + m + 1.0);    // <J- J+> weight
      if (down > 0.0) emit.push_back(base - m * xB + std::log(down));
      if (up > 0.0) absorb.push_back(base - m * xB + std::log(up));
    }
  }
  const double le = log_sum_exp(emit);
  const double la = log_sum_exp(absorb);
  if (le == neg_inf)
    throw std::domain_error("dark steady state: <J+ J-> vanishes, apparent temperature undefined");
  return spec_.omega / (la - le);
}

double Equilibrium::apparent_temperature_dephased(double beta_B) const {
  if (beta_B == 0.0) return kInf;
  if (spec_.n == 1) return 1.0 / beta_B;  // nothing to dephase for one spin
  const double xB = spec_.omega * beta_B;
  std::vector<double> emit, absorb;
  for (std::size_t i = 0; i < ladder_.size(); ++i) {
    const double J = 0.5 * ladder_[i].twice;
    for (int tm = -ladder_[i].twice; tm <= ladder_[i].twice; tm += 2) {
      const double m = 0.5 * tm;
      const double base = log_l_[i] - log_level(HalfInt{tm}) - m * xB;
      const double down = (J + m) * (J - m + 1.0);
      const double up = (J - m) * (J + m + 1.0);
      if (down > 0.0) emit.push_back(base + std::log(down));
      if (up > 0.0) absorb.push_back(base + std::log(up));
    }
  }
  return spec_.omega / (log_sum_exp(absorb) - log_sum_exp(emit));
}

SteadyStateSummary Equilibrium::summary(double beta0, double beta_B) const {
  SteadyStateSummary s;
  s.energy = steady_energy(beta0, beta_B);
  s.entropy = steady_entropy(beta0, beta_B);
  s.free_energy_variation = free_energy_variation(beta0, beta_B, DissipationMode::Collective);
  s.entropy_production = -beta_B * s.free_energy_variation;
  s.apparent_temperature = apparent_temperature_steady(beta0, beta_B);
  return s;
}

}  // namespace spinbath
