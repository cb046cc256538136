#include "spinbath/otto.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinbath/dynamics.hpp"  // ConvergenceError
#include "spinbath/log_math.hpp"

namespace spinbath {

namespace {

// d^2 csch^2(d x/2) - csch^2(x/2): four times the x-derivative of the block
// excitation number of a (d-1)/2 spin. The two csch^2 poles cancel, so near
// x = 0 the subtracted series is used instead.
double htilde(int dimension, double x) {
  const double y = 0.5 * x;
  const double a = static_cast<double>(dimension);
  if (std::abs(a * y) < 0.01) {
    const double a2 = a * a, y2 = y * y;
    return -(a2 - 1.0) / 3.0 + y2 * (a2 * a2 - 1.0) / 15.0 -
           2.0 * y2 * y2 * (a2 * a2 * a2 - 1.0) / 189.0;
  }
  return a * a * logmath::csch2(a * y) - logmath::csch2(y);
}

// 0.25 * sum_J w_J [ n htilde_{2s+1} - htilde_{2J+1} ] at x = omega*beta:
// the x-derivative of (thermal - steady) energy in units of omega.
double gap_slope_x(const ThermalWeights& tw, double x) {
  const int n = tw.spec.n;
  const int site_dim = tw.spec.local_dim();
  double acc = 0.0;
  for (std::size_t i = 0; i < tw.ladder.size(); ++i) {
    const double lw = tw.log_weight(i);
    if (std::isinf(lw)) continue;
    acc += std::exp(lw) * (n * htilde(site_dim, x) - htilde(tw.ladder[i].twice + 1, x));
  }
  return 0.25 * acc;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

void CycleSpec::validate() const {
  ensemble.validate();
  check_beta0(beta0);
  if (!std::isfinite(beta_hot) || beta_hot < 0.0)
    throw std::invalid_argument("cycle: beta_hot must be finite and >= 0");
  if (!std::isfinite(beta_cold) || beta_cold <= beta_hot)
    throw std::invalid_argument("cycle: beta_cold must be finite and exceed beta_hot");
  if (!std::isfinite(compression) || compression > 1.0 ||
      compression * beta_cold <= beta_hot)
    throw std::invalid_argument(
        "cycle: compression must lie in (beta_hot/beta_cold, 1] so the compressed "
        "cold contact is still colder than the hot one");
}

CycleReport cycle_work(const Equilibrium& eq, const CycleSpec& cycle) {
  cycle.validate();
  const double lam = cycle.compression;
  const double bce = cycle.effective_cold_beta();

  CycleReport r;
  r.heat_hot_collective = eq.steady_energy(cycle.beta0, cycle.beta_hot) -
                          eq.steady_energy(cycle.beta0, bce);
  r.heat_hot_independent = eq.thermal_energy(cycle.beta_hot) - eq.thermal_energy(bce);
  r.heat_cold_collective = -lam * r.heat_hot_collective;
  r.heat_cold_independent = -lam * r.heat_hot_independent;
  r.work_collective = -(1.0 - lam) * r.heat_hot_collective;
  r.work_independent = -(1.0 - lam) * r.heat_hot_independent;
  r.efficiency = 1.0 - lam;
  r.enhancement_ratio = r.heat_hot_collective / r.heat_hot_independent;
  r.amplified = amplification_condition(eq, cycle);
  return r;
}

double energy_gap_slope(const Equilibrium& eq, double beta0, double beta) {
  check_beta0(beta0);
  if (!std::isfinite(beta)) throw std::invalid_argument("gap slope: beta must be finite");
  const double omega = eq.spec().omega;
  const ThermalWeights tw = eq.thermal_weights(beta0);
  return omega * omega * gap_slope_x(tw, omega * beta);
}

double enhancement_beta_limit(const Equilibrium& eq, double beta0) {
  check_beta0(beta0);
  const ThermalWeights tw = eq.thermal_weights(beta0);
  auto g = [&](double x) { return gap_slope_x(tw, x); };

  // Bracket the sign change geometrically, scanning away from x = 1e-3 in
  // whichever direction the slope is still positive.
  double lo = 1e-3, hi;
  if (g(lo) > 0.0) {
    hi = 2.0 * lo;
    while (g(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e7)
        throw ConvergenceError("enhancement limit: no sign change up to omega*beta = " + sci(hi));
    }
  } else {
    hi = lo;
    lo *= 0.5;
    while (g(lo) <= 0.0) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-12)
        throw ConvergenceError(
            "enhancement limit: slope never positive down to omega*beta = " + sci(lo));
    }
  }

  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) / eq.spec().omega;
}

bool amplification_condition(const Equilibrium& eq, const CycleSpec& cycle) {
  cycle.validate();
  const double bce = cycle.effective_cold_beta();
  const double drop_collective = eq.steady_entropy(cycle.beta0, cycle.beta_hot) -
                                 eq.steady_entropy(cycle.beta0, bce);
  const double drop_independent =
      eq.thermal_entropy(cycle.beta_hot) - eq.thermal_entropy(bce);
  return drop_collective > drop_independent;
}

std::vector<SweepRow> enhancement_sweep(const Equilibrium& eq, double beta0, double beta_hot,
                                        double compression,
                                        const std::vector<double>& beta_cold_grid) {
  std::vector<SweepRow> rows;
  rows.reserve(beta_cold_grid.size());
  const double scale = eq.spec().omega * eq.spec().ns();
  for (double bc : beta_cold_grid) {
    CycleSpec cycle;
    cycle.ensemble = eq.spec();
    cycle.beta0 = beta0;
    cycle.beta_hot = beta_hot;
    cycle.beta_cold = bc;
    cycle.compression = compression;
    const CycleReport r = cycle_work(eq, cycle);
    rows.push_back({cycle.effective_cold_beta(), r.work_collective, r.work_independent,
                    (r.heat_hot_collective - r.heat_hot_independent) / scale,
                    r.enhancement_ratio});
  }
  return rows;
}

}  // namespace spinbath
