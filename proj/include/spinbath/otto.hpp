#pragma once

// Otto cycle built on the collective steady states: the working medium
// thermalises with the hot bath at the full splitting, is adiabatically
// compressed to a fraction `compression` of it, thermalises with the cold
// bath there, and expands back. Populations ride along the adiabats, so
// every quantity reduces to steady-state energies at the hot inverse
// temperature and at the effective cold one, compression * beta_cold.
//
// The same cycle run with independently dissipating spins (plain Gibbs
// states) is the baseline the collective variant is compared against.

#include <limits>
#include <vector>

#include "spinbath/ensemble.hpp"
#include "spinbath/equilibrium.hpp"

namespace spinbath {

struct CycleSpec {
  EnsembleSpec ensemble;
  double beta0 = std::numeric_limits<double>::infinity();  // preparation, +-inf allowed
  double beta_hot = 0.0;
  double beta_cold = 1.0;
  double compression = 0.5;  // lambda = (compressed splitting) / (full splitting)

  void validate() const;
  [[nodiscard]] double effective_cold_beta() const { return compression * beta_cold; }
};

// Signs follow the system-centric convention: heat_* > 0 flows in, work < 0
// is extracted. enhancement_ratio is heat_hot_collective / heat_hot_independent,
// which equals the extracted-work ratio whenever compression < 1 and stays
// finite in the degenerate compression = 1 cycle.
struct CycleReport {
  double heat_hot_collective = 0.0;
  double heat_cold_collective = 0.0;
  double work_collective = 0.0;
  double heat_hot_independent = 0.0;
  double heat_cold_independent = 0.0;
  double work_independent = 0.0;
  double efficiency = 0.0;  // 1 - compression, for either variant
  double enhancement_ratio = 0.0;
  bool amplified = false;   // entropy-variation criterion, see below
};

CycleReport cycle_work(const Equilibrium& eq, const CycleSpec& cycle);

// d/d(beta) of [thermal energy - collective steady energy] at bath inverse
// temperature beta. Positive where making the bath colder widens the energy
// gap the cycle feeds on; its positive root marks the end of that window.
double energy_gap_slope(const Equilibrium& eq, double beta0, double beta);

// The bath inverse temperature where energy_gap_slope crosses zero, bracketed
// by geometric scanning and pinned down by bisection.
double enhancement_beta_limit(const Equilibrium& eq, double beta0);

// True when the collective entropy drop between the two bath contacts exceeds
// the independent one; equivalent to the cycle extracting more work.
bool amplification_condition(const Equilibrium& eq, const CycleSpec& cycle);

struct SweepRow {
  double beta_cold_effective = 0.0;  // compression * beta_cold for this row
  double work_collective = 0.0;
  double work_independent = 0.0;
  double normalized_gain = 0.0;  // (extra heat drawn collectively) / (omega * ns)
  double ratio = 0.0;            // heat_hot_collective / heat_hot_independent
};

// One cycle per cold-bath value; every row must satisfy the CycleSpec window.
std::vector<SweepRow> enhancement_sweep(const Equilibrium& eq, double beta0, double beta_hot,
                                        double compression,
                                        const std::vector<double>& beta_cold_grid);

}  // namespace spinbath
