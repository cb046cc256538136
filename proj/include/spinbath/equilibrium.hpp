#pragma once

#include <map>
#include <vector>

#include "spinbath/ensemble.hpp"
#include "spinbath/multiplicity.hpp"

namespace spinbath {

// ---- single-block thermal functions, in dimensionless form x = omega*beta ----

// ln Z_J(x) with Z_J = sum_{m=-J}^{J} e^{-m x}; even in x, stable for
// |x| from 1e-300 to ~700 at any J on the ladder.
double log_block_partition(HalfInt total_spin, double x);

// Mean excitation above the block ground state: <J_z>_x + J in [0, 2J].
// This is the cancellation-free core of every energy formula.
double block_excitation(HalfInt total_spin, double x);

// Thermal expectation e_J(x) = <J_z>_x in units of omega (odd in x, e_J(0)=0).
double block_energy(HalfInt total_spin, double x);

// Entropy of one thermal spin-J block: ln Z_J + x e_J (dimensionless).
double block_entropy(HalfInt total_spin, double x);

// ---- ensemble-level weights ----

// Sector weights of the steady state: log p_J(beta0) with
// p_J = Z_J(beta0)/Z_s(beta0)^n. beta0 = +-inf selects the top sector.
struct ThermalWeights {
  EnsembleSpec spec;
  double beta0 = 0.0;
  std::vector<HalfInt> ladder;  // ascending J
  std::vector<double> log_p;    // log p_J, same indexing
  std::vector<double> log_l;    // log l_J, same indexing

  [[nodiscard]] double log_weight(std::size_t i) const { return log_l[i] + log_p[i]; }
};

// Summary of the collective steady state at one (beta0, beta_B) point.
struct SteadyStateSummary {
  double energy = 0.0;                 // ground-referenced, in units of omega*hbar
  double entropy = 0.0;                // von Neumann, dimensionless
  double free_energy_variation = 0.0;  // vs thermal preparation, collective mode
  double entropy_production = 0.0;     // -beta_B * free energy variation
  double apparent_temperature = 0.0;   // = 1/beta_B for every steady state
};

// Closed-form thermodynamics of n spins s relaxing under collective
// dissipation from a thermal preparation at beta0 into a bath at beta_B.
// Caches the exact multiplicity table; all public methods are const and
// safe to call concurrently.
class Equilibrium {
 public:
  explicit Equilibrium(EnsembleSpec spec);

  [[nodiscard]] const EnsembleSpec& spec() const { return spec_; }
  [[nodiscard]] const MultiplicityTable& table() const { return table_; }

  [[nodiscard]] ThermalWeights thermal_weights(double beta0) const;

  // Steady-state energy E^inf(beta0, beta_B), ground-referenced (+omega*ns).
  [[nodiscard]] double steady_energy(double beta0, double beta_B) const;
  // Independent-dissipation (Gibbs) energy; accepts beta = +-inf limits.
  [[nodiscard]] double thermal_energy(double beta) const;
  // Top-sector (Dicke) energy: the beta0 = +-inf limit of steady_energy.
  [[nodiscard]] double dicke_energy(double beta_B) const;

  // d E^inf / d beta0 via the antisymmetric pair sum; its sign is
  // -sign(beta0*beta_B) analytically.
  [[nodiscard]] double steady_energy_beta0_slope(double beta0, double beta_B) const;
  [[nodiscard]] int energy_derivative_sign(double beta0, double beta_B) const;

  [[nodiscard]] double steady_entropy(double beta0, double beta_B) const;
  [[nodiscard]] double thermal_entropy(double beta) const;  // accepts +-inf
  [[nodiscard]] double dicke_entropy(double beta_B) const;

  // F-variation between the relaxed state and the preparation, with the
  // bath temperature as the reference: dF = [E - S/beta_B]_after - [...]_before.
  [[nodiscard]] double free_energy_variation(double beta0, double beta_B,
                                             DissipationMode mode) const;
  [[nodiscard]] double entropy_production(double beta0, double beta_B,
                                          DissipationMode mode) const;

  // Local (single spin) populations for the beta0 = +-inf steady state,
  // by the K_m/I_m level-count sums; exact partial trace for s = 1/2.
  [[nodiscard]] std::map<HalfInt, double> local_populations_dicke(double beta_B) const;

  // Two-level Gibbs inversion of the per-spin energy; s = 1/2 only.
  [[nodiscard]] double local_inverse_temperature(double beta0, double beta_B) const;

  // hbar*omega / ln(<J-J+>/<J+J->) of the steady state; equals 1/beta_B.
  [[nodiscard]] double apparent_temperature_steady(double beta0, double beta_B) const;
  // Same ratio for the locally dephased top-sector state (1/I_m sums);
  // strictly colder than the bath for beta_B > 0, hotter for beta_B < 0.
  [[nodiscard]] double apparent_temperature_dephased(double beta_B) const;

  [[nodiscard]] SteadyStateSummary summary(double beta0, double beta_B) const;

 private:
  EnsembleSpec spec_;
  MultiplicityTable table_;
  std::vector<HalfInt> ladder_;
  std::vector<double> log_l_;
  std::vector<double> log_I_;  // by m index: twice_m = 2k - n*twice_s
  std::vector<double> log_K_;  // by m index of the (n-1)-spin table; empty if n == 1

  [[nodiscard]] double log_level(HalfInt m) const;
  [[nodiscard]] std::vector<double> log_weights(double beta0) const;
};

}  // namespace spinbath
