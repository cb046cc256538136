#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spinbath/ensemble.hpp"

namespace spinbath {

// Emission/absorption rates seen by the ensemble. The bath ratio
// up/down = e^{-omega*beta_B} is kept exact by always assigning gamma to
// the larger side, so neither rate ever exceeds gamma.
struct DissipatorRates {
  double down = 0.0;  // G(omega), emission side
  double up = 0.0;    // G(-omega), absorption side
};

DissipatorRates rates_from_bath(const BathSpec& bath, double omega);

// One total-spin sector of the block-diagonal state. Sectors with identical
// initial data are folded: `copies` counts the degenerate (J,i) blocks the
// matrix stands for, and rho carries their combined weight in its trace.
struct BlockState {
  HalfInt total_spin;
  double copies = 1.0;
  Eigen::MatrixXcd rho;  // (2J+1)x(2J+1), basis m = -J..J ascending

  [[nodiscard]] double weight() const { return rho.trace().real(); }
};

struct EnsembleState {
  EnsembleSpec spec;
  std::vector<BlockState> blocks;
};

// Right-hand side of the collective master equation restricted to one
// sector: four damping terms plus the two sqrt-weighted feeding terms.
// Trace is conserved identically.
Eigen::MatrixXcd block_rhs(const BlockState& block, const DissipatorRates& rates);

// Thermal preparation at beta0 (+-inf allowed): one folded block per J with
// weight l_J p_J(beta0) and Boltzmann-diagonal entries at beta0.
EnsembleState initial_thermal_blocks(const EnsembleSpec& spec, double beta0);

// Observables of a block-diagonal state.
double ensemble_energy(const EnsembleState& state);              // ground-referenced
double ensemble_entropy(const EnsembleState& state);             // von Neumann
double ensemble_apparent_temperature(const EnsembleState& state);

struct TrajectorySample {
  double t = 0.0;
  double energy = 0.0;
  double entropy = 0.0;
  double apparent_temperature = 0.0;
};

struct EvolveOptions {
  double dt = 0.0;            // 0 = auto: 0.01 / (gmax * (2*ns+1)^2)
  double sample_every = 0.0;  // 0 = ~200 samples across the run
  // The run is shadowed at dt/2; disagreement above this aborts with a
  // step-size error instead of returning silently wrong data.
  double step_check_tol = 1e-7;
  bool keep_states = false;  // store the full state at every sample
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<EnsembleState> states;  // filled only when keep_states
  EnsembleState final_state;
};

// Fixed-step classic fourth-order integration of every block to t_final.
Trajectory evolve(const EnsembleState& initial, const DissipatorRates& rates, double t_final,
                  const EvolveOptions& options = {});

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spinbath
