#include "spinbath/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include "spinbath/equilibrium.hpp"
#include "spinbath/log_math.hpp"

namespace spinbath {

DissipatorRates rates_from_bath(const BathSpec& bath, double omega) {
  bath.validate();
  const double x = omega * bath.beta_B;
  DissipatorRates r;
  if (x >= 0.0) {
    r.down = bath.gamma;
    r.up = bath.gamma * std::exp(-x);
  } else {
    r.up = bath.gamma;
    r.down = bath.gamma * std::exp(x);
  }
  return r;
}

Eigen::MatrixXcd block_rhs(const BlockState& block, const DissipatorRates& rates) {
  const int tj = block.total_spin.twice;
  const double J = 0.5 * tj;
  const int d = tj + 1;
  const Eigen::MatrixXcd& rho = block.rho;

  // Ladder factors indexed by row a = 0..d-1 with m = a - J:
  //   fdown(m) = (J+m)(J-m+1)  [emission out of m]
  //   fup(m)   = (J-m)(J+m+1)  [absorption out of m]
  Eigen::VectorXd fdown(d), fup(d);
  for (int a = 0; a < d; ++a) {
    const double m = a - J;
    fdown(a) = (J + m) * (J - m + 1.0);
    fup(a) = (J - m) * (J + m + 1.0);
  }

  Eigen::MatrixXcd out(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      std::complex<double> v =
          -0.5 * (rates.down * (fdown(a) + fdown(b)) + rates.up * (fup(a) + fup(b))) * rho(a, b);
      if (a + 1 < d && b + 1 < d)
        v += rates.down * std::sqrt(fdown(a + 1) * fdown(b + 1)) * rho(a + 1, b + 1);
      if (a > 0 && b > 0) v += rates.up * std::sqrt(fup(a - 1) * fup(b - 1)) * rho(a - 1, b - 1);
      out(a, b) = v;
    }
  }
  return out;
}

EnsembleState initial_thermal_blocks(const EnsembleSpec& spec, double beta0) {
  check_beta0(beta0);
  Equilibrium eq(spec);
  ThermalWeights w = eq.thermal_weights(beta0);

  EnsembleState state;
  state.spec = spec;
  const double x0 = spec.omega * beta0;
  for (std::size_t i = 0; i < w.ladder.size(); ++i) {
    const double lw = w.log_weight(i);
    if (lw == logmath::neg_inf) continue;  // unpopulated sector
    const HalfInt J = w.ladder[i];
    const int d = J.twice + 1;
    BlockState b;
    b.total_spin = J;
    b.copies = std::exp(w.log_l[i]);
    b.rho = Eigen::MatrixXcd::Zero(d, d);
    if (std::isinf(x0)) {
      // Pure edge state of the top sector: m=-J for +inf, m=+J for -inf.
      b.rho(x0 > 0 ? 0 : d - 1, x0 > 0 ? 0 : d - 1) = 1.0;
    } else {
      const double lnZ = log_block_partition(J, x0);
      for (int a = 0; a < d; ++a) {
        const double m = a - 0.5 * J.twice;
        b.rho(a, a) = std::exp(-m * x0 - lnZ);
      }
    }
    b.rho *= std::exp(lw);  // trace = total folded weight l_J p_J
    state.blocks.push_back(std::move(b));
  }
  return state;
}

double ensemble_energy(const EnsembleState& state) {
  const double omega = state.spec.omega;
  double acc = 0.0;
  for (const BlockState& b : state.blocks) {
    const double J = 0.5 * b.total_spin.twice;
    for (int a = 0; a < b.rho.rows(); ++a) acc += (a - J) * b.rho(a, a).real();
  }
  return omega * acc + omega * state.spec.ns();
}

double ensemble_entropy(const EnsembleState& state) {
  double acc = 0.0;
  for (const BlockState& b : state.blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (b.rho + b.rho.adjoint()));
    const double logc = std::log(b.copies);
    for (double lam : es.eigenvalues()) {
      if (lam <= 0.0) continue;  // 0 ln 0 := 0; tiny negatives are solver noise
      // The fold stands for `copies` blocks of eigenvalue lam/copies each:
      // -copies * (lam/copies) ln(lam/copies) = -lam (ln lam - ln copies).
      acc -= lam * (std::log(lam) - logc);
    }
  }
  return acc;
}

double ensemble_apparent_temperature(const EnsembleState& state) {
  double emit = 0.0, absorb = 0.0;
  for (const BlockState& b : state.blocks) {
    const double J = 0.5 * b.total_spin.twice;
    for (int a = 0; a < b.rho.rows(); ++a) {
      const double m = a - J;
      emit += (J + m) * (J - m + 1.0) * b.rho(a, a).real();
      absorb += (J - m) * (J + m + 1.0) * b.rho(a, a).real();
    }
  }
  if (!(emit > 0.0))
    throw std::domain_error("dark state: <J+ J-> vanishes, apparent temperature undefined");
  return state.spec.omega / std::log(absorb / emit);
}

namespace {

void rk4_step(BlockState& block, const DissipatorRates& rates, double dt) {
  const Eigen::MatrixXcd k1 = block_rhs(block, rates);
  BlockState tmp = block;
  tmp.rho = block.rho + 0.5 * dt * k1;
  const Eigen::MatrixXcd k2 = block_rhs(tmp, rates);
  tmp.rho = block.rho + 0.5 * dt * k2;
  const Eigen::MatrixXcd k3 = block_rhs(tmp, rates);
  tmp.rho = block.rho + dt * k3;
  const Eigen::MatrixXcd k4 = block_rhs(tmp, rates);
  block.rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double max_block_deviation(const EnsembleState& a, const EnsembleState& b) {
  double dev = 0.0;
  for (std::size_t i = 0; i < a.blocks.size(); ++i)
    dev = std::max(dev, (a.blocks[i].rho - b.blocks[i].rho).cwiseAbs().maxCoeff());
  return dev;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

Trajectory evolve(const EnsembleState& initial, const DissipatorRates& rates, double t_final,
                  const EvolveOptions& options) {
  if (!(t_final >= 0.0) || !std::isfinite(t_final))
    throw std::invalid_argument("evolve: t_final must be finite and >= 0");
  const double gmax = std::max(rates.down, rates.up);
  if (!(gmax > 0.0)) throw std::invalid_argument("evolve: rates must not both vanish");

  const double two_ns_plus_1 = initial.spec.n * initial.spec.spin.twice + 1.0;
  double dt = options.dt > 0.0 ? options.dt : 0.01 / (gmax * two_ns_plus_1 * two_ns_plus_1);
  const long steps = std::max(1L, static_cast<long>(std::ceil(t_final / dt - 1e-9)));
  dt = t_final / static_cast<double>(steps);  // land exactly on t_final

  double sample_every = options.sample_every > 0.0 ? options.sample_every : t_final / 200.0;
  long sample_stride = std::max(1L, static_cast<long>(std::llround(sample_every / dt)));

  EnsembleState state = initial;
  EnsembleState shadow = initial;  // integrated at dt/2 as an error monitor

  Trajectory traj;
  auto record = [&](double t) {
    double temp;
    try {
      temp = ensemble_apparent_temperature(state);
    } catch (const std::domain_error&) {
      temp = std::numeric_limits<double>::quiet_NaN();  // dark snapshot (e.g. t=0 pure edge)
    }
    traj.samples.push_back({t, ensemble_energy(state), ensemble_entropy(state), temp});
    if (options.keep_states) traj.states.push_back(state);
  };
  record(0.0);

  for (long step = 1; step <= steps; ++step) {
    for (BlockState& b : state.blocks) rk4_step(b, rates, dt);
    for (BlockState& b : shadow.blocks) {
      rk4_step(b, rates, 0.5 * dt);
      rk4_step(b, rates, 0.5 * dt);
    }
    if (step % sample_stride == 0 || step == steps) {
      const double dev = max_block_deviation(state, shadow);
      if (dev > options.step_check_tol)
        throw ConvergenceError("step-halving check failed: |rho_dt - rho_dt/2| = " + sci(dev) +
                               " at t = " + sci(step * dt) + "; reduce dt (currently " + sci(dt) +
                               ")");
      record(step * dt);
    }
  }
  traj.final_state = std::move(state);
  return traj;
}

}  // namespace spinbath
