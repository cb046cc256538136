#pragma once

// Brute-force reference implementation on the full (2s+1)^n product space.
// Everything here is deliberately direct: dense operators assembled by
// Kronecker lifting, the master equation integrated as written, observables
// taken as plain traces. The closed forms elsewhere in the library are
// validated against this module, never the other way around.

#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "spinbath/dynamics.hpp"
#include "spinbath/ensemble.hpp"
#include "spinbath/half_integer.hpp"

namespace spinbath::oracle {

// Hard ceiling on the product-space dimension (2s+1)^n.
inline constexpr long kMaxFullDimension = 4096;
// Up to here the relaxation is driven by a dense d^2 x d^2 propagator;
// beyond it falls back to direct time stepping.
inline constexpr long kPropagatorDimensionCap = 32;

// Site-resolved coherent disorder,
//   H_noise = sum_k delta[k] jz_k + sum_{k<l} exchange(k,l) (jp_k jm_l + jm_k jp_l).
// An empty delta vector or a 0x0 exchange matrix means "none".
struct NoiseSpec {
  std::vector<double> delta;
  Eigen::MatrixXd exchange;  // symmetric, diagonal ignored

  void validate(int n) const;
  [[nodiscard]] bool empty() const { return delta.empty() && exchange.size() == 0; }
};

enum class SolveMethod { Auto, Propagator, TimeStepping };

class FullSystem {
 public:
  explicit FullSystem(const EnsembleSpec& spec);

  [[nodiscard]] const EnsembleSpec& spec() const { return spec_; }
  [[nodiscard]] long dim() const { return dim_; }

  // Collective operators. jz is diagonal in the product basis and kept as a
  // vector; the dense matrices are built once in the constructor.
  [[nodiscard]] const Eigen::VectorXd& jz_diagonal() const { return jz_; }
  [[nodiscard]] const Eigen::MatrixXd& jplus() const { return jplus_; }
  [[nodiscard]] const Eigen::MatrixXd& jminus() const { return jminus_; }
  [[nodiscard]] const Eigen::MatrixXd& jsquared() const;   // Jz^2 + (J+J- + J-J+)/2
  [[nodiscard]] const Eigen::MatrixXd& jplus_jminus() const;
  [[nodiscard]] const Eigen::MatrixXd& jminus_jplus() const;

  // Single-site operators lifted to position k (0-based, site 0 outermost).
  [[nodiscard]] Eigen::MatrixXd site_jz(int k) const;
  [[nodiscard]] Eigen::MatrixXd site_jplus(int k) const;
  [[nodiscard]] Eigen::MatrixXd site_jminus(int k) const;

  [[nodiscard]] Eigen::MatrixXd noise_hamiltonian(const NoiseSpec& noise) const;

  // d rho / dt: chosen dissipator plus an optional coherent -i[H, rho].
  [[nodiscard]] Eigen::MatrixXcd rhs(const Eigen::MatrixXcd& rho, const DissipatorRates& rates,
                                     DissipationMode mode,
                                     const Eigen::MatrixXd* noise_h = nullptr) const;

  // Product of single-site Gibbs states at beta0 (+inf all ground, -inf all
  // fully excited). Diagonal in the product basis.
  [[nodiscard]] Eigen::MatrixXcd thermal_product_state(double beta0) const;

  // Relax rho0 under the dissipator until ||d rho/dt||_F drops below
  // tol * gmax * (1 + S(S+1)) with S = ns and gmax the larger jump rate.
  [[nodiscard]] Eigen::MatrixXcd steady_state(const Eigen::MatrixXcd& rho0,
                                              const DissipatorRates& rates, DissipationMode mode,
                                              double tol = 1e-12,
                                              SolveMethod method = SolveMethod::Auto) const;

  // Observables, same conventions as the closed forms: energy measured from
  // the collective ground level, omega * (<Jz> + ns); temperature read off
  // the emission/absorption ratio, omega / ln(<J-J+>/<J+J->).
  [[nodiscard]] double energy(const Eigen::MatrixXcd& rho) const;
  [[nodiscard]] double entropy(const Eigen::MatrixXcd& rho) const;
  [[nodiscard]] double apparent_temperature(const Eigen::MatrixXcd& rho) const;

  // Drop every off-diagonal element of the product basis.
  [[nodiscard]] static Eigen::MatrixXcd dephase(const Eigen::MatrixXcd& rho);

  // Reduced state of site 0, and its level populations keyed by m = -s..s.
  [[nodiscard]] Eigen::MatrixXcd reduce_first_site(const Eigen::MatrixXcd& rho) const;
  [[nodiscard]] std::map<HalfInt, double> first_site_populations(
      const Eigen::MatrixXcd& rho) const;

  // Weight tr(P_J rho) carried by each total-spin sector, keyed by J.
  // Uses an eigendecomposition of J^2, cached after the first call.
  [[nodiscard]] std::map<HalfInt, double> sector_weights(const Eigen::MatrixXcd& rho) const;

  struct EnergySample {
    double t;
    double energy;
  };

  // Fixed-step RK4 evolution recording the ground-referenced energy.
  [[nodiscard]] std::vector<EnergySample> evolve_energy(const Eigen::MatrixXcd& rho0,
                                                        const DissipatorRates& rates,
                                                        DissipationMode mode,
                                                        const Eigen::MatrixXd* noise_h,
                                                        double t_final, int samples = 400) const;

 private:
  // All jump operators are real in the product basis, so the Liouvillian
  // (in column-major vec convention) is a real D x D matrix, D = dim^2.
  [[nodiscard]] Eigen::MatrixXd liouvillian(const DissipatorRates& rates,
                                            DissipationMode mode) const;
  [[nodiscard]] Eigen::MatrixXcd steady_by_propagator(const Eigen::MatrixXcd& rho0,
                                                      const DissipatorRates& rates,
                                                      DissipationMode mode, double target) const;
  [[nodiscard]] Eigen::MatrixXcd steady_by_stepping(const Eigen::MatrixXcd& rho0,
                                                    const DissipatorRates& rates,
                                                    DissipationMode mode, double target) const;
  void ensure_sector_basis() const;
  [[nodiscard]] int digit(long index, int site) const;  // level of `site` in basis state `index`

  EnsembleSpec spec_;
  long dim_ = 0;
  std::vector<long> stride_;
  Eigen::VectorXd jz_;
  Eigen::MatrixXd jplus_;
  Eigen::MatrixXd jminus_;
  // Lazy caches for the heavier products.
  mutable Eigen::MatrixXd jsq_, jpjm_, jmjp_;
  mutable Eigen::MatrixXd sector_vectors_;        // eigenvectors of J^2, by column
  mutable std::vector<int> sector_twice_j_;       // 2J per eigencolumn
  mutable bool sector_basis_ready_ = false;
};

// Settling diagnostics for the dissipative evolution with coherent disorder.
// The reference level is the energy of this system's own *noiseless* steady
// state; the trajectory is the *noisy* one started from the beta0 product
// preparation.
struct TransientReport {
  double target_energy = 0.0;
  double band = 0.0;          // half-width of the acceptance window
  bool entered = false;       // trajectory reached the window at all
  double settle_time = 0.0;   // last sampled instant outside the window
  double t_final = 0.0;
  std::vector<FullSystem::EnergySample> trace;

  // Time spent inside the window at the end of the run.
  [[nodiscard]] double held_for() const { return entered ? t_final - settle_time : 0.0; }
};

TransientReport noisy_transient_check(const EnsembleSpec& spec, const BathSpec& bath, double beta0,
                                      const NoiseSpec& noise, double band, double t_final,
                                      int samples = 400);

}  // namespace spinbath::oracle
