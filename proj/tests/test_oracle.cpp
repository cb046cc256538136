#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "spinbath/equilibrium.hpp"
#include "spinbath/oracle.hpp"

using namespace spinbath;
using oracle::FullSystem;
using oracle::NoiseSpec;
using oracle::SolveMethod;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd comm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a * b - b * a;
}

// Single-site Gibbs density matrix, m ascending with the digit index.
Eigen::MatrixXcd site_gibbs(int twice_s, double x) {
  const int d = twice_s + 1;
  Eigen::VectorXd w(d);
  for (int a = 0; a < d; ++a) w(a) = std::exp(-x * (a - 0.5 * twice_s));
  w /= w.sum();
  return w.cast<std::complex<double>>().asDiagonal();
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

TEST_CASE("collective operators satisfy the angular momentum algebra") {
  for (auto [n, ts] : {std::pair{2, 1}, {2, 2}, {3, 1}}) {
    const FullSystem sys(EnsembleSpec{n, HalfInt{ts}, 1.0});
    const Eigen::MatrixXd jz = sys.jz_diagonal().asDiagonal();
    CAPTURE(n);
    CAPTURE(ts);
    CHECK((comm(jz, sys.jplus()) - sys.jplus()).norm() < 1e-12);
    CHECK((comm(jz, sys.jminus()) + sys.jminus()).norm() < 1e-12);
    CHECK((comm(sys.jplus(), sys.jminus()) - 2.0 * jz).norm() < 1e-12);
    CHECK(comm(sys.jsquared(), sys.jplus()).norm() < 1e-11);
    // J^2 = J-J+ + Jz(Jz + 1)
    const Eigen::MatrixXd rebuilt = sys.jminus_jplus() + jz * jz + jz;
    CHECK((sys.jsquared() - rebuilt).norm() < 1e-11);
  }
}

TEST_CASE("site operators assemble the collective ones") {
  const FullSystem sys(EnsembleSpec{3, HalfInt{2}, 1.0});
  Eigen::MatrixXd jz_sum = Eigen::MatrixXd::Zero(sys.dim(), sys.dim());
  Eigen::MatrixXd jp_sum = jz_sum;
  for (int k = 0; k < 3; ++k) {
    jz_sum += sys.site_jz(k);
    jp_sum += sys.site_jplus(k);
  }
  CHECK((jz_sum - Eigen::MatrixXd(sys.jz_diagonal().asDiagonal())).norm() < 1e-13);
  CHECK((jp_sum - sys.jplus()).norm() < 1e-13);
  CHECK((sys.site_jminus(1) - sys.site_jplus(1).transpose()).norm() < 1e-13);
}

TEST_CASE("thermal product state is the Gibbs kronecker product") {
  const FullSystem sys(EnsembleSpec{2, HalfInt{2}, 1.0});
  const Eigen::MatrixXcd rho = sys.thermal_product_state(0.7);
  const Eigen::MatrixXcd expected = kron(site_gibbs(2, 0.7), site_gibbs(2, 0.7));
  CHECK((rho - expected).norm() < 1e-14);
  CHECK(std::abs(rho.trace() - 1.0) < 1e-14);

  // infinite preparation: every site in its lowest level, basis index 0
  const Eigen::MatrixXcd ground = sys.thermal_product_state(kInf);
  CHECK(ground(0, 0).real() == Approx(1.0));
  CHECK(std::abs(ground.trace() - 1.0) < 1e-15);

  const Eigen::MatrixXcd inverted = sys.thermal_product_state(-kInf);
  CHECK(inverted(sys.dim() - 1, sys.dim() - 1).real() == Approx(1.0));
}

TEST_CASE("steady state is stationary and method independent") {
  const FullSystem sys(EnsembleSpec{2, HalfInt{2}, 1.0});
  const auto rates = rates_from_bath(BathSpec{0.7, 1.0}, 1.0);
  const Eigen::MatrixXcd rho0 = sys.thermal_product_state(0.3);

  const Eigen::MatrixXcd prop =
      sys.steady_state(rho0, rates, DissipationMode::Collective, 1e-12, SolveMethod::Propagator);
  CHECK(sys.rhs(prop, rates, DissipationMode::Collective).norm() < 1e-9);

  const Eigen::MatrixXcd step =
      sys.steady_state(rho0, rates, DissipationMode::Collective, 1e-12, SolveMethod::TimeStepping);
  CHECK((prop - step).cwiseAbs().maxCoeff() < 1e-9);

  Eigen::MatrixXcd bad = rho0 * 2.0;
  CHECK_THROWS_AS(
      (void)sys.steady_state(bad, rates, DissipationMode::Collective), std::invalid_argument);
}

TEST_CASE("independent dissipation lands on the product Gibbs state") {
  const FullSystem sys(EnsembleSpec{3, HalfInt{1}, 1.0});
  const auto rates = rates_from_bath(BathSpec{-0.8, 1.0}, 1.0);
  const Eigen::MatrixXcd steady =
      sys.steady_state(sys.thermal_product_state(0.5), rates, DissipationMode::Independent);
  const Eigen::MatrixXcd gibbs =
      kron(kron(site_gibbs(1, -0.8), site_gibbs(1, -0.8)), site_gibbs(1, -0.8));
  CHECK((steady - gibbs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("dephasing strips coherences and nothing else") {
  const FullSystem sys(EnsembleSpec{2, HalfInt{1}, 1.0});
  const Eigen::MatrixXcd rho = sys.steady_state(
      sys.thermal_product_state(kInf), rates_from_bath(BathSpec{1.0, 1.0}, 1.0),
      DissipationMode::Collective);
  const Eigen::MatrixXcd dep = FullSystem::dephase(rho);
  CHECK((FullSystem::dephase(dep) - dep).norm() == 0.0);
  for (int i = 0; i < dep.rows(); ++i) {
    CHECK(dep(i, i) == rho(i, i));
    for (int j = 0; j < dep.cols(); ++j)
      if (i != j) CHECK(std::abs(dep(i, j)) == 0.0);
  }
  // populations are untouched by construction
  const auto before = sys.first_site_populations(rho);
  const auto after = sys.first_site_populations(dep);
  for (const auto& [m, p] : before) CHECK(after.at(m) == Approx(p).epsilon(1e-15));
}

TEST_CASE("first-site reduction matches the level-count populations at s = 1/2") {
  for (int n : {3, 4}) {
    const EnsembleSpec spec{n, HalfInt{1}, 1.0};
    const FullSystem sys(spec);
    const Equilibrium eq(spec);
    const Eigen::MatrixXcd steady = sys.steady_state(
        sys.thermal_product_state(kInf), rates_from_bath(BathSpec{1.0, 1.0}, 1.0),
        DissipationMode::Collective);
    const auto exact = sys.first_site_populations(steady);
    const auto closed = eq.local_populations_dicke(1.0);
    CAPTURE(n);
    for (const auto& [m, p] : closed) CHECK(exact.at(m) == Approx(p).epsilon(1e-10));

    const Eigen::MatrixXcd reduced = sys.reduce_first_site(steady);
    CHECK(std::abs(reduced.trace() - 1.0) < 1e-12);
    CHECK(std::abs(reduced(0, 1)) < 1e-12);  // locally diagonal
  }
}

TEST_CASE("level-count populations are exact only for spin one-half") {
  // For s >= 1 the closed form assumes uniform Dicke amplitudes, which the
  // true top-sector state does not have; the flat-bath partial trace is
  // uniform while the closed form is not.
  const EnsembleSpec spec{2, HalfInt{2}, 1.0};
  const FullSystem sys(spec);
  const Eigen::MatrixXcd steady = sys.steady_state(
      sys.thermal_product_state(kInf), rates_from_bath(BathSpec{0.0, 1.0}, 1.0),
      DissipationMode::Collective);
  const auto exact = sys.first_site_populations(steady);
  CHECK(exact.at(HalfInt{-2}) == Approx(1.0 / 3.0).epsilon(1e-9));

  const auto closed = Equilibrium(spec).local_populations_dicke(0.0);
  CHECK(closed.at(HalfInt{-2}) == Approx(11.0 / 30.0).epsilon(1e-14));
  CHECK(std::fabs(closed.at(HalfInt{-2}) - exact.at(HalfInt{-2})) > 1e-3);
}

TEST_CASE("sector weights match the closed form and never move") {
  const EnsembleSpec spec{3, HalfInt{1}, 1.0};
  const FullSystem sys(spec);
  const Eigen::MatrixXcd rho0 = sys.thermal_product_state(0.8);
  const auto before = sys.sector_weights(rho0);
  CHECK(before.at(HalfInt{1}) == Approx(0.4278193930405888).epsilon(1e-12));
  CHECK(before.at(HalfInt{3}) == Approx(0.57218060695941131).epsilon(1e-12));

  const auto w = Equilibrium(spec).thermal_weights(0.8);
  for (std::size_t i = 0; i < w.ladder.size(); ++i)
    CHECK(before.at(w.ladder[i]) == Approx(std::exp(w.log_weight(i))).epsilon(1e-12));

  const Eigen::MatrixXcd steady = sys.steady_state(
      rho0, rates_from_bath(BathSpec{-1.2, 1.0}, 1.0), DissipationMode::Collective);
  const auto after = sys.sector_weights(steady);
  for (const auto& [J, weight] : before) CHECK(after.at(J) == Approx(weight).epsilon(1e-9));
}

TEST_CASE("observables of states known in closed form") {
  const EnsembleSpec spec{2, HalfInt{2}, 1.0};
  const FullSystem sys(spec);

  const Eigen::MatrixXcd ground = sys.thermal_product_state(kInf);
  CHECK(sys.energy(ground) == Approx(0.0).epsilon(1e-14));
  CHECK(sys.entropy(ground) == Approx(0.0).epsilon(1e-12));

  const Eigen::MatrixXcd mixed =
      Eigen::MatrixXcd::Identity(sys.dim(), sys.dim()) / double(sys.dim());
  CHECK(sys.energy(mixed) == Approx(spec.omega * spec.ns()).epsilon(1e-13));
  CHECK(sys.entropy(mixed) == Approx(2.0 * std::log(3.0)).epsilon(1e-13));

  // every thermal state shows its own temperature in the sideband ratio
  for (double b : {0.9, -0.4})
    CHECK(sys.apparent_temperature(sys.thermal_product_state(b)) ==
          Approx(1.0 / b).epsilon(1e-12));
  CHECK_THROWS_AS((void)sys.apparent_temperature(ground), std::domain_error);
}

TEST_CASE("noise specification is validated") {
  const FullSystem sys(EnsembleSpec{3, HalfInt{1}, 1.0});
  NoiseSpec wrong_size;
  wrong_size.delta = {0.1, 0.2};  // three sites expected
  CHECK_THROWS_AS(wrong_size.validate(3), std::invalid_argument);

  NoiseSpec asym;
  asym.exchange = Eigen::MatrixXd::Zero(3, 3);
  asym.exchange(0, 1) = 0.3;  // transpose entry left at zero
  CHECK_THROWS_AS(asym.validate(3), std::invalid_argument);

  NoiseSpec ok;
  ok.delta = {1e-3, 0.0, -1e-3};
  ok.exchange = Eigen::MatrixXd::Zero(3, 3);
  ok.exchange(0, 1) = ok.exchange(1, 0) = 5e-4;
  ok.validate(3);
  const Eigen::MatrixXd h = sys.noise_hamiltonian(ok);
  CHECK((h - h.transpose()).norm() < 1e-14);

  // the coherent term keeps the trace and hermiticity of d rho/dt
  const Eigen::MatrixXcd rho = sys.thermal_product_state(0.6);
  const Eigen::MatrixXcd dot =
      sys.rhs(rho, rates_from_bath(BathSpec{0.8, 1.0}, 1.0), DissipationMode::Collective, &h);
  CHECK(std::abs(dot.trace()) < 1e-14);
  CHECK((dot - dot.adjoint()).norm() < 1e-13);
}

TEST_CASE("noisy transients settle into the noiseless band") {
  NoiseSpec noise;
  noise.delta = {-1e-3, 0.0, 1e-3};
  noise.exchange = Eigen::MatrixXd::Zero(3, 3);
  noise.exchange(0, 1) = noise.exchange(1, 0) = 1e-3;
  const auto report = oracle::noisy_transient_check(EnsembleSpec{3, HalfInt{1}, 1.0},
                                                    BathSpec{1.0, 1.0}, kInf, noise,
                                                    /*band=*/5e-3, /*t_final=*/25.0,
                                                    /*samples=*/200);
  CHECK(report.entered);
  CHECK(report.held_for() > 10.0);
  // the trace starts at t = 0 and ends at t_final, one entry per stride
  REQUIRE(report.trace.size() >= 200);
  CHECK(report.trace.front().t == 0.0);
  CHECK(report.trace.back().t == Approx(25.0).epsilon(1e-9));
  CHECK(report.target_energy ==
        Approx(Equilibrium(EnsembleSpec{3, HalfInt{1}, 1.0}).dicke_energy(1.0)).epsilon(1e-6));
}

TEST_CASE("the dimension cap rejects oversized systems") {
  CHECK_THROWS_AS(FullSystem(EnsembleSpec{13, HalfInt{1}, 1.0}), ResourceError);
}
