#include "spinbath/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "spinbath/multiplicity.hpp"

namespace spinbath::oracle {

namespace {

using Cplx = std::complex<double>;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Re tr(rho * op) for a real operator op.
double expect(const Eigen::MatrixXcd& rho, const Eigen::MatrixXd& op) {
  return op.cwiseProduct(rho.real().transpose()).sum();
}

void hermitize(Eigen::MatrixXcd& rho) { rho = 0.5 * (rho + rho.adjoint()).eval(); }

}  // namespace

void NoiseSpec::validate(int n) const {
  if (!delta.empty()) {
    if (static_cast<int>(delta.size()) != n)
      throw std::invalid_argument("noise: delta must have one entry per spin");
    for (double v : delta)
      if (!std::isfinite(v)) throw std::invalid_argument("noise: delta entries must be finite");
  }
  if (exchange.size() != 0) {
    if (exchange.rows() != n || exchange.cols() != n)
      throw std::invalid_argument("noise: exchange matrix must be n x n");
    if (!exchange.allFinite())
      throw std::invalid_argument("noise: exchange entries must be finite");
    const double scale = 1.0 + exchange.cwiseAbs().maxCoeff();
    if ((exchange - exchange.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::invalid_argument("noise: exchange matrix must be symmetric");
  }
}

FullSystem::FullSystem(const EnsembleSpec& spec) : spec_(spec) {
  spec_.validate();
  const int d0 = spec_.local_dim();
  long dim = 1;
  for (int k = 0; k < spec_.n; ++k) {
    dim *= d0;
    if (dim > kMaxFullDimension)
      throw ResourceError("full product space (2s+1)^n exceeds the cap of " +
                          std::to_string(kMaxFullDimension) + " states");
  }
  dim_ = dim;

  stride_.assign(spec_.n, 1);
  for (int k = spec_.n - 2; k >= 0; --k) stride_[k] = stride_[k + 1] * d0;

  const double s = spec_.spin.value();
  jz_.setZero(dim_);
  jplus_.setZero(dim_, dim_);
  for (long i = 0; i < dim_; ++i) {
    for (int k = 0; k < spec_.n; ++k) {
      const int a = digit(i, k);
      jz_(i) += a - s;
      // Raising site k takes basis state i to i + stride_[k].
      if (a < d0 - 1)
        jplus_(i + stride_[k], i) += std::sqrt(double(spec_.spin.twice - a) * (a + 1));
    }
  }
  jminus_ = jplus_.transpose();
}

int FullSystem::digit(long index, int site) const {
  return static_cast<int>((index / stride_[site]) % spec_.local_dim());
}

const Eigen::MatrixXd& FullSystem::jplus_jminus() const {
  if (jpjm_.size() == 0) jpjm_ = jplus_ * jminus_;
  return jpjm_;
}

const Eigen::MatrixXd& FullSystem::jminus_jplus() const {
  if (jmjp_.size() == 0) jmjp_ = jminus_ * jplus_;
  return jmjp_;
}

const Eigen::MatrixXd& FullSystem::jsquared() const {
  if (jsq_.size() == 0) {
    jsq_ = 0.5 * (jplus_jminus() + jminus_jplus());
    jsq_.diagonal() += jz_.cwiseProduct(jz_);
  }
  return jsq_;
}

Eigen::MatrixXd FullSystem::site_jz(int k) const {
  if (k < 0 || k >= spec_.n) throw std::out_of_range("site index out of range");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim_, dim_);
  const double s = spec_.spin.value();
  for (long i = 0; i < dim_; ++i) out(i, i) = digit(i, k) - s;
  return out;
}

Eigen::MatrixXd FullSystem::site_jplus(int k) const {
  if (k < 0 || k >= spec_.n) throw std::out_of_range("site index out of range");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim_, dim_);
  const int d0 = spec_.local_dim();
  for (long i = 0; i < dim_; ++i) {
    const int a = digit(i, k);
    if (a < d0 - 1) out(i + stride_[k], i) = std::sqrt(double(spec_.spin.twice - a) * (a + 1));
  }
  return out;
}

Eigen::MatrixXd FullSystem::site_jminus(int k) const { return site_jplus(k).transpose(); }

Eigen::MatrixXd FullSystem::noise_hamiltonian(const NoiseSpec& noise) const {
  noise.validate(spec_.n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim_, dim_);
  if (!noise.delta.empty())
    for (int k = 0; k < spec_.n; ++k)
      if (noise.delta[k] != 0.0) h += noise.delta[k] * site_jz(k);
  if (noise.exchange.size() != 0) {
    for (int k = 0; k < spec_.n; ++k) {
      for (int l = k + 1; l < spec_.n; ++l) {
        const double w = noise.exchange(k, l);
        if (w == 0.0) continue;
        const Eigen::MatrixXd flip = site_jplus(k) * site_jminus(l);
        h += w * (flip + flip.transpose());
      }
    }
  }
  return h;
}

Eigen::MatrixXcd FullSystem::rhs(const Eigen::MatrixXcd& rho, const DissipatorRates& rates,
                                 DissipationMode mode, const Eigen::MatrixXd* noise_h) const {
  if (rho.rows() != dim_ || rho.cols() != dim_)
    throw std::invalid_argument("rhs: state has the wrong dimension");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_, dim_);

  if (mode == DissipationMode::Collective) {
    const Eigen::MatrixXcd jp = jplus_.cast<Cplx>();
    const Eigen::MatrixXcd jm = jminus_.cast<Cplx>();
    out += rates.down * (jm * rho * jp) + rates.up * (jp * rho * jm);
    const Eigen::MatrixXcd h =
        (rates.down * jplus_jminus() + rates.up * jminus_jplus()).cast<Cplx>();
    out -= 0.5 * (h * rho + rho * h);
  } else {
    const int d0 = spec_.local_dim();
    for (int k = 0; k < spec_.n; ++k) {
      const Eigen::MatrixXcd sp = site_jplus(k).cast<Cplx>();
      const Eigen::MatrixXcd sm = sp.transpose();
      out += rates.down * (sm * rho * sp) + rates.up * (sp * rho * sm);
    }
    // Each site's L†L is diagonal in the product basis, so the
    // anticommutator half collapses to an element-wise damping factor.
    Eigen::VectorXd damp = Eigen::VectorXd::Zero(dim_);
    for (long i = 0; i < dim_; ++i) {
      for (int k = 0; k < spec_.n; ++k) {
        const int a = digit(i, k);
        damp(i) += rates.down * double(a) * (d0 - a) +
                   rates.up * double(spec_.spin.twice - a) * (a + 1);
      }
    }
    for (long j = 0; j < dim_; ++j)
      for (long i = 0; i < dim_; ++i) out(i, j) -= 0.5 * (damp(i) + damp(j)) * rho(i, j);
  }

  if (noise_h != nullptr && noise_h->size() != 0) {
    const Eigen::MatrixXcd hc = noise_h->cast<Cplx>();
    out += Cplx(0.0, -1.0) * (hc * rho - rho * hc);
  }
  return out;
}

Eigen::MatrixXcd FullSystem::thermal_product_state(double beta0) const {
  check_beta0(beta0);
  const int d0 = spec_.local_dim();
  const double x0 = beta0 * spec_.omega;

  Eigen::VectorXd q = Eigen::VectorXd::Zero(d0);
  if (std::isinf(x0)) {
    q(x0 > 0 ? 0 : d0 - 1) = 1.0;  // levels ordered upward from the site ground state
  } else {
    const double shift = x0 >= 0 ? 0.0 : x0 * (d0 - 1);
    for (int a = 0; a < d0; ++a) q(a) = std::exp(-x0 * a + shift);
    q /= q.sum();
  }

  Eigen::VectorXd full(1);
  full(0) = 1.0;
  for (int k = 0; k < spec_.n; ++k) {
    Eigen::VectorXd next(full.size() * d0);
    for (long i = 0; i < full.size(); ++i)
      for (int a = 0; a < d0; ++a) next(i * d0 + a) = full(i) * q(a);
    full = std::move(next);
  }

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim_, dim_);
  rho.diagonal() = full.cast<Cplx>();
  return rho;
}

Eigen::MatrixXcd FullSystem::steady_state(const Eigen::MatrixXcd& rho0,
                                          const DissipatorRates& rates, DissipationMode mode,
                                          double tol, SolveMethod method) const {
  if (rho0.rows() != dim_ || rho0.cols() != dim_)
    throw std::invalid_argument("steady_state: state has the wrong dimension");
  if (std::abs(rho0.trace().real() - 1.0) > 1e-9 || std::abs(rho0.trace().imag()) > 1e-9)
    throw std::invalid_argument("steady_state: initial state must have unit trace");
  if (!(tol > 0.0)) throw std::invalid_argument("steady_state: tol must be positive");

  const double gmax = std::max(rates.down, rates.up);
  const double S = spec_.ns();
  const double target = tol * gmax * (1.0 + S * (S + 1.0));

  if (method == SolveMethod::Auto)
    method = dim_ <= kPropagatorDimensionCap ? SolveMethod::Propagator : SolveMethod::TimeStepping;
  return method == SolveMethod::Propagator ? steady_by_propagator(rho0, rates, mode, target)
                                           : steady_by_stepping(rho0, rates, mode, target);
}

Eigen::MatrixXd FullSystem::liouvillian(const DissipatorRates& rates, DissipationMode mode) const {
  const long D = dim_ * dim_;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim_, dim_);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(D, D);

  auto add_channel = [&](double g, const Eigen::MatrixXd& jump) {
    const Eigen::MatrixXd half = 0.5 * (jump.transpose() * jump);  // symmetric
    L += g * Eigen::kroneckerProduct(jump, jump).eval();
    L -= g * Eigen::kroneckerProduct(id, half).eval();
    L -= g * Eigen::kroneckerProduct(half, id).eval();
  };

  if (mode == DissipationMode::Collective) {
    add_channel(rates.down, jminus_);
    add_channel(rates.up, jplus_);
  } else {
    for (int k = 0; k < spec_.n; ++k) {
      const Eigen::MatrixXd sp = site_jplus(k);
      add_channel(rates.down, sp.transpose());
      add_channel(rates.up, sp);
    }
  }
  return L;
}

Eigen::MatrixXcd FullSystem::steady_by_propagator(const Eigen::MatrixXcd& rho0,
                                                  const DissipatorRates& rates,
                                                  DissipationMode mode, double target) const {
  const double gmax = std::max(rates.down, rates.up);
  const Eigen::MatrixXd L = liouvillian(rates, mode);
  const long D = dim_ * dim_;

  // One horizon 1/gmax to start; each round the horizon doubles, so slow
  // relaxation is reached geometrically instead of by brute stepping.
  Eigen::MatrixXd P = (L * (1.0 / gmax)).exp();

  const Eigen::MatrixXd rr = rho0.real(), ii = rho0.imag();
  Eigen::VectorXd re = Eigen::Map<const Eigen::VectorXd>(rr.data(), D);
  Eigen::VectorXd im = Eigen::Map<const Eigen::VectorXd>(ii.data(), D);
  const bool use_im = im.cwiseAbs().maxCoeff() > 0.0;

  constexpr int kMaxRounds = 60;
  double residual = std::numeric_limits<double>::infinity();
  for (int round = 0; round < kMaxRounds; ++round) {
    for (int i = 0; i < 8; ++i) {
      re = P * re;
      if (use_im) im = P * im;
    }
    double tr = 0.0;
    for (long k = 0; k < dim_; ++k) tr += re(k * dim_ + k);
    re /= tr;
    if (use_im) im /= tr;

    double r2 = (L * re).squaredNorm();
    if (use_im) r2 += (L * im).squaredNorm();
    residual = std::sqrt(r2);
    if (residual <= target) {
      Eigen::MatrixXcd rho =
          Eigen::Map<const Eigen::MatrixXd>(re.data(), dim_, dim_).cast<Cplx>();
      if (use_im)
        rho += Cplx(0.0, 1.0) * Eigen::Map<const Eigen::MatrixXd>(im.data(), dim_, dim_).cast<Cplx>();
      hermitize(rho);
      return rho;
    }
    P = P * P;
  }
  throw ConvergenceError("steady state not reached: residual " + sci(residual) +
                         " above target " + sci(target) + " after the propagator horizon");
}

Eigen::MatrixXcd FullSystem::steady_by_stepping(const Eigen::MatrixXcd& rho0,
                                                const DissipatorRates& rates, DissipationMode mode,
                                                double target) const {
  const double gmax = std::max(rates.down, rates.up);
  const double S = spec_.ns();
  const double dt = 0.25 / (gmax * (2.0 * S * (S + 1.0) + 1.0));
  const double t_max = 2e4 / gmax;

  auto f = [&](const Eigen::MatrixXcd& r) { return rhs(r, rates, mode, nullptr); };

  Eigen::MatrixXcd rho = rho0;
  double residual = std::numeric_limits<double>::infinity();
  for (double t = 0.0; t < t_max; ) {
    for (int i = 0; i < 64 && t < t_max; ++i, t += dt) {
      const Eigen::MatrixXcd k1 = f(rho);
      const Eigen::MatrixXcd k2 = f(rho + 0.5 * dt * k1);
      const Eigen::MatrixXcd k3 = f(rho + 0.5 * dt * k2);
      const Eigen::MatrixXcd k4 = f(rho + dt * k3);
      rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    hermitize(rho);
    rho /= rho.trace().real();
    residual = f(rho).norm();
    if (residual <= target) return rho;
  }
  throw ConvergenceError("steady state not reached by time stepping: residual " + sci(residual) +
                         " above target " + sci(target) + " at t = " + sci(t_max));
}

double FullSystem::energy(const Eigen::MatrixXcd& rho) const {
  return spec_.omega * (jz_.dot(rho.diagonal().real()) + spec_.ns());
}

double FullSystem::entropy(const Eigen::MatrixXcd& rho) const {
  Eigen::MatrixXcd herm = rho;
  hermitize(herm);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("entropy: eigensolver failed");
  double out = 0.0;
  for (long i = 0; i < dim_; ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= 0.0) {
      if (lam < -1e-9)
        throw std::runtime_error("entropy: state has negative eigenvalue " + sci(lam));
      continue;
    }
    out -= lam * std::log(lam);
  }
  return out;
}

double FullSystem::apparent_temperature(const Eigen::MatrixXcd& rho) const {
  const double emit = expect(rho, jplus_jminus());
  const double absorb = expect(rho, jminus_jplus());
  if (!(emit > 0.0))
    throw std::domain_error("dark state: <J+ J-> vanishes, apparent temperature undefined");
  return spec_.omega / std::log(absorb / emit);
}

Eigen::MatrixXcd FullSystem::dephase(const Eigen::MatrixXcd& rho) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  out.diagonal() = rho.diagonal();
  return out;
}

Eigen::MatrixXcd FullSystem::reduce_first_site(const Eigen::MatrixXcd& rho) const {
  const int d0 = spec_.local_dim();
  const long rest = dim_ / d0;
  Eigen::MatrixXcd red = Eigen::MatrixXcd::Zero(d0, d0);
  for (int a = 0; a < d0; ++a)
    for (int b = 0; b < d0; ++b)
      for (long r = 0; r < rest; ++r) red(a, b) += rho(a * rest + r, b * rest + r);
  return red;
}

std::map<HalfInt, double> FullSystem::first_site_populations(const Eigen::MatrixXcd& rho) const {
  const Eigen::MatrixXcd red = reduce_first_site(rho);
  std::map<HalfInt, double> pops;
  for (int a = 0; a < spec_.local_dim(); ++a)
    pops[HalfInt{2 * a - spec_.spin.twice}] = red(a, a).real();
  return pops;
}

void FullSystem::ensure_sector_basis() const {
  if (sector_basis_ready_) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jsquared());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sector analysis: eigensolver failed");
  sector_vectors_ = es.eigenvectors();
  sector_twice_j_.resize(dim_);
  for (long i = 0; i < dim_; ++i) {
    const double lam = es.eigenvalues()(i);
    const int tw = static_cast<int>(std::lround(std::sqrt(1.0 + 4.0 * lam) - 1.0));
    const double expected = 0.25 * double(tw) * (tw + 2);
    if (tw < 0 || std::abs(lam - expected) > 1e-8 * std::max(1.0, lam))
      throw std::logic_error("sector analysis: eigenvalue " + sci(lam) +
                             " does not sit on the J(J+1) ladder");
    sector_twice_j_[i] = tw;
  }
  sector_basis_ready_ = true;
}

std::map<HalfInt, double> FullSystem::sector_weights(const Eigen::MatrixXcd& rho) const {
  ensure_sector_basis();
  const Eigen::MatrixXd folded = rho.real() * sector_vectors_;
  std::map<HalfInt, double> weights;
  for (long i = 0; i < dim_; ++i)
    weights[HalfInt{sector_twice_j_[i]}] += sector_vectors_.col(i).dot(folded.col(i));
  return weights;
}

std::vector<FullSystem::EnergySample> FullSystem::evolve_energy(const Eigen::MatrixXcd& rho0,
                                                                const DissipatorRates& rates,
                                                                DissipationMode mode,
                                                                const Eigen::MatrixXd* noise_h,
                                                                double t_final,
                                                                int samples) const {
  if (!(t_final > 0.0)) throw std::invalid_argument("evolve_energy: t_final must be positive");
  samples = std::max(samples, 2);

  const double gmax = std::max(rates.down, rates.up);
  const double S = spec_.ns();
  double dt = 0.01 / (gmax * (2.0 * S + 1.0) * (2.0 * S + 1.0));
  if (noise_h != nullptr && noise_h->size() != 0) {
    const double hnorm = noise_h->cwiseAbs().rowwise().sum().maxCoeff();
    if (hnorm > 0.0) dt = std::min(dt, 0.2 / hnorm);
  }
  const long steps = std::max<long>(1, static_cast<long>(std::ceil(t_final / dt)));
  dt = t_final / double(steps);
  const long stride = std::max<long>(1, steps / (samples - 1));

  auto f = [&](const Eigen::MatrixXcd& r) { return rhs(r, rates, mode, noise_h); };

  Eigen::MatrixXcd rho = rho0;
  std::vector<EnergySample> trace;
  trace.push_back({0.0, energy(rho)});
  for (long step = 1; step <= steps; ++step) {
    const Eigen::MatrixXcd k1 = f(rho);
    const Eigen::MatrixXcd k2 = f(rho + 0.5 * dt * k1);
    const Eigen::MatrixXcd k3 = f(rho + 0.5 * dt * k2);
    const Eigen::MatrixXcd k4 = f(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (step % stride == 0 || step == steps) {
      hermitize(rho);
      rho /= rho.trace().real();
      trace.push_back({step * dt, energy(rho)});
    }
  }
  return trace;
}

TransientReport noisy_transient_check(const EnsembleSpec& spec, const BathSpec& bath, double beta0,
                                      const NoiseSpec& noise, double band, double t_final,
                                      int samples) {
  spec.validate();
  bath.validate();
  check_beta0(beta0);
  noise.validate(spec.n);
  if (!(band > 0.0)) throw std::invalid_argument("transient check: band must be positive");

  const FullSystem sys(spec);
  const DissipatorRates rates = rates_from_bath(bath, spec.omega);
  const Eigen::MatrixXcd rho0 = sys.thermal_product_state(beta0);

  TransientReport report;
  report.band = band;
  report.t_final = t_final;
  report.target_energy =
      sys.energy(sys.steady_state(rho0, rates, DissipationMode::Collective));

  const Eigen::MatrixXd h = sys.noise_hamiltonian(noise);
  report.trace =
      sys.evolve_energy(rho0, rates, DissipationMode::Collective, &h, t_final, samples);

  for (const auto& sample : report.trace) {
    if (std::abs(sample.energy - report.target_energy) <= band)
      report.entered = true;
    else
      report.settle_time = sample.t;
  }
  return report;
}

}  // namespace spinbath::oracle
