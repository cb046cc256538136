#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "spinbath/equilibrium.hpp"
#include "spinbath/otto.hpp"

using namespace spinbath;
using doctest::Approx;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

CycleSpec make_cycle(const EnsembleSpec& spec, double bh, double bc, double lambda,
                     double beta0 = kInf) {
  return CycleSpec{spec, beta0, bh, bc, lambda};
}
}  // namespace

TEST_CASE("cycle specification is validated") {
  const EnsembleSpec spec{4, HalfInt{1}, 1.0};
  CHECK_THROWS_AS(make_cycle(spec, -0.1, 1.0, 0.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_cycle(spec, 1.0, 0.8, 0.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_cycle(spec, 0.0, 1.0, 1.5).validate(), std::invalid_argument);
  // compressed cold temperature must stay colder than the hot bath
  CHECK_THROWS_AS(make_cycle(spec, 0.5, 1.0, 0.4).validate(), std::invalid_argument);
  make_cycle(spec, 0.2, 2.0, 0.5).validate();
  make_cycle(spec, 0.0, 1.0, 1.0).validate();
  CHECK(make_cycle(spec, 0.2, 2.0, 0.5).effective_cold_beta() == Approx(1.0));
}

TEST_CASE("first law and efficiency are identities") {
  const EnsembleSpec spec{4, HalfInt{1}, 1.0};
  const Equilibrium eq(spec);
  for (auto [bh, bc, lam] : {std::tuple{0.0, 1.0, 0.5}, {0.2, 2.0, 0.7}, {1.1, 4.0, 0.35}}) {
    const auto r = cycle_work(eq, make_cycle(spec, bh, bc, lam));
    CAPTURE(bh);
    CAPTURE(bc);
    CAPTURE(lam);
    const double scale = std::fabs(r.heat_hot_collective) + std::fabs(r.heat_cold_collective);
    CHECK(std::fabs(r.work_collective + r.heat_hot_collective + r.heat_cold_collective) <
          1e-12 * scale);
    CHECK(std::fabs(r.work_independent + r.heat_hot_independent + r.heat_cold_independent) <
          1e-12 * scale);
    CHECK(r.efficiency == Approx(1.0 - lam).epsilon(1e-15));
    if (r.heat_hot_collective != 0.0)
      CHECK(-r.work_collective / r.heat_hot_collective == Approx(1.0 - lam).epsilon(1e-12));
  }
}

TEST_CASE("heats are steady-state energy differences") {
  const EnsembleSpec spec{3, HalfInt{2}, 1.0};
  const Equilibrium eq(spec);
  const auto cycle = make_cycle(spec, 0.3, 2.5, 0.6, 0.9);
  const auto r = cycle_work(eq, cycle);
  const double bce = cycle.effective_cold_beta();
  CHECK(r.heat_hot_collective ==
        Approx(eq.steady_energy(0.9, 0.3) - eq.steady_energy(0.9, bce)).epsilon(1e-14));
  CHECK(r.heat_hot_independent ==
        Approx(eq.thermal_energy(0.3) - eq.thermal_energy(bce)).epsilon(1e-14));
}

TEST_CASE("degenerate compression extracts nothing") {
  const EnsembleSpec spec{4, HalfInt{1}, 1.0};
  const Equilibrium eq(spec);
  const auto r = cycle_work(eq, make_cycle(spec, 0.2, 1.5, 1.0));
  CHECK(r.work_collective == 0.0);
  CHECK(r.work_independent == 0.0);
  CHECK(r.efficiency == 0.0);
  // the enhancement ratio remains the (finite) heat ratio
  CHECK(r.enhancement_ratio > 1.0);
  CHECK(std::isfinite(r.enhancement_ratio));
}

TEST_CASE("work ratio approaches the collective enhancement limit") {
  // beta_h = 0, lambda*beta_c -> 0 from a ground-state preparation:
  // W_coh / W_inc -> (ns+1)/(s+1)
  struct Probe {
    int n;
    int twice_s;
    double limit;
  };
  for (const auto& p : {Probe{4, 1, 2.0}, {4, 3, 2.8}, {100, 1, 34.0}}) {
    const EnsembleSpec spec{p.n, HalfInt{p.twice_s}, 1.0};
    const Equilibrium eq(spec);
    const auto r = cycle_work(eq, make_cycle(spec, 0.0, 0.02, 0.5));
    CAPTURE(p.n);
    CAPTURE(p.twice_s);
    CHECK(r.enhancement_ratio == Approx(p.limit).epsilon(0.03));
  }
  // tighter pin for the canonical four-spin case
  const Equilibrium eq(EnsembleSpec{4, HalfInt{1}, 1.0});
  const auto r = cycle_work(eq, make_cycle(EnsembleSpec{4, HalfInt{1}, 1.0}, 0.0, 0.02, 0.5));
  CHECK(r.enhancement_ratio == Approx(2.0).epsilon(1e-3));
}

TEST_CASE("gap slope differentiates the thermal-collective energy gap") {
  const EnsembleSpec spec{4, HalfInt{1}, 1.0};
  const Equilibrium eq(spec);
  for (double b0 : {kInf, 0.7})
    for (double b : {0.5, 2.0}) {
      const double h = 1e-5;
      const double fd = ((eq.thermal_energy(b + h) - eq.steady_energy(b0, b + h)) -
                         (eq.thermal_energy(b - h) - eq.steady_energy(b0, b - h))) /
                        (2 * h);
      CAPTURE(b0);
      CAPTURE(b);
      CHECK(energy_gap_slope(eq, b0, b) == Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("enhancement limit marks the slope's sign change") {
  const EnsembleSpec spec{4, HalfInt{1}, 1.0};
  const Equilibrium eq(spec);
  const double bl = enhancement_beta_limit(eq, kInf);
  CHECK(bl == Approx(0.95450741747021661).epsilon(1e-8));
  CHECK(energy_gap_slope(eq, kInf, 0.9 * bl) > 0.0);
  CHECK(energy_gap_slope(eq, kInf, 1.1 * bl) < 0.0);

  // the limit survives finite preparations as well
  const double bl_finite = enhancement_beta_limit(eq, 2.0);
  CHECK(energy_gap_slope(eq, 2.0, 0.9 * bl_finite) > 0.0);
  CHECK(energy_gap_slope(eq, 2.0, 1.1 * bl_finite) < 0.0);
}

TEST_CASE("sweep rows tie out against single cycles") {
  const EnsembleSpec spec{4, HalfInt{1}, 1.0};
  const Equilibrium eq(spec);
  std::vector<double> grid;
  for (int i = 1; i <= 8; ++i) grid.push_back(0.4 * i);
  const auto rows = enhancement_sweep(eq, kInf, 0.1, 0.6, grid);
  REQUIRE(rows.size() == grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto cycle = make_cycle(spec, 0.1, grid[i], 0.6);
    const auto r = cycle_work(eq, cycle);
    CHECK(rows[i].beta_cold_effective == Approx(cycle.effective_cold_beta()));
    CHECK(rows[i].work_collective == Approx(r.work_collective).epsilon(1e-14));
    CHECK(rows[i].work_independent == Approx(r.work_independent).epsilon(1e-14));
    CHECK(rows[i].ratio == Approx(r.enhancement_ratio).epsilon(1e-13));
    // the normalized gain is the heat difference per omega*ns; equivalently
    // the work difference with the Otto factor removed
    CHECK(rows[i].normalized_gain ==
          Approx((r.heat_hot_collective - r.heat_hot_independent) / (spec.omega * spec.ns()))
              .epsilon(1e-13));
    CHECK(rows[i].normalized_gain * (1.0 - 0.6) * spec.omega * spec.ns() ==
          Approx(r.work_independent - r.work_collective).epsilon(1e-12));
  }
}

TEST_CASE("amplification follows the entropy drops") {
  const EnsembleSpec spec{4, HalfInt{1}, 1.0};
  const Equilibrium eq(spec);

  const auto hot = make_cycle(spec, 0.2, 2.0, 0.5);
  const auto r_hot = cycle_work(eq, hot);
  CHECK(r_hot.amplified);
  CHECK(r_hot.enhancement_ratio > 1.0);
  CHECK(amplification_condition(eq, hot));

  const auto cold = make_cycle(spec, 0.2, 3.0, 0.9);
  const auto r_cold = cycle_work(eq, cold);
  CHECK_FALSE(r_cold.amplified);
  CHECK(r_cold.enhancement_ratio < 1.0);
  CHECK_FALSE(amplification_condition(eq, cold));

  // flag definition: collective entropy drop exceeds the independent one
  for (const auto& c : {hot, cold}) {
    const double bce = c.effective_cold_beta();
    const double ds_coh = eq.steady_entropy(c.beta0, c.beta_hot) - eq.steady_entropy(c.beta0, bce);
    const double ds_th = eq.thermal_entropy(c.beta_hot) - eq.thermal_entropy(bce);
    CHECK(amplification_condition(eq, c) == (ds_coh > ds_th));
  }
}
