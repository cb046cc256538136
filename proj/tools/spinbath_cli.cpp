// Batch front door for the spinbath library: every figure-style dataset and
// the validation suites behind one executable with CSV/JSON output.
//
// Exit codes: 0 success, 1 validation/runtime failure, 2 usage error.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinbath/dynamics.hpp"
#include "spinbath/equilibrium.hpp"
#include "spinbath/half_integer.hpp"
#include "spinbath/multiplicity.hpp"
#include "spinbath/oracle.hpp"
#include "spinbath/otto.hpp"

namespace {

using spinbath::BathSpec;
using spinbath::DissipationMode;
using spinbath::EnsembleSpec;
using spinbath::Equilibrium;
using spinbath::HalfInt;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- output ---

struct Cell {
  double num = 0.0;
  std::string text;
  bool is_text = false;
};

Cell cell(double v) { return {v, {}, false}; }
Cell cell(const std::string& s) { return {0.0, s, true}; }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

void write_table(const Table& t, std::ostream& os, const std::string& format) {
  if (format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : t.rows) {
      nlohmann::json obj = nlohmann::json::object();
      for (std::size_t c = 0; c < t.columns.size(); ++c)
        if (row[c].is_text)
          obj[t.columns[c]] = row[c].text;
        else
          obj[t.columns[c]] = row[c].num;
      arr.push_back(std::move(obj));
    }
    os << arr.dump(2) << "\n";
    return;
  }
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    os << t.columns[c] << (c + 1 < t.columns.size() ? "," : "\n");
  for (const auto& row : t.rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      os << (row[c].is_text ? row[c].text : fmt17(row[c].num))
         << (c + 1 < row.size() ? "," : "\n");
}

// Resolve --out against the optional output-dir override and emit.
void emit(const Table& t, const std::string& out, const std::string& format) {
  if (out.empty()) {
    write_table(t, std::cout, format);
    return;
  }
  std::string path = out;
  const char* dir = std::getenv("SPINBATH_OUT_DIR");
  if (dir != nullptr && *dir != '\0' && out.front() != '/')
    path = std::string(dir) + "/" + out;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  write_table(t, os, format);
}

// ----------------------------------------------------------------- grids ---

struct GridSpec {
  double lo = 0.0, hi = 0.0;
  int points = 0;

  [[nodiscard]] std::vector<double> values(bool log_scale) const {
    std::vector<double> out(points);
    if (log_scale) {
      if (!(lo > 0.0) || !(hi > 0.0))
        throw std::runtime_error("log grid needs positive endpoints");
      const double llo = std::log(lo), lhi = std::log(hi);
      for (int i = 0; i < points; ++i)
        out[i] = std::exp(llo + (lhi - llo) * i / double(points - 1));
    } else {
      for (int i = 0; i < points; ++i) out[i] = lo + (hi - lo) * i / double(points - 1);
    }
    out.front() = lo;
    out.back() = hi;
    return out;
  }
};

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  const auto c1 = text.find(':');
  const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw CLI::ValidationError("--grid", "expected lo:hi:points, got '" + text + "'");
  try {
    g.lo = std::stod(text.substr(0, c1));
    g.hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    g.points = std::stoi(text.substr(c2 + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--grid", "expected lo:hi:points, got '" + text + "'");
  }
  if (g.points < 2) throw CLI::ValidationError("--grid", "needs at least 2 points");
  return g;
}

// Evaluate one row per grid value on a small worker pool; rows land in input
// order regardless of completion order.
template <typename Fn>
std::vector<std::vector<Cell>> parallel_rows(int jobs, int count, Fn&& fn) {
  std::vector<std::vector<Cell>> rows(count);
  if (jobs <= 0) jobs = int(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, count));

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        rows[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

// ------------------------------------------------------------ subcommands ---

struct CommonOpts {
  int n = 2;
  std::string spin = "1/2";
  double omega = 1.0;
  std::string out;
  std::string format = "csv";
  int jobs = 0;

  [[nodiscard]] EnsembleSpec ensemble() const {
    EnsembleSpec spec{n, spinbath::parse_half_integer(spin), omega};
    spec.validate();
    return spec;
  }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_jobs = true) {
  cmd->add_option("--n", o.n, "number of spins")->capture_default_str();
  cmd->add_option("--s", o.spin, "spin size (1/2, 1, 3/2, ... or decimal)")
      ->capture_default_str();
  cmd->add_option("--omega", o.omega, "level splitting")->capture_default_str();
  cmd->add_option("--out", o.out,
                  "output file (relative paths honour $SPINBATH_OUT_DIR); stdout if absent");
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  if (with_jobs)
    cmd->add_option("--jobs", o.jobs, "worker threads for grid rows (0 = all cores)")
        ->capture_default_str();
}

int run_multiplicities(const CommonOpts& common) {
  const EnsembleSpec spec = common.ensemble();
  const auto table = spinbath::build_multiplicity_table(spec);
  Table out;
  out.columns = {"J", "l_J"};
  for (const HalfInt J : spec.total_spin_ladder())
    out.rows.push_back({cell(J.value()), cell(table.mult(J).str())});
  emit(out, common.out, common.format);
  return 0;
}

int run_energy_curve(const CommonOpts& common, double beta0, bool sweep_beta0, double beta_B,
                     const GridSpec& grid,
                     bool log_grid, bool normalize) {
  const EnsembleSpec spec = common.ensemble();
  const Equilibrium eq(spec);
  const std::vector<double> betas = grid.values(log_grid);
  const double scale = normalize ? spec.omega * spec.ns() : 1.0;
  Table out;
  if (sweep_beta0) {
    // Fixed bath, preparation scan: the grid runs over beta0.
    out.columns = {"beta0", "E_inf", "E_th"};
    out.rows = parallel_rows(common.jobs, int(betas.size()), [&](int i) {
      const double b0 = betas[i];
      return std::vector<Cell>{cell(b0), cell(eq.steady_energy(b0, beta_B) / scale),
                               cell(eq.thermal_energy(beta_B) / scale)};
    });
  } else {
    out.columns = {"beta_B", "E_inf", "E_th"};
    out.rows = parallel_rows(common.jobs, int(betas.size()), [&](int i) {
      const double b = betas[i];
      return std::vector<Cell>{cell(b), cell(eq.steady_energy(beta0, b) / scale),
                               cell(eq.thermal_energy(b) / scale)};
    });
  }
  emit(out, common.out, common.format);
  return 0;
}

int run_entropy_curve(const CommonOpts& common, double beta0, const GridSpec& grid,
                      bool log_grid, bool normalize) {
  const EnsembleSpec spec = common.ensemble();
  const Equilibrium eq(spec);
  const std::vector<double> betas = grid.values(log_grid);
  const double scale = normalize ? double(spec.n) : 1.0;
  Table out;
  out.columns = {"beta_B", "S_inf", "S_th"};
  out.rows = parallel_rows(common.jobs, int(betas.size()), [&](int i) {
    const double b = betas[i];
    return std::vector<Cell>{cell(b), cell(eq.steady_entropy(beta0, b) / scale),
                             cell(eq.thermal_entropy(b) / scale)};
  });
  emit(out, common.out, common.format);
  return 0;
}

int run_free_energy(const CommonOpts& common, double beta0, const GridSpec& grid,
                    bool log_grid, bool normalize) {
  const EnsembleSpec spec = common.ensemble();
  const Equilibrium eq(spec);
  const std::vector<double> betas = grid.values(log_grid);
  // The per-spin figures plot dF/n and Sigma/n.
  const double scale = normalize ? double(spec.n) : 1.0;
  Table out;
  out.columns = {"beta_B", "dF_inf", "dF_th", "Sigma_inf", "Sigma_th"};
  out.rows = parallel_rows(common.jobs, int(betas.size()), [&](int i) {
    const double b = betas[i];
    return std::vector<Cell>{
        cell(b),
        cell(eq.free_energy_variation(beta0, b, DissipationMode::Collective) / scale),
        cell(eq.free_energy_variation(beta0, b, DissipationMode::Independent) / scale),
        cell(eq.entropy_production(beta0, b, DissipationMode::Collective) / scale),
        cell(eq.entropy_production(beta0, b, DissipationMode::Independent) / scale)};
  });
  emit(out, common.out, common.format);
  return 0;
}

int run_otto(const CommonOpts& common, double beta0, double beta_hot, double lambda,
             std::optional<double> beta_cold, std::optional<GridSpec> grid, bool log_grid,
             bool entropy_diff, bool normalize) {
  const EnsembleSpec spec = common.ensemble();
  const Equilibrium eq(spec);
  const double wscale = normalize ? spec.omega * spec.ns() : 1.0;
  Table out;

  if (beta_cold.has_value()) {
    spinbath::CycleSpec cycle{spec, beta0, beta_hot, *beta_cold, lambda};
    const spinbath::CycleReport r = spinbath::cycle_work(eq, cycle);
    out.columns = {"beta_c_eff",  "Q_hot_coh", "Q_cold_coh", "W_coh",
                   "Q_hot_inc",   "Q_cold_inc", "W_inc",     "efficiency",
                   "ratio",       "amplified",  "beta_limit"};
    out.rows.push_back({cell(cycle.effective_cold_beta()), cell(r.heat_hot_collective / wscale),
                        cell(r.heat_cold_collective / wscale), cell(r.work_collective / wscale),
                        cell(r.heat_hot_independent / wscale),
                        cell(r.heat_cold_independent / wscale), cell(r.work_independent / wscale),
                        cell(r.efficiency), cell(r.enhancement_ratio),
                        cell(double(r.amplified)),
                        cell(spinbath::enhancement_beta_limit(eq, beta0))});
    emit(out, common.out, common.format);
    return 0;
  }
  if (!grid.has_value())
    throw std::runtime_error("otto: provide either --beta-c or --grid over beta_c");

  const std::vector<double> betas = grid->values(log_grid);
  if (entropy_diff) {
    out.columns = {"beta_c_eff", "dS_inf", "dS_th", "amplified"};
    out.rows = parallel_rows(common.jobs, int(betas.size()), [&](int i) {
      spinbath::CycleSpec cycle{spec, beta0, beta_hot, betas[i], lambda};
      cycle.validate();
      const double bce = cycle.effective_cold_beta();
      const double ds_inf =
          eq.steady_entropy(beta0, beta_hot) - eq.steady_entropy(beta0, bce);
      const double ds_th = eq.thermal_entropy(beta_hot) - eq.thermal_entropy(bce);
      return std::vector<Cell>{cell(bce), cell(ds_inf), cell(ds_th),
                               cell(double(ds_inf > ds_th))};
    });
  } else {
    out.columns = {"beta_c_eff", "W_coh", "W_inc", "gain", "ratio"};
    out.rows = parallel_rows(common.jobs, int(betas.size()), [&](int i) {
      spinbath::CycleSpec cycle{spec, beta0, beta_hot, betas[i], lambda};
      const spinbath::CycleReport r = spinbath::cycle_work(eq, cycle);
      return std::vector<Cell>{
          cell(cycle.effective_cold_beta()), cell(r.work_collective / wscale),
          cell(r.work_independent / wscale),
          cell((r.heat_hot_collective - r.heat_hot_independent) / (spec.omega * spec.ns())),
          cell(r.enhancement_ratio)};
    });
  }
  emit(out, common.out, common.format);
  return 0;
}

int run_dynamics(const CommonOpts& common, double beta0, double beta_B, double gamma,
                 double t_final, double dt, double sample_every) {
  const EnsembleSpec spec = common.ensemble();
  const BathSpec bath{beta_B, gamma};
  const auto rates = spinbath::rates_from_bath(bath, spec.omega);
  spinbath::EvolveOptions options;
  options.dt = dt;
  options.sample_every = sample_every;
  const auto traj =
      spinbath::evolve(spinbath::initial_thermal_blocks(spec, beta0), rates, t_final, options);
  Table out;
  out.columns = {"t", "energy", "entropy", "apparent_temperature"};
  for (const auto& s : traj.samples)
    out.rows.push_back({cell(s.t), cell(s.energy), cell(s.entropy),
                        cell(s.apparent_temperature)});
  emit(out, common.out, common.format);
  return 0;
}

struct OracleCase {
  int n;
  int twice_s;
  double beta_B;
  double beta0;
};

int run_oracle_check(const CommonOpts& common, long max_dim, double tol) {
  std::vector<OracleCase> cases;
  const std::vector<std::pair<int, int>> systems = {{2, 1}, {3, 1}, {4, 1}, {2, 2}, {3, 2}, {2, 3}};
  for (auto [n, ts] : systems)
    for (double bB : {0.5, -0.5, 1.0, -1.0, 3.0, -3.0})
      for (double b0 : {0.3, 2.0, kInf}) cases.push_back({n, ts, bB, b0});

  std::erase_if(cases, [&](const OracleCase& c) {
    double dim = std::pow(double(c.twice_s + 1), double(c.n));
    return dim > double(max_dim);
  });

  std::atomic<bool> all_pass{true};
  Table out;
  out.columns = {"n",  "s",  "beta_B", "beta0", "dim", "dev_energy", "dev_entropy",
                 "dev_temperature", "dev_weights", "pass"};
  out.rows = parallel_rows(common.jobs, int(cases.size()), [&](int i) {
    const OracleCase& c = cases[i];
    const EnsembleSpec spec{c.n, HalfInt{c.twice_s}, common.omega};
    const Equilibrium eq(spec);
    const spinbath::oracle::FullSystem sys(spec);
    const auto rates = spinbath::rates_from_bath(BathSpec{c.beta_B, 1.0}, spec.omega);
    const auto rho = sys.steady_state(sys.thermal_product_state(c.beta0), rates,
                                      DissipationMode::Collective);

    const double de = std::fabs(sys.energy(rho) - eq.steady_energy(c.beta0, c.beta_B));
    const double ds = std::fabs(sys.entropy(rho) - eq.steady_entropy(c.beta0, c.beta_B));
    const double dT =
        std::fabs(sys.apparent_temperature(rho) - eq.apparent_temperature_steady(c.beta0, c.beta_B));

    const auto weights = sys.sector_weights(rho);
    const auto tw = eq.thermal_weights(c.beta0);
    double dw = 0.0;
    for (std::size_t k = 0; k < tw.ladder.size(); ++k) {
      const double lw = tw.log_weight(k);
      const double w_cf = std::isinf(lw) ? 0.0 : std::exp(lw);
      dw = std::max(dw, std::fabs(w_cf - weights.at(tw.ladder[k])));
    }

    const bool pass = de <= tol && ds <= tol && dT <= tol && dw <= tol;
    if (!pass) all_pass.store(false);
    return std::vector<Cell>{cell(double(c.n)),   cell(0.5 * c.twice_s), cell(c.beta_B),
                             cell(c.beta0),       cell(double(sys.dim())), cell(de),
                             cell(ds),            cell(dT),               cell(dw),
                             cell(double(pass))};
  });
  emit(out, common.out, common.format);
  return all_pass.load() ? 0 : 1;
}

// ------------------------------------------------------- validation suite ---

struct PropertyResult {
  std::string name;
  int trials;
  double max_dev;
  bool pass;
};

int run_validate(const CommonOpts& common, unsigned long seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto random_spec = [&](int max_n, int max_twice_s) {
    const int n = std::uniform_int_distribution<int>(1, max_n)(rng);
    const int ts = std::uniform_int_distribution<int>(1, max_twice_s)(rng);
    return EnsembleSpec{n, HalfInt{ts}, 1.0};
  };
  std::vector<PropertyResult> results;

  {  // steady-state apparent temperature reproduces the bath temperature
    double dev = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const EnsembleSpec spec = random_spec(6, 4);
      const Equilibrium eq(spec);
      const double sign = uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      const double beta_B = sign * uniform(0.1, 3.0);
      const double roll = uniform(0.0, 1.0);
      const double beta0 = roll < 0.1 ? kInf : (roll < 0.2 ? -kInf : uniform(-3.0, 3.0));
      const double T = eq.apparent_temperature_steady(beta0, beta_B);
      dev = std::max(dev, std::fabs(T - 1.0 / beta_B) * std::fabs(beta_B));
    }
    results.push_back({"apparent-temperature-identity", 100, dev, dev <= 1e-10});
  }
  {  // sector weights stay normalised far into both temperature tails
    double dev = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const EnsembleSpec spec = random_spec(8, 4);
      const Equilibrium eq(spec);
      const auto tw = eq.thermal_weights(uniform(-50.0, 50.0));
      double sum = 0.0;
      for (std::size_t i = 0; i < tw.ladder.size(); ++i) {
        const double lw = tw.log_weight(i);
        if (!std::isinf(lw)) sum += std::exp(lw);
      }
      dev = std::max(dev, std::fabs(sum - 1.0));
    }
    results.push_back({"sector-weight-normalization", 100, dev, dev <= 1e-12});
  }
  {  // steady energy is even in beta0 and non-increasing in |beta0| for a cold bath
    double margin = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
      const EnsembleSpec spec = random_spec(6, 4);
      const Equilibrium eq(spec);
      const double beta_B = uniform(0.2, 2.0);
      double a = uniform(0.0, 3.0), b = uniform(0.0, 3.0);
      if (a > b) std::swap(a, b);
      margin = std::min(margin, eq.steady_energy(a, beta_B) - eq.steady_energy(b, beta_B));
      const double mirror = std::fabs(eq.steady_energy(-b, beta_B) - eq.steady_energy(b, beta_B));
      margin = std::min(margin, -mirror);
    }
    results.push_back({"energy-monotonic-in-beta0", 60, -margin, margin >= -1e-12});
  }
  {  // entropy bounds: 0 <= S <= n ln(2s+1)
    double dev = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
      const EnsembleSpec spec = random_spec(6, 4);
      const Equilibrium eq(spec);
      const double S = eq.steady_entropy(uniform(-3.0, 3.0), uniform(-2.0, 2.0));
      dev = std::max(dev, std::max(-S, S - spec.n * std::log(double(spec.local_dim()))));
    }
    results.push_back({"entropy-bounds", 60, dev, dev <= 1e-9});
  }
  {  // collective relaxation moves less free energy than independent
    double margin = 0.0;
    int trials = 0;
    while (trials < 60) {
      const EnsembleSpec spec = random_spec(6, 4);
      if (spec.n < 2) continue;
      const Equilibrium eq(spec);
      const double beta_B = (uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * uniform(0.2, 2.0);
      const double beta0 = uniform(-3.0, 3.0);
      if (std::fabs(std::fabs(beta0) - std::fabs(beta_B)) < 0.05) continue;
      ++trials;
      const double gap =
          std::fabs(eq.free_energy_variation(beta0, beta_B, DissipationMode::Independent)) -
          std::fabs(eq.free_energy_variation(beta0, beta_B, DissipationMode::Collective));
      margin = std::min(margin, gap);
    }
    results.push_back({"free-energy-mitigation", 60, -margin, margin >= 0.0});
  }
  {  // entropy production mirror relation at ground preparation
    double dev = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
      const EnsembleSpec spec = random_spec(6, 4);
      const Equilibrium eq(spec);
      const double beta_B = uniform(0.1, 3.0);
      const double lhs = eq.entropy_production(kInf, -beta_B, DissipationMode::Collective);
      const double rhs = 2.0 * spec.omega * beta_B * spec.ns() +
                         eq.entropy_production(kInf, beta_B, DissipationMode::Collective);
      dev = std::max(dev, std::fabs(lhs - rhs));
    }
    results.push_back({"entropy-production-mirror", 60, dev, dev <= 1e-9});
  }
  {  // Otto bookkeeping: energy balance and the fixed efficiency
    double dev = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
      const EnsembleSpec spec = random_spec(6, 4);
      const Equilibrium eq(spec);
      spinbath::CycleSpec cycle{spec, uniform(-2.0, 2.0), uniform(0.0, 0.5), 0.0, 0.0};
      cycle.beta_cold = cycle.beta_hot + uniform(0.2, 2.0);
      cycle.compression =
          uniform(std::nextafter(cycle.beta_hot / cycle.beta_cold, 1.0), 1.0);
      const auto r = spinbath::cycle_work(eq, cycle);
      const double scale = 1.0 + std::fabs(r.heat_hot_collective);
      dev = std::max(dev, std::fabs(r.work_collective + r.heat_hot_collective +
                                    r.heat_cold_collective) /
                              scale);
      if (r.heat_hot_collective != 0.0)
        dev = std::max(dev, std::fabs(-r.work_collective / r.heat_hot_collective -
                                      r.efficiency));
    }
    results.push_back({"otto-energy-balance", 60, dev, dev <= 1e-12});
  }
  {  // spot-check the closed forms against the brute-force steady state
    double dev = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      const EnsembleSpec spec = random_spec(3, 2);
      const Equilibrium eq(spec);
      const spinbath::oracle::FullSystem sys(spec);
      const double beta_B = (uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * uniform(0.3, 2.0);
      const double beta0 = uniform(-2.0, 2.0);
      const auto rates = spinbath::rates_from_bath(BathSpec{beta_B, 1.0}, spec.omega);
      const auto rho = sys.steady_state(sys.thermal_product_state(beta0), rates,
                                        DissipationMode::Collective);
      dev = std::max(dev, std::fabs(sys.energy(rho) - eq.steady_energy(beta0, beta_B)));
      dev = std::max(dev, std::fabs(sys.entropy(rho) - eq.steady_entropy(beta0, beta_B)));
    }
    results.push_back({"oracle-spot-check", 3, dev, dev <= 1e-8});
  }

  Table out;
  out.columns = {"property", "trials", "max_dev", "pass"};
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    out.rows.push_back(
        {cell(r.name), cell(double(r.trials)), cell(r.max_dev), cell(double(r.pass))});
  }
  emit(out, common.out, common.format);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinbath: collective spin-bath thermodynamics toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  // multiplicities
  CommonOpts mult_opts;
  auto* mult = app.add_subcommand("multiplicities", "total-spin sector degeneracies l_J");
  add_common(mult, mult_opts, false);
  mult->callback([&] { rc = run_multiplicities(mult_opts); });

  // energy-curve
  CommonOpts en_opts;
  double en_beta0 = kInf;
  std::string en_grid = "-3:3:61";
  bool en_log = false, en_norm = false;
  auto* en = app.add_subcommand("energy-curve",
                                "steady vs thermal energy over a bath-temperature grid");
  add_common(en, en_opts);
  en->add_option("--beta0", en_beta0, "preparation inverse temperature (inf allowed)")
      ->capture_default_str();
  en->add_option("--grid", en_grid, "grid as lo:hi:points (beta_B, or beta0 when sweeping)")
      ->capture_default_str();
  en->add_flag("--log-grid", en_log, "geometric spacing (positive endpoints)");
  en->add_flag("--normalize", en_norm, "energies per omega*ns");
  bool en_sweep0 = false;
  double en_beta_B = 1.0;
  en->add_flag("--sweep-beta0", en_sweep0, "scan the preparation instead of the bath");
  en->add_option("--beta-B", en_beta_B, "bath inverse temperature for --sweep-beta0")
      ->capture_default_str();
  en->callback([&] {
    rc = run_energy_curve(en_opts, en_beta0, en_sweep0, en_beta_B, parse_grid(en_grid), en_log,
                          en_norm);
  });

  // entropy-curve
  CommonOpts s_opts;
  double s_beta0 = kInf;
  std::string s_grid = "-3:3:61";
  bool s_log = false, s_norm = false;
  auto* sc = app.add_subcommand("entropy-curve",
                                "steady vs thermal entropy over a bath-temperature grid");
  add_common(sc, s_opts);
  sc->add_option("--beta0", s_beta0, "preparation inverse temperature (inf allowed)")
      ->capture_default_str();
  sc->add_option("--grid", s_grid, "beta_B grid as lo:hi:points")->capture_default_str();
  sc->add_flag("--log-grid", s_log, "geometric spacing (positive endpoints)");
  sc->add_flag("--normalize", s_norm, "entropies per spin");
  sc->callback(
      [&] { rc = run_entropy_curve(s_opts, s_beta0, parse_grid(s_grid), s_log, s_norm); });

  // free-energy
  CommonOpts f_opts;
  double f_beta0 = kInf;
  std::string f_grid = "0.1:3:30";
  bool f_log = false, f_norm = false;
  auto* fe = app.add_subcommand(
      "free-energy", "free-energy variation and entropy production over a beta_B grid");
  add_common(fe, f_opts);
  fe->add_option("--beta0", f_beta0, "preparation inverse temperature (inf allowed)")
      ->capture_default_str();
  fe->add_option("--grid", f_grid, "beta_B grid as lo:hi:points (must avoid 0)")
      ->capture_default_str();
  fe->add_flag("--log-grid", f_log, "geometric spacing (positive endpoints)");
  fe->add_flag("--normalize", f_norm, "free energies and productions per spin");
  fe->callback(
      [&] { rc = run_free_energy(f_opts, f_beta0, parse_grid(f_grid), f_log, f_norm); });

  // otto
  CommonOpts o_opts;
  double o_beta0 = kInf, o_beta_h = 0.0, o_lambda = 0.5;
  double o_beta_c = std::numeric_limits<double>::quiet_NaN();
  std::string o_grid;
  bool o_log = false, o_norm = false, o_sdiff = false;
  auto* ot = app.add_subcommand("otto", "Otto-cycle work: collective vs independent baseline");
  add_common(ot, o_opts);
  ot->add_option("--beta0", o_beta0, "preparation inverse temperature (inf allowed)")
      ->capture_default_str();
  ot->add_option("--beta-h", o_beta_h, "hot bath inverse temperature")->capture_default_str();
  ot->add_option("--lambda", o_lambda, "compression ratio in (beta_h/beta_c, 1]")
      ->capture_default_str();
  ot->add_option("--beta-c", o_beta_c, "single cold bath inverse temperature (full report)");
  ot->add_option("--grid", o_grid, "cold bath grid as lo:hi:points (sweep rows)");
  ot->add_flag("--log-grid", o_log, "geometric spacing (positive endpoints)");
  ot->add_flag("--entropy-diff", o_sdiff, "emit entropy drops instead of works");
  ot->add_flag("--normalize", o_norm, "works and heats per omega*ns");
  ot->callback([&] {
    std::optional<double> bc;
    if (!std::isnan(o_beta_c)) bc = o_beta_c;
    std::optional<GridSpec> grid;
    if (!o_grid.empty()) grid = parse_grid(o_grid);
    rc = run_otto(o_opts, o_beta0, o_beta_h, o_lambda, bc, grid, o_log, o_sdiff, o_norm);
  });

  // dynamics
  CommonOpts d_opts;
  double d_beta0 = kInf, d_beta_B = 1.0, d_gamma = 1.0, d_tf = 10.0, d_dt = 0.0, d_se = 0.0;
  auto* dy = app.add_subcommand("dynamics", "relaxation trajectory under the collective bath");
  add_common(dy, d_opts, false);
  dy->add_option("--beta0", d_beta0, "preparation inverse temperature (inf allowed)")
      ->capture_default_str();
  dy->add_option("--beta-B", d_beta_B, "bath inverse temperature")->capture_default_str();
  dy->add_option("--gamma", d_gamma, "dissipation rate scale")->capture_default_str();
  dy->add_option("--t-final", d_tf, "evolution horizon")->capture_default_str();
  dy->add_option("--dt", d_dt, "integrator step (0 = auto)")->capture_default_str();
  dy->add_option("--sample-every", d_se, "sampling interval (0 = auto)")->capture_default_str();
  dy->callback(
      [&] { rc = run_dynamics(d_opts, d_beta0, d_beta_B, d_gamma, d_tf, d_dt, d_se); });

  // oracle-check
  CommonOpts oc_opts;
  long oc_max_dim = 256;
  double oc_tol = 1e-8;
  auto* oc = app.add_subcommand("oracle-check",
                                "closed forms vs brute-force steady states on a fixed grid");
  add_common(oc, oc_opts);
  oc->add_option("--max-dim", oc_max_dim, "skip systems with (2s+1)^n above this")
      ->capture_default_str();
  oc->add_option("--tol", oc_tol, "pass threshold on every deviation")->capture_default_str();
  oc->callback([&] { rc = run_oracle_check(oc_opts, oc_max_dim, oc_tol); });

  // validate
  CommonOpts v_opts;
  unsigned long v_seed = 1;
  auto* va = app.add_subcommand("validate", "randomized property suite (deterministic by seed)");
  add_common(va, v_opts, false);
  va->add_option("--seed", v_seed, "RNG seed")->capture_default_str();
  va->callback([&] { rc = run_validate(v_opts, v_seed); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::domain_error& e) {
    // ill-posed parameter values rank with usage errors; 1 is reserved for
    // failed validation runs
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
