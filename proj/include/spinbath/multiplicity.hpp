#pragma once

#include <map>

#include "spinbath/ensemble.hpp"
#include "spinbath/log_math.hpp"

namespace spinbath {

using logmath::BigInt;

// Exact angular-momentum addition combinatorics for n spins s.
//
//   level_count I_m    : dimension of the J_z eigenspace with eigenvalue m
//   multiplicity l_J   : number of spin-J copies in the n-fold product,
//                        l_J = I_J - I_{J+1}
//   neighbor_count K_m : level counts of the (n-1)-spin subensemble
//
// Everything is exact integer arithmetic (iterated convolution); the
// completeness identity sum_J l_J (2J+1) = (2s+1)^n holds exactly.
struct MultiplicityTable {
  EnsembleSpec spec;
  std::map<HalfInt, BigInt> level_count;     // m in [-ns, ns]
  std::map<HalfInt, BigInt> multiplicity;    // J on the ladder
  std::map<HalfInt, BigInt> neighbor_count;  // empty when n == 1

  [[nodiscard]] const BigInt& level(HalfInt m) const;
  [[nodiscard]] const BigInt& mult(HalfInt J) const;
  [[nodiscard]] const BigInt& neighbor(HalfInt m) const;

  // (2s+1)^n, exact.
  [[nodiscard]] BigInt total_dimension() const;
};

// Guards the exact tables against absurd requests; n*(2s+1) above the cap
// raises a resource error before any allocation.
inline constexpr long kDefaultTableCap = 8192;

std::map<HalfInt, BigInt> level_counts(const EnsembleSpec& spec, long table_cap = kDefaultTableCap);
std::map<HalfInt, BigInt> multiplicities(const EnsembleSpec& spec, long table_cap = kDefaultTableCap);
std::map<HalfInt, BigInt> neighbor_counts(const EnsembleSpec& spec, long table_cap = kDefaultTableCap);

MultiplicityTable build_multiplicity_table(const EnsembleSpec& spec,
                                           long table_cap = kDefaultTableCap);

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spinbath
