#include "spinbath/multiplicity.hpp"

#include <string>
#include <vector>

namespace spinbath {

namespace {

void check_cap(const EnsembleSpec& spec, long table_cap) {
  long size = static_cast<long>(spec.n) * spec.local_dim();
  if (size > table_cap)
    throw ResourceError("multiplicity table size n*(2s+1) = " + std::to_string(size) +
                        " exceeds cap " + std::to_string(table_cap));
}

// Exact level counts by iterated convolution with the single-spin window.
// Index k corresponds to twice_m = 2k - n*twice_s (step 2 lattice).
std::vector<BigInt> convolve_counts(int n, int twice_s) {
  std::vector<BigInt> counts{1};
  for (int step = 0; step < n; ++step) {
    std::vector<BigInt> next(counts.size() + twice_s, 0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] == 0) continue;
      for (int k = 0; k <= twice_s; ++k) next[i + k] += counts[i];
    }
    counts.swap(next);
  }
  return counts;
}

std::map<HalfInt, BigInt> counts_to_map(const std::vector<BigInt>& counts, int twice_max) {
  std::map<HalfInt, BigInt> out;
  for (std::size_t i = 0; i < counts.size(); ++i)
    out.emplace(HalfInt{static_cast<int>(2 * i) - twice_max}, counts[i]);
  return out;
}

}  // namespace

const BigInt& MultiplicityTable::level(HalfInt m) const {
  auto it = level_count.find(m);
  if (it == level_count.end())
    throw std::out_of_range("level count undefined for m = " + to_string(m));
  return it->second;
}

const BigInt& MultiplicityTable::mult(HalfInt J) const {
  auto it = multiplicity.find(J);
  if (it == multiplicity.end())
    throw std::out_of_range("multiplicity undefined for J = " + to_string(J));
  return it->second;
}

const BigInt& MultiplicityTable::neighbor(HalfInt m) const {
  auto it = neighbor_count.find(m);
  if (it == neighbor_count.end())
    throw std::out_of_range("neighbor count undefined for m = " + to_string(m));
  return it->second;
}

BigInt MultiplicityTable::total_dimension() const {
  BigInt d = 1;
  for (int k = 0; k < spec.n; ++k) d *= spec.local_dim();
  return d;
}

std::map<HalfInt, BigInt> level_counts(const EnsembleSpec& spec, long table_cap) {
  spec.validate();
  check_cap(spec, table_cap);
  return counts_to_map(convolve_counts(spec.n, spec.spin.twice), spec.n * spec.spin.twice);
}

std::map<HalfInt, BigInt> multiplicities(const EnsembleSpec& spec, long table_cap) {
  auto I = level_counts(spec, table_cap);
  std::map<HalfInt, BigInt> l;
  HalfInt top = spec.max_total_spin();
  for (int tj = spec.min_total_spin().twice; tj <= top.twice; tj += 2) {
    const BigInt& here = I.at(HalfInt{tj});
    const BigInt above = (tj + 2 <= top.twice) ? I.at(HalfInt{tj + 2}) : BigInt{0};
    BigInt lj = here - above;
    if (lj < 0)
      throw std::logic_error("negative multiplicity at J = " + to_string(HalfInt{tj}) +
                             ": level counts are not unimodal, convolution bug");
    l.emplace(HalfInt{tj}, std::move(lj));
  }
  return l;
}

std::map<HalfInt, BigInt> neighbor_counts(const EnsembleSpec& spec, long table_cap) {
  spec.validate();
  if (spec.n < 2)
    throw std::domain_error("neighbor counts need n >= 2 (no subensemble for a single spin)");
  EnsembleSpec sub = spec;
  sub.n = spec.n - 1;
  return level_counts(sub, table_cap);
}

MultiplicityTable build_multiplicity_table(const EnsembleSpec& spec, long table_cap) {
  MultiplicityTable t;
  t.spec = spec;
  t.level_count = level_counts(spec, table_cap);
  t.multiplicity = multiplicities(spec, table_cap);
  if (spec.n >= 2) t.neighbor_count = neighbor_counts(spec, table_cap);
  return t;
}

}  // namespace spinbath
