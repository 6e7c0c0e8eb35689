#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace qwem {

// Deterministic RNG. The raw engine is std::mt19937_64 (its output sequence
// is fully specified by the standard); all derived distributions are
// implemented here rather than via std::*_distribution, whose outputs are
// implementation-defined and would break bit-identical artifacts across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), n >= 1; unbiased via rejection.
  std::uint64_t uniform_index(std::uint64_t n);

  // Standard normal via Box-Muller; caches the second deviate.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Walker alias table for O(1) sampling from a fixed discrete distribution.
class AliasTable {
 public:
  AliasTable() = default;
  // Weights must be non-negative with a positive sum.
  explicit AliasTable(const std::vector<double>& weights);

  std::size_t sample(Rng& rng) const;
  std::size_t size() const { return prob_.size(); }
  bool empty() const { return prob_.empty(); }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace qwem
