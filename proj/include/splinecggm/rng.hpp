#pragma once

#include <cstdint>

#include "splinecggm/types.hpp"

namespace scg {

// Deterministic generator (xoshiro256++) seeded through splitmix64 so that
// results are bit-reproducible independent of the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; second value of each pair is cached.
  double normal();

  // Fisher-Yates index permutation of 0..n-1.
  std::vector<int> permutation(int n);

  // First k entries of a permutation (sample without replacement).
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::uint64_t state_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stream k of a master seed: streams for distinct k are independent for all
// practical purposes. Rule: seed_k = splitmix64(seed XOR splitmix64(k+1)).
std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t k);

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace scg
