#pragma once

#include <cstdint>
#include <vector>

namespace stabletail {

/// Deterministic pseudo-random generator (xoshiro256++ seeded through a
/// splitmix64 expansion). All sampling in the library goes through this
/// class, so results are bit-reproducible across platforms and runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1).
  double next_unit();

  /// Standard normal draw (Marsaglia polar method, one spare cached).
  double next_normal();

 private:
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// A (master_seed, path) pair naming one branch of the replication tree.
///
/// Identical pairs yield bit-identical draws. Distinct paths from the same
/// master seed yield statistically independent streams, so parallel
/// replications never contend and the execution schedule cannot change any
/// result.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t master_seed) : master_(master_seed) {}

  SeedStream child(std::uint64_t branch) const;

  /// 64-bit hash of (master_seed, path); the seed of this branch's Rng.
  std::uint64_t derive_seed() const;

  Rng rng() const { return Rng(derive_seed()); }

  std::uint64_t master_seed() const { return master_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

 private:
  std::uint64_t master_ = 0;
  std::vector<std::uint64_t> path_;
};

}  // namespace stabletail
