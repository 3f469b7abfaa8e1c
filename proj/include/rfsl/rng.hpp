#pragma once

#include <cstdint>
#include <span>

namespace rfsl::rng {

// Purpose tags keep substreams for different consumers disjoint even when
// they share (seed, index, step).
enum class Domain : std::uint64_t {
  InitialState = 1,
  StepNoise = 2,
  TargetDraw = 3,
  Blur = 4,
  TvSplit = 5,
  PerturbationField = 6,
  ForwardProcess = 7,
  Experiment = 8,
  Test = 9,
};

std::uint64_t mix64(std::uint64_t z) noexcept;

// Key for the substream identified by (seed, domain, a, b). Pure function of its inputs.
std::uint64_t substream_key(std::uint64_t seed, Domain domain, std::uint64_t a,
                            std::uint64_t b) noexcept;

// Counter-based generator: the k-th draw is mix64(key + (k+1)*golden). Streams are
// cheap to construct, so every (trajectory, step) pair gets its own.
class Stream {
 public:
  explicit Stream(std::uint64_t key) noexcept : key_(key) {}
  Stream(std::uint64_t seed, Domain domain, std::uint64_t a, std::uint64_t b = 0) noexcept
      : key_(substream_key(seed, domain, a, b)) {}

  std::uint64_t next_u64() noexcept;
  // Uniform on the open interval (0, 1).
  double uniform() noexcept;
  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;
  void fill_normal(std::span<double> out) noexcept;
  // Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace rfsl::rng
