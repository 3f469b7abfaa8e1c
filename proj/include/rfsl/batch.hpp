#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rfsl/matrix.hpp"

namespace rfsl {

struct SampleMeta {
  std::string sampler;  // "rf", "stoc-rf", ..., or "target"/"blurred" for reference draws
  std::string grid;     // grid descriptor, e.g. "ushaped(N=100,delta=0.01)"
  std::string target;   // target descriptor
  std::uint64_t seed = 0;
  double terminal_time = 1.0;
};

struct TrajectoryFrame {
  std::size_t step = 0;
  double t = 0.0;
  Matrix states;
};

// n samples in d dimensions plus how they were produced. `trajectory` is empty
// unless recording was requested; frame k then holds all states at grid time t_k.
struct SampleBatch {
  Matrix data;
  SampleMeta meta;
  std::vector<TrajectoryFrame> trajectory;

  std::size_t size() const noexcept { return data.rows(); }
  std::size_t dim() const noexcept { return data.cols(); }
};

}  // namespace rfsl
