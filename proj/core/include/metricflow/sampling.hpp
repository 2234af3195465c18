#pragma once

#include <cstdint>
#include <vector>

#include "metricflow/phase_point.hpp"

namespace metricflow {

/// SplitMix64 generator. Used instead of <random> distributions so that sample
/// sets are bit-identical across standard libraries.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() noexcept;
  /// Uniform in [0, 1).
  double uniform() noexcept;
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

struct SampleSpec {
  int count = 50;
  std::uint64_t seed = 1;
  double box = 1.0;            // coordinates uniform in [-box, box]
  bool include_origin = true;  // origin is prepended when set
  double time_min = 0.0;
  double time_max = 0.0;  // times uniform in [time_min, time_max]
};

std::vector<PhasePoint> sample_points(int dimension, const SampleSpec& spec);

}  // namespace metricflow
