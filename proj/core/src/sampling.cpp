#include "metricflow/sampling.hpp"

namespace metricflow {

std::uint64_t SampleRng::next() noexcept {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SampleRng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::vector<PhasePoint> sample_points(int dimension, const SampleSpec& spec) {
  std::vector<PhasePoint> points;
  points.reserve(static_cast<std::size_t>(spec.count) + 1);
  SampleRng rng(spec.seed);
  if (spec.include_origin)
    points.emplace_back(std::vector<double>(static_cast<std::size_t>(dimension), 0.0), spec.time_min);
  for (int i = 0; i < spec.count; ++i) {
    std::vector<double> x(static_cast<std::size_t>(dimension));
    for (double& xi : x) xi = rng.uniform(-spec.box, spec.box);
    const double t = spec.time_max > spec.time_min ? rng.uniform(spec.time_min, spec.time_max) : spec.time_min;
    points.emplace_back(std::move(x), t);
  }
  return points;
}

}  // namespace metricflow
