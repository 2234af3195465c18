#pragma once

#include <span>
#include <vector>

namespace metricflow {

/// A position in 2n-dimensional phase space together with its time stamp.
struct PhasePoint {
  std::vector<double> coords;
  double time = 0.0;

  PhasePoint() = default;
  PhasePoint(std::vector<double> x, double t) : coords(std::move(x)), time(t) {}

  [[nodiscard]] int dimension() const noexcept { return static_cast<int>(coords.size()); }
  [[nodiscard]] std::span<const double> view() const noexcept { return coords; }
};

}  // namespace metricflow
