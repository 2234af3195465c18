#pragma once

// Hand-rolled random inputs for property tests. Every generator is driven by
// an explicit seed so failures reproduce.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "metricflow/expr.hpp"
#include "metricflow/linalg.hpp"

namespace gen {

using metricflow::CoordinateChart;
using metricflow::Expr;
using metricflow::Matrix;
using metricflow::Vector;

class Source {
 public:
  explicit Source(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi);
  int integer(int lo, int hi);  // inclusive
  bool coin() { return integer(0, 1) == 1; }

  Vector point(int dim, double box = 1.0);
  std::vector<double> coords(int dim, double box = 1.0);
  Matrix skew(int dim, double scale = 1.0);
  /// Skew matrix at distance from singularity: canonical plus a small perturbation.
  Matrix nondegenerate_skew(int dim, double perturbation = 0.3);

  /// Random polynomial in the chart's coordinates: `terms` monomials of total
  /// degree at most `degree`, integer-valued coefficients in [-3, 3].
  Expr polynomial(const CoordinateChart& chart, int degree, int terms);
  /// Random polynomial in a subset of variables [first, first + count).
  Expr polynomial_in(const CoordinateChart& chart, int first, int count, int degree, int terms);

  /// Random expression tree using every operator and function, built so that
  /// it is defined (and smooth) on the whole box [-1, 1]^d x [0, 1].
  Expr smooth(const CoordinateChart& chart, int depth, bool with_time = false);

 private:
  Expr leaf(const CoordinateChart& chart, bool with_time);
  std::mt19937_64 rng_;
};

}  // namespace gen
