#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "metricflow/linalg.hpp"
#include "metricflow/sampling.hpp"
#include "oracles.hpp"

using namespace metricflow;

TEST_SUITE("linalg") {
  TEST_CASE("expm of simple matrices") {
    CHECK(max_abs(expm(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)) == 0.0);
    Matrix rot(2, 2);
    rot << 0, 1, -1, 0;
    Matrix expected(2, 2);
    expected << std::cos(1.0), std::sin(1.0), -std::sin(1.0), std::cos(1.0);
    CHECK(max_abs(expm(rot) - expected) < 1e-15);
    const Matrix diag = Vector::LinSpaced(4, -2, 3).asDiagonal();
    const Matrix e = expm(diag);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(e(i, i) - std::exp(diag(i, i))) < 1e-12 * std::exp(diag(i, i)));
  }

  TEST_CASE("expm agrees with the Taylor oracle across norms") {
    gen::Source src(8);
    for (double scale : {1e-3, 0.1, 1.0, 3.0, 10.0}) {
      for (int trial = 0; trial < 5; ++trial) {
        Matrix a(5, 5);
        for (int i = 0; i < 5; ++i)
          for (int j = 0; j < 5; ++j) a(i, j) = src.uniform(-scale, scale) / 5.0;
        const Matrix ref = oracle::taylor_expm(a);
        const double rel = (expm(a) - ref).norm() / ref.norm();
        INFO("scale " << scale);
        CHECK(rel < 1e-12);
      }
    }
  }

  TEST_CASE("skew helpers") {
    gen::Source src(1);
    const Matrix s = src.skew(5);
    CHECK(skew_defect(s) == 0.0);
    CHECK(skew_dimension(5) == 10);
    const Vector v = skew_to_vector(s);
    CHECK(v.size() == 10);
    CHECK(max_abs(skew_from_vector(v, 5) - s) == 0.0);
    Matrix a(2, 2);
    a << 1, 3, 1, 2;
    CHECK(max_abs(skew_part(a) - (Matrix(2, 2) << 0, 1, -1, 0).finished()) == 0.0);
  }

  TEST_CASE("block and canonical metrics") {
    Matrix c(4, 4);
    c << 0, 0, 1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, -1, 0, 0;
    CHECK(max_abs(canonical_metric(2) - c) == 0.0);
    Matrix g(2, 2);
    g << 1, 2, 3, 4;
    const Matrix b = block_metric(g);
    CHECK(b(0, 3) == 2.0);
    CHECK(b(3, 0) == -2.0);
    CHECK(skew_defect(b) == 0.0);
  }

  TEST_CASE("sample points are reproducible and inside the box") {
    SampleSpec spec;
    spec.count = 20;
    spec.seed = 7;
    spec.box = 2.0;
    spec.time_max = 3.0;
    const auto a = sample_points(4, spec);
    const auto b = sample_points(4, spec);
    REQUIRE(a.size() == 21);
    CHECK(a[0].coords == std::vector<double>(4, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].coords == b[i].coords);
      CHECK(a[i].time == b[i].time);
      for (double c : a[i].coords) CHECK(std::abs(c) <= 2.0);
      CHECK(a[i].time >= 0.0);
      CHECK(a[i].time <= 3.0);
    }
    spec.seed = 8;
    CHECK(sample_points(4, spec)[1].coords != a[1].coords);
  }
}
