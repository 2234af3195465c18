#include <benchmark/benchmark.h>

#include "metricflow/brackets.hpp"
#include "metricflow/evolution.hpp"
#include "metricflow/friction.hpp"
#include "metricflow/linalg.hpp"

using namespace metricflow;

namespace {

const CoordinateChart two{2};

Matrix damping() {
  Matrix k = Matrix::Zero(2, 2);
  k(0, 0) = 1.0;
  k(1, 1) = 2.0;
  return k;
}

std::shared_ptr<const VectorField> quartic() {
  static const auto f = std::make_shared<const VectorField>(
      VectorField::from_hamiltonian(two, parse("(p1^2+p2^2)/2 + q1^4/4 + q1*q2", two), damping()));
  return f;
}

std::shared_ptr<const VectorField> linear() {
  static const auto f = std::make_shared<const VectorField>(
      VectorField::from_hamiltonian(two, parse("(p1^2+p2^2)/2 + (q1^2+q2^2)/2 + 0.3*q1*q2", two), damping()));
  return f;
}

}  // namespace

static void BM_ParseExpression(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parse("p1^2/2 + p2^2/2 + sin(q1*q2) + exp(-q1^2)*log(2+p2^2)", two));
}
BENCHMARK(BM_ParseExpression);

static void BM_EvalExpression(benchmark::State& state) {
  const Expr e = parse("p1^2/2 + p2^2/2 + sin(q1*q2) + exp(-q1^2)*log(2+p2^2)", two);
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  for (auto _ : state) benchmark::DoNotOptimize(e.eval(x, 0.0));
}
BENCHMARK(BM_EvalExpression);

static void BM_Differentiate(benchmark::State& state) {
  const Expr e = parse("p1^2/2 + p2^2/2 + sin(q1*q2) + exp(-q1^2)*log(2+p2^2)", two);
  for (auto _ : state) benchmark::DoNotOptimize(differentiate(differentiate(e, 0), 1));
}
BENCHMARK(BM_Differentiate);

static void BM_Expm(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const Matrix a = Matrix::Random(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(expm(a));
}
BENCHMARK(BM_Expm)->Arg(4)->Arg(15)->Arg(45);

static void BM_IntegrateWithTangent(benchmark::State& state) {
  const PhasePoint x({0.3, -0.2, 0.1, 0.4}, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_with_tangent(*quartic(), x, 1.0));
}
BENCHMARK(BM_IntegrateWithTangent);

static void BM_Pullback(benchmark::State& state) {
  const PhasePoint x({0.3, -0.2, 0.1, 0.4}, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(pullback_metric(*quartic(), MetricField::canonical(2), x, 1.0));
}
BENCHMARK(BM_Pullback);

static void BM_TransportedJet(benchmark::State& state) {
  const MetricField m = MetricField::transported(MetricField::canonical(2), quartic());
  const PhasePoint x({0.3, -0.2, 0.1, 0.4}, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(m.jet(x));
}
BENCHMARK(BM_TransportedJet);

static void BM_SeriesLinear(benchmark::State& state) {
  const PhasePoint x({0.3, -0.2, 0.1, 0.4}, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(series_propagate(*linear(), canonical_metric(2), 1.0, x));
}
BENCHMARK(BM_SeriesLinear);

static void BM_SeriesGenericBuild(benchmark::State& state) {
  SeriesOptions opts;
  opts.mode = SeriesMode::Generic;
  opts.order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(SeriesPropagator(quartic(), canonical_metric(2), FieldPart::All, opts));
}
BENCHMARK(BM_SeriesGenericBuild)->Arg(2)->Arg(4)->Arg(6);

static void BM_SplitExact(benchmark::State& state) {
  const PhasePoint x({0.3, -0.2, 0.1, 0.4}, 0.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        split_propagate(*linear(), canonical_metric(2), {1.0, static_cast<int>(state.range(0))}, x));
}
BENCHMARK(BM_SplitExact)->Arg(10)->Arg(1000);

static void BM_HelmholtzResidual(benchmark::State& state) {
  const MetricField m =
      analytic_metric(FrictionSystem::constant(two, parse("(p1^2+p2^2)/2 + q1^4/4", two), damping()), 0.0);
  const PhasePoint x({0.3, -0.2, 0.1, 0.4}, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(invariance_residual(*quartic(), m, x));
}
BENCHMARK(BM_HelmholtzResidual);

static void BM_BracketJacobi(benchmark::State& state) {
  const MetricField m =
      analytic_metric(FrictionSystem::constant(two, parse("(p1^2+p2^2)/2 + q1^4/4", two), damping()), 0.0);
  const Observable a = Observable::parse("q1", two);
  const Observable b = Observable::parse("p1", two);
  const Observable c = Observable::parse("q1*p1", two);
  const PhasePoint x({0.3, -0.2, 0.1, 0.4}, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(bracket_jacobi_residual(a, b, c, m, x));
}
BENCHMARK(BM_BracketJacobi);
BENCHMARK_MAIN();
