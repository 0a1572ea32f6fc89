#include <benchmark/benchmark.h>

#include <sdkim/diagnostics.hpp>
#include <sdkim/dgp.hpp>
#include <sdkim/estimation.hpp>
#include <sdkim/filter.hpp>

using namespace sdkim;

namespace {

struct Data {
  StaticParams params;
  SpinPath spins;
};

Data make(Index n, Index length) {
  Rng rng(1);
  ParamHyperSpec hyper;
  hyper.spins = n;
  Data d;
  d.params = sample_static_params(hyper, rng);
  const GasCoefficients gas =
      GasCoefficients::targeted(Vector::Zero(1), Vector::Constant(1, 0.95), Vector::Constant(1, 0.01));
  d.spins = simulate_score_driven(ModelKind::dynokim, d.params, gas, length, rng).first;
  return d;
}

void BM_FilterPass(benchmark::State& state) {
  const ModelKind kind = state.range(1) == 0 ? ModelKind::dynokim : ModelKind::dyekim;
  const Data d = make(state.range(0), 1500);
  const FieldCache cache(kind, d.spins, CovariatePath::none(1500), d.params);
  const Index m = cache.factors();
  const GasCoefficients gas =
      GasCoefficients::targeted(Vector::Zero(m), Vector::Constant(m, 0.95), Vector::Constant(m, 0.01));
  for (auto _ : state) benchmark::DoNotOptimize(filter(cache, gas).total_loglik());
  state.SetItemsProcessed(state.iterations() * cache.steps());
}
BENCHMARK(BM_FilterPass)->Args({50, 0})->Args({50, 1})->Args({200, 0})->Unit(benchmark::kMicrosecond);

void BM_RecursiveGradient(benchmark::State& state) {
  const Data d = make(50, 1500);
  const FieldCache cache(ModelKind::dynokim, d.spins, CovariatePath::none(1500), d.params);
  const Vector f_bar = Vector::Zero(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(recursive_loglik(cache, f_bar, Vector::Constant(1, 0.9), Vector::Constant(1, 0.02)));
  }
}
BENCHMARK(BM_RecursiveGradient)->Unit(benchmark::kMicrosecond);

void BM_MeanFieldFit(benchmark::State& state) {
  const Data d = make(state.range(0), 1500);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_static_mf(d.spins).params.J(0, 0));
}
BENCHMARK(BM_MeanFieldFit)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_TheoreticalAuc(benchmark::State& state) {
  const FieldDistribution phi = FieldDistribution::gaussian(0.2, 1.0);
  double beta = 0.25;
  for (auto _ : state) {
    benchmark::DoNotOptimize(theoretical_auc(beta, phi));
    beta = beta > 3.0 ? 0.25 : beta * 1.1;
  }
}
BENCHMARK(BM_TheoreticalAuc)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
