#include <benchmark/benchmark.h>

#include "localma/averaging.hpp"
#include "localma/gating_network.hpp"
#include "localma/rng.hpp"
#include "localma/scenarios.hpp"

using namespace localma;

namespace {

Dataset world_train(int n) {
  ScenarioSpec spec = ScenarioSpec::make(Scenario::S1, n, 1);
  spec.n_test = 10;
  return generate(spec).train;
}

void BM_LossAndGradient(benchmark::State& state) {
  const Dataset d = world_train(static_cast<int>(state.range(0)));
  const GatingNetwork net = init_network({5, 16, 3}, 1);
  const LossSpec loss{};
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradient(net, d, loss));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGradient)->Arg(100)->Arg(900);

void BM_AdamStep(benchmark::State& state) {
  const Dataset d = world_train(900);
  GatingNetwork net = init_network({5, 16, 3}, 1);
  const Gradient g = loss_and_gradient(net, d, LossSpec{}).gradient;
  AdamState adam;
  for (auto _ : state) {
    adam_update(net, g, adam, 1e-6);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_AdamStep);

void BM_Train(benchmark::State& state) {
  const Dataset d = world_train(static_cast<int>(state.range(0)));
  TrainConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(train(d, cfg));
}
BENCHMARK(BM_Train)->Arg(100)->Arg(900)->Unit(benchmark::kMillisecond);

void BM_ProjectToSimplex(benchmark::State& state) {
  CounterRng rng(2);
  NormalSampler normal;
  Eigen::VectorXd v(state.range(0));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(project_to_simplex(v));
}
BENCHMARK(BM_ProjectToSimplex)->Arg(3)->Arg(64)->Arg(1024);

void BM_FitGlobalWeights(benchmark::State& state) {
  const Dataset d = world_train(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_global_weights(d, LossSpec{}));
}
BENCHMARK(BM_FitGlobalWeights)->Arg(100)->Arg(900);

}  // namespace

BENCHMARK_MAIN();
