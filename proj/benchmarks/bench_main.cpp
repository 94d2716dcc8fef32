#include <benchmark/benchmark.h>

#include <random>

#include "tmpredict/eval.hpp"
#include "tmpredict/linear.hpp"
#include "tmpredict/lstm.hpp"
#include "tmpredict/synthetic.hpp"

using namespace tmpredict;

namespace {

// Full-size data: 23 nodes, 309 slots, the first 263 normalized for training.
const TrafficSeries& train_split() {
  static const TrafficSeries train = [] {
    SyntheticConfig sc;
    sc.seed = 1;
    const auto data = synthesize(sc);
    auto parts = split(data, SplitSpec{263, 46});
    return normalize(parts.first, fit_norm(parts.first));
  }();
  return train;
}

LstmNetwork full_size_net(std::size_t layers) {
  NetworkDims d;
  d.input_dim = 529;
  d.output_dim = 529;
  d.hidden_dim = 64;
  d.layers = layers;
  return init_params(d, 3);
}

void BM_LstmForward(benchmark::State& state) {
  const auto net = full_size_net(static_cast<std::size_t>(state.range(0)));
  const auto window = make_windows(train_split(), 10).front();
  for (auto _ : state) benchmark::DoNotOptimize(predict(net, window));
}
BENCHMARK(BM_LstmForward)->Arg(1)->Arg(2)->Arg(6);

void BM_LstmBptt(benchmark::State& state) {
  const auto net = full_size_net(static_cast<std::size_t>(state.range(0)));
  const auto window = make_windows(train_split(), 10).front();
  for (auto _ : state) benchmark::DoNotOptimize(bptt_gradients(net, window));
}
BENCHMARK(BM_LstmBptt)->Arg(1)->Arg(2)->Arg(6);

void BM_LstmEpoch(benchmark::State& state) {
  const auto samples = make_windows(train_split(), 10);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  const auto net = full_size_net(2);
  for (auto _ : state) benchmark::DoNotOptimize(train(net, samples, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples.size()));
}
BENCHMARK(BM_LstmEpoch)->Unit(benchmark::kMillisecond);

std::vector<double> od_series() { return train_split().od_series(24); }

void BM_ArmaFit(benchmark::State& state) {
  const auto y = od_series();
  for (auto _ : state) benchmark::DoNotOptimize(arma_fit(y, 2, 1));
}
BENCHMARK(BM_ArmaFit);

void BM_ArmaForecast(benchmark::State& state) {
  const auto y = od_series();
  const auto m = arma_fit(y, 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(arma_forecast(m, y, 1));
}
BENCHMARK(BM_ArmaForecast);

void BM_ArarFit(benchmark::State& state) {
  const auto y = od_series();
  for (auto _ : state) benchmark::DoNotOptimize(arar_fit(y));
}
BENCHMARK(BM_ArarFit);

void BM_HoltWintersFit(benchmark::State& state) {
  const auto y = od_series();
  for (auto _ : state) benchmark::DoNotOptimize(hw_fit(y));
}
BENCHMARK(BM_HoltWintersFit);

void BM_PerOdFit(benchmark::State& state) {
  const auto kind = static_cast<LinearKind>(state.range(0));
  state.SetLabel(to_string(kind));
  for (auto _ : state) benchmark::DoNotOptimize(fit_per_od(kind, train_split(), LinearConfig{}));
}
BENCHMARK(BM_PerOdFit)
    ->Arg(static_cast<int>(LinearKind::Arma))
    ->Arg(static_cast<int>(LinearKind::Arar))
    ->Arg(static_cast<int>(LinearKind::HoltWinters))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
