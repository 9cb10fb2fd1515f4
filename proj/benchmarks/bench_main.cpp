#include <benchmark/benchmark.h>

#include <random>

#include "skyaug/augment.hpp"
#include "skyaug/evalmetrics.hpp"
#include "skyaug/gan.hpp"
#include "skyaug/imageio.hpp"
#include "skyaug/pls.hpp"
#include "skyaug/pseudolabel.hpp"

using namespace skyaug;

namespace {

Tensor normal_tensor(Shape s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Tensor t(std::move(s));
  for (auto& v : t.values())
    v = d(rng);
  return t;
}

void BM_Conv2dForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto x = ag::Var::leaf(normal_tensor({n, 32, 16, 16}, 1), true, "x");
  auto w = ag::Var::leaf(normal_tensor({64, 32, 4, 4}, 2), true, "w");
  auto b = ag::Var::leaf(Tensor({64}), true, "b");
  for (auto _ : state) {
    auto y = ag::sum(ag::conv2d(x, w, b, {}));
    ag::backward(y);
    benchmark::DoNotOptimize(w.grad().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_Conv2dForwardBackward)->Arg(1)->Arg(32);

void BM_GanEpoch(benchmark::State& state) {
  std::vector<NormalizedImage> data;
  for (const auto& it : synth_dataset(64, 32, 1))
    data.push_back(normalize(it.image));
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(train_gan(data, cfg).loss_history.front().d_loss);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(data.size()));
}
BENCHMARK(BM_GanEpoch)->Unit(benchmark::kMillisecond);

void BM_PlsFit(benchmark::State& state) {
  const auto d = make_dataset(synth_dataset(69, 32, 2));
  const auto nc = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_pls2(d.X, d.Y, nc).B.data());
}
BENCHMARK(BM_PlsFit)->Arg(8)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_RocCurve(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  BinaryMap gt(32, 32);
  std::vector<double> s(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt[i] = u(rng) < 0.4;
    s[i] = u(rng);
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(roc_curve(s, gt).auc);
}
BENCHMARK(BM_RocCurve);

void BM_EstimateMap(benchmark::State& state) {
  const auto img = synth_dataset(1, 32, 4).front().image;
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_map(img, {}, {}).cloud_count());
}
BENCHMARK(BM_EstimateMap);

} // namespace

BENCHMARK_MAIN();
