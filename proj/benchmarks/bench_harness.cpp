#include <benchmark/benchmark.h>

#include "puma/loss.hpp"
#include "puma/metrics.hpp"
#include "puma/raster.hpp"
#include "puma/rng.hpp"
#include "puma/synthgen.hpp"

using namespace puma;

namespace {

AnnotationSet dense_case() {
  SynthSpec spec;
  spec.seed = 1;
  spec.width = 1024;
  spec.height = 1024;
  spec.nuclei_per_class = {250, 250, 250};
  spec.tissue_regions_per_class = {20, 20, 20, 20, 20};
  return generate_case(spec, track1_taxonomy(), tissue_taxonomy(), "bench").gt_nuclei;
}

LabelMask random_label_mask(int w, int h, int classes, std::uint64_t seed) {
  SplitMix64 rng(seed);
  LabelMask mask(w, h);
  for (auto& v : mask.data) v = static_cast<std::uint8_t>(rng.below(classes + 1));
  return mask;
}

}  // namespace

static void BM_Rasterize1024(benchmark::State& state) {
  const AnnotationSet set = dense_case();
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(set, track1_taxonomy()));
}
BENCHMARK(BM_Rasterize1024)->Unit(benchmark::kMillisecond);

static void BM_ConnectedComponents1024(benchmark::State& state) {
  const LabelMask mask = rasterize(dense_case(), track1_taxonomy());
  for (auto _ : state)
    benchmark::DoNotOptimize(connected_components(mask, Connectivity::eight));
}
BENCHMARK(BM_ConnectedComponents1024)->Unit(benchmark::kMillisecond);

static void BM_DiceCounts1024(benchmark::State& state) {
  const LabelMask pred = random_label_mask(1024, 1024, 5, 7);
  const LabelMask gt = random_label_mask(1024, 1024, 5, 8);
  for (auto _ : state) benchmark::DoNotOptimize(dice_counts(pred, gt, tissue_taxonomy()));
}
BENCHMARK(BM_DiceCounts1024)->Unit(benchmark::kMillisecond);

static void BM_MatchNuclei(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(3);
  NucleiSet pred, gt;
  for (int i = 0; i < n; ++i) {
    const Point p{rng.unit() * 1024.0, rng.unit() * 1024.0};
    gt.nuclei.push_back(Nucleus{p, 1});
    pred.nuclei.push_back(
        Nucleus{Point{p.x + rng.gaussian() * 3.0, p.y + rng.gaussian() * 3.0}, 1});
  }
  const Taxonomy one("one", {"cell"});
  for (auto _ : state)
    benchmark::DoNotOptimize(match_nuclei(pred, gt, one, 15.0, MatchStrategy::optimal));
}
BENCHMARK(BM_MatchNuclei)->Arg(200)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

static void BM_MaskedCrossEntropy(benchmark::State& state) {
  const int side = 256;
  SplitMix64 rng(5);
  LogitField logits(side, side, 5);
  for (double& v : logits.values) v = (rng.unit() - 0.5) * 10.0;
  MaskedTarget target;
  target.width = side;
  target.height = side;
  target.labels.resize(logits.pixel_count());
  target.mask.resize(logits.pixel_count());
  for (std::size_t p = 0; p < logits.pixel_count(); ++p) {
    target.labels[p] = static_cast<int>(rng.below(5));
    target.mask[p] = static_cast<std::uint8_t>(rng.below(2));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(masked_cross_entropy(logits, target));
    benchmark::DoNotOptimize(masked_ce_gradient(logits, target));
  }
}
BENCHMARK(BM_MaskedCrossEntropy)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
