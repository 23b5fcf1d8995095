#include <doctest.h>

#include "oracles.hpp"
#include "puma/error.hpp"
#include "puma/metrics.hpp"
#include "puma/report.hpp"
#include "puma/rng.hpp"

using namespace puma;

namespace {

LabelMask random_mask(SplitMix64& rng, int w, int h, int num_classes) {
  LabelMask mask(w, h);
  for (auto& v : mask.data) v = static_cast<std::uint8_t>(rng.below(num_classes + 1));
  return mask;
}

std::optional<double> pooled_dice(const DiceCounts& counts, int class_index) {
  return aggregate_dice({counts}, DiceAggregation::pooled).per_class[class_index - 1];
}

}  // namespace

TEST_CASE("identical masks score Dice 1 for present classes, absent classes have no value") {
  LabelMask mask(8, 8);
  for (int x = 0; x < 4; ++x) mask.at(x, 0) = 1;
  mask.at(0, 2) = 3;

  const DiceCounts counts = dice_counts(mask, mask, tissue_taxonomy());
  CHECK(pooled_dice(counts, 1) == 1.0);
  CHECK(pooled_dice(counts, 3) == 1.0);
  CHECK_FALSE(pooled_dice(counts, 2).has_value());  // absent from both, skip policy
}

TEST_CASE("disjoint equal-sized regions score 0") {
  LabelMask pred(8, 8);
  LabelMask gt(8, 8);
  for (int x = 0; x < 4; ++x) pred.at(x, 0) = 1;
  for (int x = 0; x < 4; ++x) gt.at(x, 4) = 1;
  const DiceCounts counts = dice_counts(pred, gt, tissue_taxonomy());
  CHECK(pooled_dice(counts, 1) == 0.0);
}

TEST_CASE("4 vs 4 pixels with overlap 2 scores 0.5") {
  // pred covers columns 0..3, gt covers columns 2..5 of one row
  LabelMask pred(8, 8);
  LabelMask gt(8, 8);
  for (int x = 0; x < 4; ++x) pred.at(x, 0) = 1;
  for (int x = 2; x < 6; ++x) gt.at(x, 0) = 1;
  const DiceCounts counts = dice_counts(pred, gt, tissue_taxonomy());
  CHECK(counts.per_class[0].intersection == 2);
  CHECK(counts.per_class[0].pred_pixels == 4);
  CHECK(counts.per_class[0].gt_pixels == 4);
  CHECK(pooled_dice(counts, 1) == 0.5);  // 2*2/(4+4)
}

TEST_CASE("dimension mismatch is rejected") {
  try {
    dice_counts(LabelMask(4, 4), LabelMask(4, 5), tissue_taxonomy());
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == errc::dimension_mismatch);
  }
}

TEST_CASE("dice counts equal the naive per-class triple counter on random masks") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = 1 + static_cast<int>(rng.below(32));
    const int h = 1 + static_cast<int>(rng.below(32));
    const int k = 1 + static_cast<int>(rng.below(5));
    Taxonomy tax("random", [k] {
      std::vector<std::string> names;
      for (int c = 0; c < k; ++c) names.push_back("class" + std::to_string(c));
      return names;
    }());

    const LabelMask pred = random_mask(rng, w, h, k);
    const LabelMask gt = random_mask(rng, w, h, k);
    const DiceCounts fast = dice_counts(pred, gt, tax);
    const auto naive = oracle::dice_triples(pred, gt, k);
    for (int c = 0; c < k; ++c) {
      REQUIRE(fast.per_class[c].intersection == naive[c].inter);
      REQUIRE(fast.per_class[c].pred_pixels == naive[c].pred);
      REQUIRE(fast.per_class[c].gt_pixels == naive[c].gt);
    }
  }
}

TEST_CASE("dice is symmetric in its arguments") {
  SplitMix64 rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    const LabelMask a = random_mask(rng, 16, 16, 4);
    const LabelMask b = random_mask(rng, 16, 16, 4);
    Taxonomy tax("sym", {"c1", "c2", "c3", "c4"});
    const auto ab = aggregate_dice({dice_counts(a, b, tax)}, DiceAggregation::pooled);
    const auto ba = aggregate_dice({dice_counts(b, a, tax)}, DiceAggregation::pooled);
    for (int c = 0; c < 4; ++c) REQUIRE(ab.per_class[c] == ba.per_class[c]);
  }
}

TEST_CASE("pooled aggregation sums counts before dividing, per-image mean averages") {
  // case 1: 2/4 overlap (dice 0.5); case 2: perfect 8 pixels (dice 1.0)
  DiceCounts case1{{{2, 4, 4}}};
  DiceCounts case2{{{8, 8, 8}}};

  const auto pooled = aggregate_dice({case1, case2}, DiceAggregation::pooled);
  CHECK(*pooled.per_class[0] == doctest::Approx(2.0 * 10 / 24).epsilon(1e-12));

  const auto mean = aggregate_dice({case1, case2}, DiceAggregation::per_image_mean);
  CHECK(*mean.per_class[0] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("absent policy controls both-absent classes") {
  DiceCounts present{{{4, 4, 4}, {0, 0, 0}}};  // class 2 absent everywhere

  const auto skip = aggregate_dice({present}, DiceAggregation::pooled, AbsentPolicy::skip);
  CHECK_FALSE(skip.per_class[1].has_value());
  CHECK(skip.macro == 1.0);  // macro over classes that carry a value

  const auto one = aggregate_dice({present}, DiceAggregation::pooled, AbsentPolicy::score_one);
  CHECK(one.per_class[1] == 1.0);
  CHECK(one.macro == 1.0);

  // per-image mean: absent case skipped vs scored 1
  DiceCounts with_class{{{3, 3, 3}, {1, 2, 2}}};
  const auto mean_skip = aggregate_dice({present, with_class}, DiceAggregation::per_image_mean,
                                        AbsentPolicy::skip);
  CHECK(*mean_skip.per_class[1] == doctest::Approx(0.5).epsilon(1e-12));
  const auto mean_one = aggregate_dice({present, with_class}, DiceAggregation::per_image_mean,
                                       AbsentPolicy::score_one);
  CHECK(*mean_one.per_class[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("single case, single class, pred == gt gives 1.0 in both modes") {
  DiceCounts counts{{{6, 6, 6}}};
  CHECK(*aggregate_dice({counts}, DiceAggregation::pooled).per_class[0] == 1.0);
  CHECK(*aggregate_dice({counts}, DiceAggregation::per_image_mean).per_class[0] == 1.0);
}

TEST_CASE("empty input is rejected") {
  try {
    aggregate_dice({}, DiceAggregation::pooled);
    FAIL("expected EmptyInput");
  } catch (const Error& e) {
    CHECK(e.code() == errc::empty_input);
  }
}

TEST_CASE("macro averages reproduce the published per-class tissue figures") {
  // five per-class Dice values and their mean, display-rounded to 3 decimals
  const std::vector<std::optional<double>> ours{0.913, 0.826, 0.845, 0.792, 0.372};
  const double ours_macro = macro_average(ours);
  CHECK(ours_macro == doctest::Approx(0.7496).epsilon(5e-4));
  CHECK(format_display(ours_macro) == "0.750");
  CHECK(format_value(round6(ours_macro)) == "0.749600");

  const std::vector<std::optional<double>> baseline{0.934, 0.849, 0.000, 0.853, 0.508};
  const double baseline_macro = macro_average(baseline);
  CHECK(baseline_macro == doctest::Approx(0.6288).epsilon(5e-4));
  CHECK(format_display(baseline_macro) == "0.629");
}

TEST_CASE("macro average is invariant under class reordering") {
  SplitMix64 rng(3);
  std::vector<std::optional<double>> values;
  for (int i = 0; i < 7; ++i) values.push_back(rng.unit());
  const double before = macro_average(values);
  fisher_yates_shuffle(values, rng);
  CHECK(macro_average(values) == doctest::Approx(before).epsilon(1e-12));
}
