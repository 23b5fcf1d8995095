#include <doctest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "puma/error.hpp"
#include "puma/metrics.hpp"
#include "puma/rng.hpp"

using namespace puma;

namespace {

NucleiSet points(std::initializer_list<Point> centroids, int class_index = 1) {
  NucleiSet set;
  for (const Point& p : centroids) set.nuclei.push_back(Nucleus{p, class_index});
  return set;
}

const Taxonomy kOneClass("single", {"cell"});

double total_distance(const MatchResult& result) {
  double total = 0.0;
  for (const MatchedPair& pair : result.pairs) total += pair.distance;
  return total;
}

NucleiSet random_points(SplitMix64& rng, int count, double extent, int num_classes = 1) {
  NucleiSet set;
  for (int i = 0; i < count; ++i)
    set.nuclei.push_back(Nucleus{Point{rng.unit() * extent, rng.unit() * extent},
                                 1 + static_cast<int>(rng.below(num_classes))});
  return set;
}

}  // namespace

TEST_CASE("identical point sets match perfectly") {
  const NucleiSet same = points({{1, 1}, {10, 10}, {20, 5}});
  const auto results = match_nuclei(same, same, kOneClass, 15.0);
  REQUIRE(results.size() == 1);
  CHECK(results[0].pairs.size() == 3);
  CHECK(results[0].unmatched_pred.empty());
  CHECK(results[0].unmatched_gt.empty());
  for (const MatchedPair& pair : results[0].pairs) CHECK(pair.distance == 0.0);
}

TEST_CASE("empty prediction leaves every ground-truth nucleus unmatched") {
  const auto results = match_nuclei(NucleiSet{}, points({{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}}),
                                    kOneClass, 15.0);
  CHECK(results[0].pairs.empty());
  CHECK(results[0].unmatched_gt.size() == 5);
}

TEST_CASE("documented greedy-vs-optimal counterexample") {
  // pred {(0,0), (5,0)}, gt {(3,0), (8,0)}, radius 4: the greedy pass grabs
  // the 2-pixel pair and strands both remaining points; the assignment
  // recovers both pairs.
  const NucleiSet pred = points({{0, 0}, {5, 0}});
  const NucleiSet gt = points({{3, 0}, {8, 0}});

  const auto optimal = match_nuclei(pred, gt, kOneClass, 4.0, MatchStrategy::optimal);
  REQUIRE(optimal[0].pairs.size() == 2);
  CHECK(optimal[0].pairs[0].pred_ordinal == 0);
  CHECK(optimal[0].pairs[0].gt_ordinal == 0);
  CHECK(optimal[0].pairs[0].distance == doctest::Approx(3.0));
  CHECK(optimal[0].pairs[1].pred_ordinal == 1);
  CHECK(optimal[0].pairs[1].gt_ordinal == 1);
  CHECK(optimal[0].pairs[1].distance == doctest::Approx(3.0));

  const auto greedy = match_nuclei(pred, gt, kOneClass, 4.0, MatchStrategy::greedy);
  REQUIRE(greedy[0].pairs.size() == 1);
  CHECK(greedy[0].pairs[0].pred_ordinal == 1);
  CHECK(greedy[0].pairs[0].gt_ordinal == 0);
  CHECK(greedy[0].unmatched_pred == std::vector<int>{0});
  CHECK(greedy[0].unmatched_gt == std::vector<int>{1});
}

TEST_CASE("non-positive radius is rejected") {
  for (const double radius : {0.0, -3.0}) {
    try {
      match_nuclei(points({{0, 0}}), points({{0, 0}}), kOneClass, radius);
      FAIL("expected NonPositiveRadius");
    } catch (const Error& e) {
      CHECK(e.code() == errc::non_positive_radius);
    }
  }
}

TEST_CASE("matching is one-to-one and respects the radius") {
  SplitMix64 rng(71);
  for (const MatchStrategy strategy : {MatchStrategy::optimal, MatchStrategy::greedy}) {
    for (int trial = 0; trial < 60; ++trial) {
      const NucleiSet pred = random_points(rng, 1 + static_cast<int>(rng.below(30)), 60.0);
      const NucleiSet gt = random_points(rng, 1 + static_cast<int>(rng.below(30)), 60.0);
      const double radius = 2.0 + rng.unit() * 12.0;
      const auto results = match_nuclei(pred, gt, kOneClass, radius, strategy);

      std::set<int> seen_pred, seen_gt;
      for (const MatchedPair& pair : results[0].pairs) {
        CHECK(pair.distance <= radius);
        CHECK(seen_pred.insert(pair.pred_ordinal).second);
        CHECK(seen_gt.insert(pair.gt_ordinal).second);
      }
      CHECK(results[0].pairs.size() + results[0].unmatched_pred.size() == pred.nuclei.size());
      CHECK(results[0].pairs.size() + results[0].unmatched_gt.size() == gt.nuclei.size());
    }
  }
}

TEST_CASE("optimal matches the exhaustive maximum in count and total distance") {
  SplitMix64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const int np = static_cast<int>(rng.below(9));
    const int ng = static_cast<int>(rng.below(9));
    const NucleiSet pred = random_points(rng, np, 25.0);
    const NucleiSet gt = random_points(rng, ng, 25.0);
    const double radius = 3.0 + rng.unit() * 10.0;

    const auto results = match_nuclei(pred, gt, kOneClass, radius, MatchStrategy::optimal);
    std::vector<Point> pred_pts, gt_pts;
    for (const Nucleus& n : pred.nuclei) pred_pts.push_back(n.centroid);
    for (const Nucleus& n : gt.nuclei) gt_pts.push_back(n.centroid);
    const auto brute = oracle::brute_force_matching(pred_pts, gt_pts, radius);

    REQUIRE(static_cast<int>(results[0].pairs.size()) == brute.pair_count);
    REQUIRE(total_distance(results[0]) == doctest::Approx(brute.total_distance).epsilon(1e-9));
  }
}

TEST_CASE("optimal pair count is never below greedy pair count") {
  SplitMix64 rng(88);
  for (int trial = 0; trial < 80; ++trial) {
    const NucleiSet pred = random_points(rng, 1 + static_cast<int>(rng.below(40)), 50.0);
    const NucleiSet gt = random_points(rng, 1 + static_cast<int>(rng.below(40)), 50.0);
    const double radius = 2.0 + rng.unit() * 10.0;
    const auto optimal = match_nuclei(pred, gt, kOneClass, radius, MatchStrategy::optimal);
    const auto greedy = match_nuclei(pred, gt, kOneClass, radius, MatchStrategy::greedy);
    CHECK(optimal[0].pairs.size() >= greedy[0].pairs.size());
  }
}

TEST_CASE("pairing is invariant under common integer translation") {
  SplitMix64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    // integer coordinates so the translated distances are bit-identical
    NucleiSet pred, gt;
    for (int i = 0; i < 12; ++i)
      pred.nuclei.push_back(Nucleus{Point{static_cast<double>(rng.below(40)),
                                          static_cast<double>(rng.below(40))}, 1});
    for (int i = 0; i < 12; ++i)
      gt.nuclei.push_back(Nucleus{Point{static_cast<double>(rng.below(40)),
                                        static_cast<double>(rng.below(40))}, 1});

    const auto base = match_nuclei(pred, gt, kOneClass, 6.0, MatchStrategy::optimal);

    const double dx = 173.0, dy = -41.0;
    for (Nucleus& n : pred.nuclei) {
      n.centroid.x += dx;
      n.centroid.y += dy;
    }
    for (Nucleus& n : gt.nuclei) {
      n.centroid.x += dx;
      n.centroid.y += dy;
    }
    const auto moved = match_nuclei(pred, gt, kOneClass, 6.0, MatchStrategy::optimal);

    REQUIRE(base[0].pairs.size() == moved[0].pairs.size());
    for (std::size_t i = 0; i < base[0].pairs.size(); ++i) {
      CHECK(base[0].pairs[i].pred_ordinal == moved[0].pairs[i].pred_ordinal);
      CHECK(base[0].pairs[i].gt_ordinal == moved[0].pairs[i].gt_ordinal);
    }
  }
}

TEST_CASE("pairing is invariant under power-of-two scaling of points and radius") {
  SplitMix64 rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    NucleiSet pred = random_points(rng, 14, 50.0);
    NucleiSet gt = random_points(rng, 14, 50.0);
    const auto base = match_nuclei(pred, gt, kOneClass, 7.0, MatchStrategy::optimal);

    for (const double scale : {0.5, 4.0}) {
      NucleiSet pred_scaled = pred;
      NucleiSet gt_scaled = gt;
      for (Nucleus& n : pred_scaled.nuclei) {
        n.centroid.x *= scale;
        n.centroid.y *= scale;
      }
      for (Nucleus& n : gt_scaled.nuclei) {
        n.centroid.x *= scale;
        n.centroid.y *= scale;
      }
      const auto scaled =
          match_nuclei(pred_scaled, gt_scaled, kOneClass, 7.0 * scale, MatchStrategy::optimal);
      REQUIRE(base[0].pairs.size() == scaled[0].pairs.size());
      for (std::size_t i = 0; i < base[0].pairs.size(); ++i) {
        CHECK(base[0].pairs[i].pred_ordinal == scaled[0].pairs[i].pred_ordinal);
        CHECK(base[0].pairs[i].gt_ordinal == scaled[0].pairs[i].gt_ordinal);
      }
    }
  }
}

TEST_CASE("matching is class-aware: coincident points of different classes never pair") {
  const Taxonomy two("two", {"a", "b"});
  NucleiSet pred;
  pred.nuclei.push_back(Nucleus{Point{5, 5}, 1});
  NucleiSet gt;
  gt.nuclei.push_back(Nucleus{Point{5, 5}, 2});

  const auto results = match_nuclei(pred, gt, two, 15.0);
  REQUIRE(results.size() == 2);
  CHECK(results[0].pairs.empty());
  CHECK(results[0].unmatched_pred == std::vector<int>{0});
  CHECK(results[1].pairs.empty());
  CHECK(results[1].unmatched_gt == std::vector<int>{0});
}

TEST_CASE("detection scores follow the tp/fp/fn formulas with 0/0 -> 0") {
  DetectionCounts counts;
  counts.per_class.push_back({8, 3, 2});
  counts.per_class.push_back({0, 0, 0});

  const DetectionSummary summary = detection_f1(counts);
  CHECK(summary.per_class[0].precision == doctest::Approx(8.0 / 11).epsilon(1e-12));
  CHECK(summary.per_class[0].recall == doctest::Approx(0.8).epsilon(1e-12));
  // frozen: 16/21
  CHECK(summary.per_class[0].f1 == doctest::Approx(0.7619047619047619).epsilon(1e-12));
  CHECK(summary.per_class[1].precision == 0.0);
  CHECK(summary.per_class[1].recall == 0.0);
  CHECK(summary.per_class[1].f1 == 0.0);
  CHECK(summary.macro_f1 ==
        doctest::Approx(0.5 * 0.7619047619047619).epsilon(1e-12));
}

TEST_CASE("macro F1 reproduces the published coarse-track averages") {
  const double ours = macro_average({0.725, 0.744, 0.364});
  CHECK(ours == doctest::Approx(0.611).epsilon(5e-4));
  const double baseline = macro_average({0.734, 0.753, 0.424});
  CHECK(baseline == doctest::Approx(0.637).epsilon(5e-4));
}

TEST_CASE("counts are invariant under permutation of points within each set") {
  SplitMix64 rng(21);
  NucleiSet pred = random_points(rng, 25, 40.0, 3);
  NucleiSet gt = random_points(rng, 25, 40.0, 3);
  const Taxonomy three("three", {"a", "b", "c"});

  const auto before = pool_matches(match_nuclei(pred, gt, three, 8.0), three);
  fisher_yates_shuffle(pred.nuclei, rng);
  fisher_yates_shuffle(gt.nuclei, rng);
  const auto after = pool_matches(match_nuclei(pred, gt, three, 8.0), three);

  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(before.per_class[c].tp == after.per_class[c].tp);
    CHECK(before.per_class[c].fp == after.per_class[c].fp);
    CHECK(before.per_class[c].fn == after.per_class[c].fn);
  }
}

TEST_CASE("pool_matches sums per-class counts across cases") {
  const auto case1 = match_nuclei(points({{0, 0}, {9, 0}}), points({{0, 0}}), kOneClass, 4.0);
  const auto case2 = match_nuclei(points({{5, 5}}), points({{5, 5}, {30, 30}}), kOneClass, 4.0);
  std::vector<MatchResult> all = case1;
  all.insert(all.end(), case2.begin(), case2.end());

  const DetectionCounts pooled = pool_matches(all, kOneClass);
  CHECK(pooled.per_class[0].tp == 2);
  CHECK(pooled.per_class[0].fp == 1);
  CHECK(pooled.per_class[0].fn == 1);
}
