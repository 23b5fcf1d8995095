#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "puma/raster.hpp"
#include "puma/taxonomy.hpp"

namespace puma {

struct ClassPixelCounts {
  std::uint64_t intersection = 0;
  std::uint64_t pred_pixels = 0;
  std::uint64_t gt_pixels = 0;
};

/// Per-class overlap counts for one case; per_class[i] holds class index i+1.
struct DiceCounts {
  std::vector<ClassPixelCounts> per_class;
};

/// Count per-class intersection / prediction / ground-truth pixels.
/// Background (0) is excluded. Throws dimension_mismatch.
DiceCounts dice_counts(const LabelMask& pred, const LabelMask& gt, const Taxonomy& taxonomy);

enum class DiceAggregation { pooled, per_image_mean };

/// What to do with a class absent from both prediction and ground truth:
/// skip leaves it out of the average, score_one counts it as a perfect 1.
enum class AbsentPolicy { skip, score_one };

struct DiceSummary {
  /// nullopt when the class has no support anywhere under the skip policy.
  std::vector<std::optional<double>> per_class;
  double macro = 0.0;
};

/// pooled: sum counts across cases, then divide once per class.
/// per_image_mean: average per-case Dice over the cases where the class
/// occurs (absent cases handled per policy). Throws empty_input.
DiceSummary aggregate_dice(const std::vector<DiceCounts>& counts, DiceAggregation mode,
                           AbsentPolicy absent = AbsentPolicy::skip);

/// Unweighted mean over classes that carry a value; 0 when none do.
double macro_average(const std::vector<std::optional<double>>& per_class);

struct MatchedPair {
  int pred_ordinal = 0;  // position in the prediction NucleiSet
  int gt_ordinal = 0;    // position in the ground-truth NucleiSet
  double distance = 0.0;
};

struct MatchResult {
  int class_index = 0;
  std::vector<MatchedPair> pairs;
  std::vector<int> unmatched_pred;
  std::vector<int> unmatched_gt;
};

enum class MatchStrategy { optimal, greedy };

const char* match_strategy_name(MatchStrategy strategy);

/// One-to-one matching of predicted to ground-truth nuclei, per class, with
/// pairs admissible iff their Euclidean distance is <= radius.
///
/// optimal maximizes pair count and, among maximum matchings, minimizes the
/// total distance (assignment problem). greedy repeatedly takes the globally
/// smallest remaining admissible distance, ties broken by (pred_ordinal,
/// gt_ordinal). Output pairs are sorted by (pred_ordinal, gt_ordinal) and
/// unmatched ordinals ascending, so results are deterministic.
///
/// Throws non_positive_radius.
std::vector<MatchResult> match_nuclei(const NucleiSet& pred, const NucleiSet& gt,
                                      const Taxonomy& taxonomy, double radius,
                                      MatchStrategy strategy = MatchStrategy::optimal);

struct ClassDetectionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
};

struct DetectionCounts {
  std::vector<ClassDetectionCounts> per_class;  // per_class[i] holds class i+1
};

/// Sum tp/fp/fn per class over any number of match results (e.g. all cases).
DetectionCounts pool_matches(const std::vector<MatchResult>& matches, const Taxonomy& taxonomy);

struct ClassDetectionScores {
  ClassDetectionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct DetectionSummary {
  std::vector<ClassDetectionScores> per_class;
  double macro_f1 = 0.0;  // unweighted mean over all taxonomy classes
};

/// precision = tp/(tp+fp), recall = tp/(tp+fn), F1 = 2tp/(2tp+fp+fn), each 0
/// when its denominator is 0.
DetectionSummary detection_f1(const DetectionCounts& counts);
DetectionSummary detection_f1(const std::vector<MatchResult>& matches, const Taxonomy& taxonomy);

}  // namespace puma
