#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "puma/metrics.hpp"
#include "puma/taxonomy.hpp"

namespace puma {

enum class Track { track1, track2 };

const char* track_name(Track track);

/// Every report carries the parameters that produced it; the numbers are not
/// interpretable without them.
struct ReportConfig {
  double radius = 15.0;
  MatchStrategy strategy = MatchStrategy::optimal;
  DiceAggregation dice_aggregation = DiceAggregation::pooled;
  AbsentPolicy absent_policy = AbsentPolicy::skip;
  std::uint64_t seed = 0;
  int case_count = 0;
};

struct TissueClassRow {
  std::string name;
  std::optional<double> dice;  // nullopt: no support anywhere under skip policy
};

struct TissueSection {
  std::vector<TissueClassRow> classes;  // taxonomy order
  double macro = 0.0;
};

struct NucleiClassRow {
  std::string name;
  ClassDetectionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct NucleiSection {
  std::vector<NucleiClassRow> classes;  // taxonomy order
  double macro_f1 = 0.0;
};

/// Challenge-style result sheet. All stored values are canonically rounded to
/// 6 significant digits (round6); rendering adds a 3-decimal display form.
struct ChallengeReport {
  Track track = Track::track1;
  std::optional<TissueSection> tissue;
  std::optional<NucleiSection> nuclei;
  std::optional<NucleiSection> supercategory_view;  // fine classes re-pooled coarse
  ReportConfig config;
};

/// Nearest double to the 6-significant-digit decimal form of x. Stored report
/// values pass through this, so render/parse round-trips are exact.
double round6(double x);

/// Fixed canonical forms: "%#.6g" (6 significant digits, trailing zeros kept)
/// and "%.3f" for display.
std::string format_value(double x);
std::string format_display(double x);

/// Assemble a report. Sections are optional so tissue-only or nuclei-only
/// evaluations produce the same shape. When a mapping is given, nuclei
/// tp/fp/fn are re-pooled through it into the supercategory view (the mapping
/// source must match the nuclei taxonomy). Throws taxonomy_mismatch.
ChallengeReport build_report(Track track, const std::optional<DiceSummary>& tissue,
                             const std::optional<DetectionSummary>& nuclei,
                             const Taxonomy& tissue_tax, const Taxonomy& nuclei_tax,
                             const TaxonomyMapping* supercategory_mapping,
                             const ReportConfig& config);

enum class ReportFormat { json, csv, table };

/// json: canonical (sorted keys, fixed number formatting, byte-stable).
/// csv: one row per class plus one average row per section.
/// table: aligned human-readable text.
std::string render_report(const ChallengeReport& report, ReportFormat format);

/// Rebuild a report from its canonical JSON rendering (exact round-trip).
ChallengeReport parse_report_json(const std::string& text);

}  // namespace puma
