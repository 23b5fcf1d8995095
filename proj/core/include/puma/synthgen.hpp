#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "puma/annotations.hpp"
#include "puma/metrics.hpp"

namespace puma {

struct Perturbation {
  int drop_count = 0;      // ground-truth nuclei missing from the prediction
  int spurious_count = 0;  // extra predicted nuclei far from everything
  double jitter_sigma = 0.0;
  int tissue_erosion = 0;  // pixels shaved off each side of predicted regions
};

/// Recipe for one synthetic GT/prediction pair with analytically known
/// metrics. Nuclei are placed on a grid whose spacing exceeds twice the
/// matching radius and jitter is clamped below the radius, so the expected
/// tp/fp/fn are exact by construction, not probabilistic.
struct SynthSpec {
  std::uint64_t seed = 0;
  int width = 512;
  int height = 512;
  std::vector<int> nuclei_per_class;          // [i] = count for class i+1
  std::vector<int> tissue_regions_per_class;  // [i] = rectangles for class i+1
  Perturbation perturb;
  double matching_radius = 15.0;
};

struct SynthExpected {
  DetectionCounts detection;                // exact
  std::vector<std::optional<double>> dice;  // exact per tissue class
  double radius = 15.0;                     // the radius the guarantees hold for
};

struct SynthCase {
  std::string case_id;
  AnnotationSet gt_nuclei;
  AnnotationSet gt_tissue;
  AnnotationSet pred_nuclei;
  AnnotationSet pred_tissue;
  SynthExpected expected;
};

/// Deterministic in (spec, taxonomies, case_id). Ground-truth nuclei are
/// 4x4-pixel squares; predictions alternate square and point features so both
/// geometries are exercised. Throws canvas_too_small when the separation
/// constraint cannot be met.
SynthCase generate_case(const SynthSpec& spec, const Taxonomy& nuclei_tax,
                        const Taxonomy& tissue_tax, const std::string& case_id);

/// Write <case>.nuclei.json / <case>.tissue.json under gt_dir and pred_dir.
void write_case(const SynthCase& synth, const Taxonomy& nuclei_tax, const Taxonomy& tissue_tax,
                const std::filesystem::path& gt_dir, const std::filesystem::path& pred_dir);

}  // namespace puma
