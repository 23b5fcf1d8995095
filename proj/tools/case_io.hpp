#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "puma/metrics.hpp"
#include "puma/raster.hpp"
#include "puma/runner.hpp"
#include "puma/synthgen.hpp"
#include "puma/taxonomy.hpp"

namespace puma::cli {

namespace fs = std::filesystem;

/// Per-case file locations. Cases are keyed by filename stem: the harness
/// recognizes <case_id>.tissue.png / <case_id>.tissue.json and
/// <case_id>.nuclei.json / <case_id>.nuclei.png.
struct CaseFiles {
  std::string case_id;
  std::optional<fs::path> gt_tissue;
  std::optional<fs::path> pred_tissue;
  std::optional<fs::path> gt_nuclei;
  std::optional<fs::path> pred_nuclei;
};

/// Union of case ids found on either side, sorted by case_id.
std::vector<CaseFiles> discover_cases(const fs::path& gt_dir, const fs::path& pred_dir);

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

/// Mask PNG or annotation JSON (rasterized on the fly).
LabelMask load_tissue_mask(const fs::path& path, const Taxonomy& taxonomy,
                           const std::string& case_id, int width, int height);

/// Annotation JSON (points pass through, polygons reduce to component
/// centroids) or nuclei mask PNG (components to centroids).
NucleiSet load_nuclei(const fs::path& path, const Taxonomy& taxonomy,
                      const std::string& case_id, int width, int height);

/// Expected-values sidecar written by `synth` (canonical JSON).
struct ExpectedCase {
  std::string case_id;
  SynthExpected expected;
};

std::string write_expected_json(const std::vector<ExpectedCase>& cases,
                                const Taxonomy& nuclei_tax, const Taxonomy& tissue_tax,
                                double radius);

/// `case_id,input_image` lines, header and blanks skipped.
std::vector<RunnerCase> parse_runner_cases(const std::string& text);

/// Canonical JSON summary of runner outcomes (statuses, exit codes, stderr
/// tails); parsed outputs are not included.
std::string write_outcomes_json(const RunSummary& summary);

}  // namespace puma::cli
