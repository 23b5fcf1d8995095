#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "puma/raster.hpp"
#include "puma/taxonomy.hpp"

namespace puma {

/// External-inference contract (see docs/runner-contract.md): the command
/// template is rendered per case with {input_image}, {output_dir} and
/// {case_id}, run through /bin/sh in a fresh output directory, and expected
/// to leave tissue.png and/or nuclei.json there on exit code 0.
struct RunnerConfig {
  std::string command_template;
  double timeout_seconds = 600.0;
  int max_parallel = 1;
  bool expect_tissue = true;
  bool expect_nuclei = true;
  std::filesystem::path work_dir;  // per-case output dirs are created beneath
  int case_width = 1024;
  int case_height = 1024;
};

struct RunnerCase {
  std::string case_id;
  std::filesystem::path input_image;
};

enum class CaseStatus { ok, nonzero_exit, timeout, missing_output, parse_error };

const char* case_status_name(CaseStatus status);

/// Model failures never throw; they land here as a status. Outputs are
/// present iff status == ok.
struct CaseOutcome {
  std::string case_id;
  CaseStatus status = CaseStatus::ok;
  std::optional<LabelMask> tissue;
  std::optional<NucleiSet> nuclei;
  int exit_code = 0;
  std::string stderr_tail;  // last 4 KiB of the child's stderr
  std::string detail;
  double wall_seconds = 0.0;
};

/// Run one case: substitute placeholders, execute with the timeout, then
/// parse the expected outputs. Only configuration errors (a template missing
/// {input_image} or {output_dir}) throw.
CaseOutcome run_case(const RunnerConfig& config, const RunnerCase& item,
                     const Taxonomy& nuclei_taxonomy);

struct RunSummary {
  std::vector<CaseOutcome> outcomes;  // ordered exactly like the input cases
  int ok_count = 0;
  int failed_count = 0;
  double total_wall_seconds = 0.0;
};

/// Run up to max_parallel cases concurrently. A failing case never prevents
/// the others from completing, and the outcome order is the input order
/// regardless of completion order.
RunSummary run_dataset(const RunnerConfig& config, const std::vector<RunnerCase>& cases,
                       const Taxonomy& nuclei_taxonomy);

}  // namespace puma
