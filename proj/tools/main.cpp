// pumaeval: evaluation harness for panoptic histopathology challenges
// (per-class tissue Dice, per-class nuclei detection F1, deterministic
// splits, masked cross-entropy reference, external-inference orchestration).

#include <atomic>
#include <cstdio>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "case_io.hpp"
#include "puma/annotations.hpp"
#include "puma/error.hpp"
#include "puma/loss.hpp"
#include "puma/mask_io.hpp"
#include "puma/report.hpp"
#include "puma/rng.hpp"
#include "puma/splits.hpp"
#include "puma/synthgen.hpp"

namespace {

using namespace puma;
using cli::fs::path;

constexpr int kExitOk = 0;
constexpr int kExitCaseFailures = 1;
constexpr int kExitUsage = 2;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    cli::write_text_file(out_path, text);
  }
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string piece = text.substr(start, comma - start);
    start = comma + 1;
    if (piece.empty()) continue;
    try {
      values.push_back(std::stoi(piece));
    } catch (const std::exception&) {
      fail(errc::invalid_config, std::string(what) + ": '" + piece + "' is not an integer");
    }
  }
  if (values.empty()) fail(errc::invalid_config, std::string(what) + ": empty list");
  return values;
}

// ---------------------------------------------------------------------------
// shared evaluation options

struct EvalFlags {
  std::string gt_dir;
  std::string pred_dir;
  int track = 1;
  std::string nuclei_taxonomy_file;
  std::string tissue_taxonomy_file;
  double radius = 15.0;
  std::string strategy = "optimal";
  std::string dice_aggregation = "pooled";
  std::string absent_policy = "skip";
  int width = 1024;
  int height = 1024;
  int jobs = 0;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out = "-";
};

void add_common_eval_options(CLI::App* cmd, EvalFlags& flags, bool nuclei_opts, bool tissue_opts,
                             bool dirs_required = true) {
  if (dirs_required) {
    cmd->add_option("--gt-dir", flags.gt_dir, "Ground-truth directory")->required();
    cmd->add_option("--pred-dir", flags.pred_dir, "Prediction directory")->required();
  }
  cmd->add_option("--track", flags.track, "Nuclei track: 1 (coarse) or 2 (fine)")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  cmd->add_option("--width", flags.width, "Case width in pixels")->capture_default_str();
  cmd->add_option("--height", flags.height, "Case height in pixels")->capture_default_str();
  cmd->add_option("--jobs", flags.jobs,
                  "Parallel per-case workers (default: available processors)")
      ->envname("PUMAEVAL_JOBS");
  cmd->add_option("--seed", flags.seed, "Seed echoed into the report")->capture_default_str();
  cmd->add_option("--format", flags.format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "table"}))
      ->capture_default_str();
  cmd->add_option("--out", flags.out, "Report destination ('-' = stdout)")
      ->capture_default_str();
  if (nuclei_opts) {
    cmd->add_option("--radius", flags.radius, "Matching radius in pixels")
        ->envname("PUMAEVAL_RADIUS")
        ->capture_default_str();
    cmd->add_option("--strategy", flags.strategy, "Matching strategy")
        ->check(CLI::IsMember({"optimal", "greedy"}))
        ->capture_default_str();
    cmd->add_option("--nuclei-taxonomy", flags.nuclei_taxonomy_file,
                    "Custom nuclei taxonomy JSON (overrides --track)");
  }
  if (tissue_opts) {
    cmd->add_option("--dice-aggregation", flags.dice_aggregation, "Dice aggregation mode")
        ->check(CLI::IsMember({"pooled", "per_image_mean"}))
        ->capture_default_str();
    cmd->add_option("--absent-policy", flags.absent_policy,
                    "Classes absent from both masks: skip or score_one")
        ->check(CLI::IsMember({"skip", "score_one"}))
        ->capture_default_str();
    cmd->add_option("--tissue-taxonomy", flags.tissue_taxonomy_file,
                    "Custom tissue taxonomy JSON");
  }
}

struct EvalSettings {
  Track track = Track::track1;
  Taxonomy nuclei_tax;
  Taxonomy tissue_tax;
  bool supercategory = false;  // builtin fine taxonomy: re-pool through the default mapping
  double radius = 15.0;
  MatchStrategy strategy = MatchStrategy::optimal;
  DiceAggregation dice_aggregation = DiceAggregation::pooled;
  AbsentPolicy absent_policy = AbsentPolicy::skip;
  int width = 1024;
  int height = 1024;
  int jobs = 1;
  std::uint64_t seed = 0;
};

EvalSettings resolve_settings(const EvalFlags& flags) {
  EvalSettings settings{.track = flags.track == 2 ? Track::track2 : Track::track1,
                        .nuclei_tax = flags.track == 2 ? track2_taxonomy() : track1_taxonomy(),
                        .tissue_tax = tissue_taxonomy()};
  if (!flags.nuclei_taxonomy_file.empty())
    settings.nuclei_tax = taxonomy_from_json(cli::read_text_file(flags.nuclei_taxonomy_file));
  if (!flags.tissue_taxonomy_file.empty())
    settings.tissue_tax = taxonomy_from_json(cli::read_text_file(flags.tissue_taxonomy_file));
  settings.supercategory =
      settings.track == Track::track2 && settings.nuclei_tax == track2_taxonomy();

  settings.radius = flags.radius;
  settings.strategy = flags.strategy == "greedy" ? MatchStrategy::greedy : MatchStrategy::optimal;
  settings.dice_aggregation = flags.dice_aggregation == "per_image_mean"
                                  ? DiceAggregation::per_image_mean
                                  : DiceAggregation::pooled;
  settings.absent_policy =
      flags.absent_policy == "score_one" ? AbsentPolicy::score_one : AbsentPolicy::skip;
  settings.width = flags.width;
  settings.height = flags.height;
  settings.jobs =
      flags.jobs > 0 ? flags.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  settings.seed = flags.seed;
  return settings;
}

ReportConfig config_echo(const EvalSettings& settings, int case_count) {
  ReportConfig config;
  config.radius = settings.radius;
  config.strategy = settings.strategy;
  config.dice_aggregation = settings.dice_aggregation;
  config.absent_policy = settings.absent_policy;
  config.seed = settings.seed;
  config.case_count = case_count;
  return config;
}

// ---------------------------------------------------------------------------
// directory evaluation

struct CaseMetrics {
  std::optional<DiceCounts> dice;
  std::vector<MatchResult> matches;
  std::string failure;  // non-empty = case skipped
};

struct EvalResult {
  ChallengeReport report;
  std::vector<std::string> failures;
  int evaluated = 0;
  bool report_valid = false;
};

EvalResult fold_cases(std::vector<CaseMetrics>&& per_case, const EvalSettings& settings,
                      bool do_tissue, bool do_nuclei) {
  EvalResult result;
  std::vector<DiceCounts> dice_cases;
  std::vector<MatchResult> all_matches;
  for (const CaseMetrics& slot : per_case) {
    if (!slot.failure.empty()) {
      result.failures.push_back(slot.failure);
      continue;
    }
    ++result.evaluated;
    if (slot.dice.has_value()) dice_cases.push_back(*slot.dice);
    all_matches.insert(all_matches.end(), slot.matches.begin(), slot.matches.end());
  }
  if (result.evaluated == 0) return result;

  std::optional<DiceSummary> tissue;
  if (do_tissue && !dice_cases.empty())
    tissue = aggregate_dice(dice_cases, settings.dice_aggregation, settings.absent_policy);
  std::optional<DetectionSummary> nuclei;
  if (do_nuclei) nuclei = detection_f1(all_matches, settings.nuclei_tax);

  result.report = build_report(settings.track, tissue, nuclei, settings.tissue_tax,
                               settings.nuclei_tax,
                               settings.supercategory ? &track2_to_track1() : nullptr,
                               config_echo(settings, result.evaluated));
  result.report_valid = true;
  return result;
}

EvalResult evaluate_cases(const std::vector<cli::CaseFiles>& cases, const EvalSettings& settings,
                          bool do_tissue, bool do_nuclei) {
  std::vector<CaseMetrics> per_case(cases.size());

  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= cases.size()) return;
      const cli::CaseFiles& files = cases[i];
      CaseMetrics& slot = per_case[i];
      try {
        if (do_tissue) {
          if (!files.gt_tissue || !files.pred_tissue) {
            slot.failure = files.case_id + ": missing tissue file on " +
                           (files.gt_tissue ? "prediction" : "ground-truth") + " side";
            continue;
          }
          const LabelMask gt =
              cli::load_tissue_mask(*files.gt_tissue, settings.tissue_tax, files.case_id,
                                    settings.width, settings.height);
          const LabelMask pred =
              cli::load_tissue_mask(*files.pred_tissue, settings.tissue_tax, files.case_id,
                                    settings.width, settings.height);
          slot.dice = dice_counts(pred, gt, settings.tissue_tax);
        }
        if (do_nuclei) {
          if (!files.gt_nuclei || !files.pred_nuclei) {
            slot.failure = files.case_id + ": missing nuclei file on " +
                           (files.gt_nuclei ? "prediction" : "ground-truth") + " side";
            slot.dice.reset();
            continue;
          }
          const NucleiSet gt = cli::load_nuclei(*files.gt_nuclei, settings.nuclei_tax,
                                                files.case_id, settings.width, settings.height);
          const NucleiSet pred = cli::load_nuclei(*files.pred_nuclei, settings.nuclei_tax,
                                                  files.case_id, settings.width, settings.height);
          slot.matches =
              match_nuclei(pred, gt, settings.nuclei_tax, settings.radius, settings.strategy);
        }
      } catch (const std::exception& e) {
        slot.failure = files.case_id + ": " + e.what();
        slot.dice.reset();
        slot.matches.clear();
      }
    }
  };

  const int thread_count =
      std::min<int>(settings.jobs, static_cast<int>(std::max<std::size_t>(cases.size(), 1)));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(thread_count));
  for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  return fold_cases(std::move(per_case), settings, do_tissue, do_nuclei);
}

ReportFormat format_from_string(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "table") return ReportFormat::table;
  return ReportFormat::json;
}

int finish_eval(const EvalResult& result, const EvalFlags& flags) {
  for (const std::string& failure : result.failures)
    std::cerr << "case failure: " << failure << "\n";
  if (!result.report_valid) {
    std::cerr << "no cases evaluated\n";
    return result.failures.empty() ? kExitUsage : kExitCaseFailures;
  }
  emit(render_report(result.report, format_from_string(flags.format)), flags.out);
  return result.failures.empty() ? kExitOk : kExitCaseFailures;
}

int cmd_eval(const EvalFlags& flags, bool do_tissue, bool do_nuclei) {
  const EvalSettings settings = resolve_settings(flags);
  const auto cases = cli::discover_cases(flags.gt_dir, flags.pred_dir);
  return finish_eval(evaluate_cases(cases, settings, do_tissue, do_nuclei), flags);
}

// ---------------------------------------------------------------------------
// rasterize / map-taxonomy

struct RasterizeFlags {
  std::string input;
  std::string out;
  std::string layer = "tissue";
  int track = 1;
  std::string taxonomy_file;
  std::string case_id;
  int width = 1024;
  int height = 1024;
};

int cmd_rasterize(const RasterizeFlags& flags) {
  const AnnotationLayer layer =
      flags.layer == "nuclei" ? AnnotationLayer::nuclei : AnnotationLayer::tissue;
  Taxonomy taxonomy = layer == AnnotationLayer::tissue
                          ? tissue_taxonomy()
                          : (flags.track == 2 ? track2_taxonomy() : track1_taxonomy());
  if (!flags.taxonomy_file.empty())
    taxonomy = taxonomy_from_json(cli::read_text_file(flags.taxonomy_file));

  const std::string case_id =
      flags.case_id.empty() ? path(flags.input).stem().string() : flags.case_id;
  const AnnotationSet set = parse_annotation_file(cli::read_text_file(flags.input), taxonomy,
                                                  layer, case_id, flags.width, flags.height);
  write_mask_file(rasterize(set, taxonomy), flags.out);
  return kExitOk;
}

struct MapFlags {
  std::string input;
  std::string out = "-";
  std::string case_id;
  int width = 1024;
  int height = 1024;
};

int cmd_map_taxonomy(const MapFlags& flags) {
  const std::string case_id =
      flags.case_id.empty() ? path(flags.input).stem().string() : flags.case_id;
  const AnnotationSet fine =
      parse_annotation_file(cli::read_text_file(flags.input), track2_taxonomy(),
                            AnnotationLayer::nuclei, case_id, flags.width, flags.height);
  const AnnotationSet coarse = map_taxonomy(fine, track2_to_track1());
  emit(write_annotation_file(coarse, track1_taxonomy()), flags.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// split

struct SplitFlags {
  std::string manifest;
  std::string sizes = "154,26,26";
  std::uint64_t seed = 0;
  bool stratified = false;
  std::string out = "-";
};

int cmd_split(const SplitFlags& flags) {
  const std::vector<int> sizes = parse_int_list(flags.sizes, "--sizes");
  if (sizes.size() != 3)
    fail(errc::invalid_config, "--sizes needs exactly three values (train,validation,test)");
  const auto manifest = parse_manifest(cli::read_text_file(flags.manifest));
  const Split split = split_dataset(manifest, SplitSizes{sizes[0], sizes[1], sizes[2]},
                                    flags.seed, flags.stratified);
  emit(write_split_json(split), flags.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// loss-check

struct LossFlags {
  std::string input;
  double step = 1e-4;
};

int cmd_loss_check(const LossFlags& flags) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(cli::read_text_file(flags.input));
  } catch (const nlohmann::json::parse_error& e) {
    fail(errc::malformed_json, std::string("loss fixture: ") + e.what());
  }

  LogitField logits;
  MaskedTarget target;
  try {
    logits.width = doc.at("width").get<int>();
    logits.height = doc.at("height").get<int>();
    logits.num_classes = doc.at("num_classes").get<int>();
    logits.values = doc.at("logits").get<std::vector<double>>();
    target.width = logits.width;
    target.height = logits.height;
    target.labels = doc.at("labels").get<std::vector<int>>();
    for (const auto& entry : doc.at("mask"))
      target.mask.push_back(entry.is_boolean() ? (entry.get<bool>() ? 1 : 0)
                                               : (entry.get<int>() != 0 ? 1 : 0));
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_json, std::string("loss fixture: ") + e.what());
  }

  const LossResult result = masked_cross_entropy(logits, target);
  const double fd_error = finite_difference_check(logits, target, flags.step);
  char line[128];
  std::snprintf(line, sizeof(line), "loss %.9g\n", result.loss);
  std::cout << line;
  std::cout << "annotated_count " << result.annotated_count << "\n";
  std::snprintf(line, sizeof(line), "max_fd_error %.3g\n", fd_error);
  std::cout << line;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthFlags {
  std::string out_dir;
  int cases = 1;
  std::uint64_t seed = 0;
  int width = 512;
  int height = 512;
  std::string nuclei_per_class = "6,5,4";
  std::string tissue_regions = "2,2,1,1,1";
  int drop = 0;
  int spurious = 0;
  double jitter = 0.0;
  int erosion = 0;
  int track = 1;
  double radius = 15.0;
};

int cmd_synth(const SynthFlags& flags) {
  const Taxonomy& nuclei_tax = flags.track == 2 ? track2_taxonomy() : track1_taxonomy();
  const Taxonomy& tissue_tax = tissue_taxonomy();

  SynthSpec spec;
  spec.width = flags.width;
  spec.height = flags.height;
  spec.nuclei_per_class = parse_int_list(flags.nuclei_per_class, "--nuclei-per-class");
  spec.tissue_regions_per_class = parse_int_list(flags.tissue_regions, "--tissue-regions");
  spec.perturb.drop_count = flags.drop;
  spec.perturb.spurious_count = flags.spurious;
  spec.perturb.jitter_sigma = flags.jitter;
  spec.perturb.tissue_erosion = flags.erosion;
  spec.matching_radius = flags.radius;

  const path root(flags.out_dir);
  SplitMix64 seeds(flags.seed);
  std::vector<cli::ExpectedCase> expected;
  std::string manifest = "case_id,width,height\n";

  for (int i = 0; i < flags.cases; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%03d", i);
    spec.seed = seeds.next();
    const SynthCase synth = generate_case(spec, nuclei_tax, tissue_tax, name);
    write_case(synth, nuclei_tax, tissue_tax, root / "gt", root / "pred");
    expected.push_back(cli::ExpectedCase{synth.case_id, synth.expected});
    manifest += synth.case_id + "," + std::to_string(spec.width) + "," +
                std::to_string(spec.height) + "\n";
  }

  cli::write_text_file(root / "manifest.csv", manifest);
  cli::write_text_file(root / "expected.json",
                       cli::write_expected_json(expected, nuclei_tax, tissue_tax, flags.radius));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// run (external inference + optional evaluation)

struct RunFlags {
  std::string cases_file;
  std::string command;
  double timeout = 600.0;
  int max_parallel = 1;
  std::string work_dir;
  std::string gt_dir;
  bool skip_tissue = false;
  bool skip_nuclei = false;
  std::string outcomes_out;
  EvalFlags eval;
};

int cmd_run(const RunFlags& flags) {
  const EvalSettings settings = resolve_settings(flags.eval);

  RunnerConfig config;
  config.command_template = flags.command;
  config.timeout_seconds = flags.timeout;
  config.max_parallel = flags.max_parallel;
  config.expect_tissue = !flags.skip_tissue;
  config.expect_nuclei = !flags.skip_nuclei;
  config.work_dir = flags.work_dir;
  config.case_width = settings.width;
  config.case_height = settings.height;

  const auto cases = cli::parse_runner_cases(cli::read_text_file(flags.cases_file));
  const RunSummary summary = run_dataset(config, cases, settings.nuclei_tax);

  for (const CaseOutcome& outcome : summary.outcomes) {
    if (outcome.status == CaseStatus::ok) continue;
    std::cerr << "case " << outcome.case_id << ": " << case_status_name(outcome.status);
    if (!outcome.detail.empty()) std::cerr << " (" << outcome.detail << ")";
    std::cerr << "\n";
  }
  if (!flags.outcomes_out.empty())
    cli::write_text_file(flags.outcomes_out, cli::write_outcomes_json(summary));

  if (flags.gt_dir.empty())
    return summary.failed_count == 0 ? kExitOk : kExitCaseFailures;

  // evaluate the ok cases against ground truth
  std::vector<CaseMetrics> per_case(summary.outcomes.size());
  for (std::size_t i = 0; i < summary.outcomes.size(); ++i) {
    const CaseOutcome& outcome = summary.outcomes[i];
    CaseMetrics& slot = per_case[i];
    if (outcome.status != CaseStatus::ok) {
      slot.failure = outcome.case_id + ": " + case_status_name(outcome.status);
      continue;
    }
    try {
      if (config.expect_tissue) {
        const path gt_png = path(flags.gt_dir) / (outcome.case_id + ".tissue.png");
        const path gt_json = path(flags.gt_dir) / (outcome.case_id + ".tissue.json");
        const path gt_path = cli::fs::exists(gt_png) ? gt_png : gt_json;
        const LabelMask gt = cli::load_tissue_mask(gt_path, settings.tissue_tax, outcome.case_id,
                                                   settings.width, settings.height);
        slot.dice = dice_counts(*outcome.tissue, gt, settings.tissue_tax);
      }
      if (config.expect_nuclei) {
        const path gt_json = path(flags.gt_dir) / (outcome.case_id + ".nuclei.json");
        const path gt_png = path(flags.gt_dir) / (outcome.case_id + ".nuclei.png");
        const path gt_path = cli::fs::exists(gt_json) ? gt_json : gt_png;
        const NucleiSet gt = cli::load_nuclei(gt_path, settings.nuclei_tax, outcome.case_id,
                                              settings.width, settings.height);
        slot.matches = match_nuclei(*outcome.nuclei, gt, settings.nuclei_tax, settings.radius,
                                    settings.strategy);
      }
    } catch (const std::exception& e) {
      slot.failure = outcome.case_id + ": " + e.what();
      slot.dice.reset();
      slot.matches.clear();
    }
  }

  return finish_eval(
      fold_cases(std::move(per_case), settings, config.expect_tissue, config.expect_nuclei),
      flags.eval);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evaluation harness for panoptic histopathology (tissue Dice + nuclei "
               "detection F1)"};
  app.require_subcommand(1);

  EvalFlags eval_flags;
  RasterizeFlags raster_flags;
  MapFlags map_flags;
  SplitFlags split_flags;
  LossFlags loss_flags;
  SynthFlags synth_flags;
  RunFlags run_flags;

  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Evaluate tissue and nuclei predictions and build the full report");
  add_common_eval_options(eval_cmd, eval_flags, true, true);

  CLI::App* tissue_cmd =
      app.add_subcommand("eval-tissue", "Evaluate tissue segmentation (per-class Dice)");
  add_common_eval_options(tissue_cmd, eval_flags, false, true);

  CLI::App* nuclei_cmd =
      app.add_subcommand("eval-nuclei", "Evaluate nuclei detection (per-class F1)");
  add_common_eval_options(nuclei_cmd, eval_flags, true, false);

  CLI::App* raster_cmd =
      app.add_subcommand("rasterize", "Rasterize an annotation JSON into an indexed mask PNG");
  raster_cmd->add_option("--input", raster_flags.input, "Annotation JSON")->required();
  raster_cmd->add_option("--out", raster_flags.out, "Output PNG path")->required();
  raster_cmd->add_option("--layer", raster_flags.layer, "Annotation layer")
      ->check(CLI::IsMember({"tissue", "nuclei"}))
      ->capture_default_str();
  raster_cmd->add_option("--track", raster_flags.track, "Nuclei track (for --layer nuclei)")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  raster_cmd->add_option("--taxonomy", raster_flags.taxonomy_file, "Custom taxonomy JSON");
  raster_cmd->add_option("--case-id", raster_flags.case_id, "Case id (default: file stem)");
  raster_cmd->add_option("--width", raster_flags.width, "Mask width")->capture_default_str();
  raster_cmd->add_option("--height", raster_flags.height, "Mask height")->capture_default_str();

  CLI::App* map_cmd = app.add_subcommand(
      "map-taxonomy", "Relabel fine-track nuclei annotations to the coarse track");
  map_cmd->add_option("--input", map_flags.input, "Fine-track annotation JSON")->required();
  map_cmd->add_option("--out", map_flags.out, "Output path ('-' = stdout)")
      ->capture_default_str();
  map_cmd->add_option("--case-id", map_flags.case_id, "Case id (default: file stem)");
  map_cmd->add_option("--width", map_flags.width, "Case width")->capture_default_str();
  map_cmd->add_option("--height", map_flags.height, "Case height")->capture_default_str();

  CLI::App* split_cmd =
      app.add_subcommand("split", "Deterministically split a case manifest");
  split_cmd->add_option("--manifest", split_flags.manifest, "CSV manifest (case_id[,stratum])")
      ->required();
  split_cmd->add_option("--sizes", split_flags.sizes, "train,validation,test sizes")
      ->capture_default_str();
  split_cmd->add_option("--seed", split_flags.seed, "Shuffle seed")->capture_default_str();
  split_cmd->add_flag("--stratified", split_flags.stratified,
                      "Allocate proportionally within each stratum");
  split_cmd->add_option("--out", split_flags.out, "Output path ('-' = stdout)")
      ->capture_default_str();

  CLI::App* loss_cmd = app.add_subcommand(
      "loss-check", "Evaluate the masked cross-entropy reference on a JSON tensor fixture");
  loss_cmd->add_option("--input", loss_flags.input, "Fixture JSON")->required();
  loss_cmd->add_option("--step", loss_flags.step, "Finite-difference step")
      ->capture_default_str();

  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "Generate synthetic GT/prediction pairs with known expected metrics");
  synth_cmd->add_option("--out-dir", synth_flags.out_dir, "Output directory")->required();
  synth_cmd->add_option("--cases", synth_flags.cases, "Number of cases")->capture_default_str();
  synth_cmd->add_option("--seed", synth_flags.seed, "Base seed")->capture_default_str();
  synth_cmd->add_option("--width", synth_flags.width, "Canvas width")->capture_default_str();
  synth_cmd->add_option("--height", synth_flags.height, "Canvas height")->capture_default_str();
  synth_cmd->add_option("--nuclei-per-class", synth_flags.nuclei_per_class,
                        "Comma list of nuclei counts per class")
      ->capture_default_str();
  synth_cmd->add_option("--tissue-regions", synth_flags.tissue_regions,
                        "Comma list of tissue region counts per class")
      ->capture_default_str();
  synth_cmd->add_option("--drop", synth_flags.drop, "Nuclei missing from the prediction")
      ->capture_default_str();
  synth_cmd->add_option("--spurious", synth_flags.spurious, "Extra predicted nuclei")
      ->capture_default_str();
  synth_cmd->add_option("--jitter", synth_flags.jitter, "Prediction jitter sigma (pixels)")
      ->capture_default_str();
  synth_cmd->add_option("--erosion", synth_flags.erosion,
                        "Pixels shaved off each side of predicted tissue")
      ->capture_default_str();
  synth_cmd->add_option("--track", synth_flags.track, "Nuclei track")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  synth_cmd->add_option("--radius", synth_flags.radius,
                        "Matching radius the separation guarantee targets")
      ->capture_default_str();

  CLI::App* run_cmd = app.add_subcommand(
      "run", "Run an external inference command per case, then evaluate the outputs");
  run_cmd->add_option("--cases", run_flags.cases_file, "CSV of case_id,input_image")->required();
  run_cmd->add_option("--command", run_flags.command,
                      "Command template with {input_image} {output_dir} {case_id}")
      ->required();
  run_cmd->add_option("--timeout", run_flags.timeout, "Per-case timeout in seconds")
      ->capture_default_str();
  run_cmd->add_option("--max-parallel", run_flags.max_parallel, "Concurrent cases")
      ->capture_default_str();
  run_cmd->add_option("--work-dir", run_flags.work_dir, "Directory for per-case output dirs")
      ->required();
  run_cmd->add_option("--gt-dir", run_flags.gt_dir,
                      "Ground-truth directory (omit to only orchestrate)");
  run_cmd->add_flag("--skip-tissue", run_flags.skip_tissue, "Do not expect tissue.png");
  run_cmd->add_flag("--skip-nuclei", run_flags.skip_nuclei, "Do not expect nuclei.json");
  run_cmd->add_option("--outcomes", run_flags.outcomes_out, "Write outcome summary JSON here");
  add_common_eval_options(run_cmd, run_flags.eval, true, true, /*dirs_required=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (eval_cmd->parsed()) return cmd_eval(eval_flags, true, true);
    if (tissue_cmd->parsed()) return cmd_eval(eval_flags, true, false);
    if (nuclei_cmd->parsed()) return cmd_eval(eval_flags, false, true);
    if (raster_cmd->parsed()) return cmd_rasterize(raster_flags);
    if (map_cmd->parsed()) return cmd_map_taxonomy(map_flags);
    if (split_cmd->parsed()) return cmd_split(split_flags);
    if (loss_cmd->parsed()) return cmd_loss_check(loss_flags);
    if (synth_cmd->parsed()) return cmd_synth(synth_flags);
    if (run_cmd->parsed()) return cmd_run(run_flags);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
