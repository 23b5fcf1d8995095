#include "case_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "puma/annotations.hpp"
#include "puma/error.hpp"
#include "puma/mask_io.hpp"
#include "puma/report.hpp"

namespace puma::cli {

namespace {

// Matches "<stem><suffix>" and returns the stem.
std::optional<std::string> strip_suffix(const std::string& filename, const char* suffix) {
  const std::size_t n = std::string(suffix).size();
  if (filename.size() <= n || filename.compare(filename.size() - n, n, suffix) != 0)
    return std::nullopt;
  return filename.substr(0, filename.size() - n);
}

void scan_side(const fs::path& dir, bool is_gt, std::map<std::string, CaseFiles>& cases) {
  if (!fs::exists(dir)) fail(errc::invalid_config, "directory does not exist: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();

    auto assign = [&](const char* suffix, auto member) {
      const auto stem = strip_suffix(name, suffix);
      if (!stem) return false;
      CaseFiles& files = cases[*stem];
      files.case_id = *stem;
      files.*member = entry.path();
      return true;
    };

    if (is_gt) {
      if (assign(".tissue.png", &CaseFiles::gt_tissue)) continue;
      if (assign(".tissue.json", &CaseFiles::gt_tissue)) continue;
      if (assign(".nuclei.json", &CaseFiles::gt_nuclei)) continue;
      assign(".nuclei.png", &CaseFiles::gt_nuclei);
    } else {
      if (assign(".tissue.png", &CaseFiles::pred_tissue)) continue;
      if (assign(".tissue.json", &CaseFiles::pred_tissue)) continue;
      if (assign(".nuclei.json", &CaseFiles::pred_nuclei)) continue;
      assign(".nuclei.png", &CaseFiles::pred_nuclei);
    }
  }
}

}  // namespace

std::vector<CaseFiles> discover_cases(const fs::path& gt_dir, const fs::path& pred_dir) {
  std::map<std::string, CaseFiles> cases;  // sorted by case_id
  scan_side(gt_dir, true, cases);
  scan_side(pred_dir, false, cases);

  std::vector<CaseFiles> out;
  out.reserve(cases.size());
  for (auto& [_, files] : cases) out.push_back(std::move(files));
  return out;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(errc::io_error, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(errc::io_error, "short write to " + path.string());
}

LabelMask load_tissue_mask(const fs::path& path, const Taxonomy& taxonomy,
                           const std::string& case_id, int width, int height) {
  if (path.extension() == ".png") {
    LabelMask mask = read_mask_file(path);
    if (mask.width != width || mask.height != height)
      fail(errc::dimension_mismatch, path.string() + " is " + std::to_string(mask.width) + "x" +
                                         std::to_string(mask.height) + ", expected " +
                                         std::to_string(width) + "x" + std::to_string(height));
    return mask;
  }
  const AnnotationSet set = parse_annotation_file(read_text_file(path), taxonomy,
                                                  AnnotationLayer::tissue, case_id, width, height);
  return rasterize(set, taxonomy);
}

NucleiSet load_nuclei(const fs::path& path, const Taxonomy& taxonomy, const std::string& case_id,
                      int width, int height) {
  if (path.extension() == ".png") {
    const LabelMask mask = read_mask_file(path);
    NucleiSet set = centroids(connected_components(mask));
    set.case_id = case_id;
    return set;
  }
  const AnnotationSet set = parse_annotation_file(read_text_file(path), taxonomy,
                                                  AnnotationLayer::nuclei, case_id, width, height);
  return extract_nuclei(set, taxonomy);
}

namespace {

nlohmann::json expected_entry(const SynthExpected& expected, const Taxonomy& nuclei_tax,
                              const Taxonomy& tissue_tax) {
  nlohmann::json detection;
  for (std::size_t c = 0; c < expected.detection.per_class.size(); ++c) {
    const ClassDetectionCounts& counts = expected.detection.per_class[c];
    nlohmann::json entry;
    entry["tp"] = counts.tp;
    entry["fp"] = counts.fp;
    entry["fn"] = counts.fn;
    detection[nuclei_tax.class_name(static_cast<int>(c) + 1)] = std::move(entry);
  }
  nlohmann::json dice;
  for (std::size_t c = 0; c < expected.dice.size(); ++c) {
    dice[tissue_tax.class_name(static_cast<int>(c) + 1)] =
        expected.dice[c].has_value() ? nlohmann::json(format_value(*expected.dice[c]))
                                     : nlohmann::json(nullptr);
  }
  nlohmann::json out;
  out["detection"] = std::move(detection);
  out["dice"] = std::move(dice);
  return out;
}

}  // namespace

std::string write_expected_json(const std::vector<ExpectedCase>& cases,
                                const Taxonomy& nuclei_tax, const Taxonomy& tissue_tax,
                                double radius) {
  nlohmann::json doc;
  doc["radius"] = format_value(radius);

  nlohmann::json per_case;
  DetectionCounts pooled;
  pooled.per_class.assign(static_cast<std::size_t>(nuclei_tax.num_classes()),
                          ClassDetectionCounts{});
  for (const ExpectedCase& item : cases) {
    per_case[item.case_id] = expected_entry(item.expected, nuclei_tax, tissue_tax);
    for (std::size_t c = 0; c < item.expected.detection.per_class.size(); ++c) {
      pooled.per_class[c].tp += item.expected.detection.per_class[c].tp;
      pooled.per_class[c].fp += item.expected.detection.per_class[c].fp;
      pooled.per_class[c].fn += item.expected.detection.per_class[c].fn;
    }
  }
  doc["cases"] = std::move(per_case);

  nlohmann::json pooled_json;
  const DetectionSummary summary = detection_f1(pooled);
  for (std::size_t c = 0; c < pooled.per_class.size(); ++c) {
    nlohmann::json entry;
    entry["tp"] = pooled.per_class[c].tp;
    entry["fp"] = pooled.per_class[c].fp;
    entry["fn"] = pooled.per_class[c].fn;
    entry["f1"] = format_value(summary.per_class[c].f1);
    pooled_json[nuclei_tax.class_name(static_cast<int>(c) + 1)] = std::move(entry);
  }
  doc["pooled"] = std::move(pooled_json);
  doc["macro_f1"] = format_value(summary.macro_f1);
  return doc.dump(2) + "\n";
}

std::vector<RunnerCase> parse_runner_cases(const std::string& text) {
  std::vector<RunnerCase> cases;
  std::size_t line_start = 0;
  bool first_line = true;

  auto trim = [](std::string value) {
    const auto begin = value.find_first_not_of(" \t\r");
    const auto end = value.find_last_not_of(" \t\r");
    if (begin == std::string::npos) return std::string();
    return value.substr(begin, end - begin + 1);
  };

  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::string line = text.substr(line_start, line_end - line_start);
    line_start = line_end + 1;

    const std::size_t comma = line.find(',');
    RunnerCase item;
    item.case_id = trim(comma == std::string::npos ? line : line.substr(0, comma));
    if (comma != std::string::npos) item.input_image = trim(line.substr(comma + 1));

    const bool header = first_line && item.case_id == "case_id";
    first_line = false;
    if (header || item.case_id.empty()) continue;
    cases.push_back(std::move(item));
  }
  return cases;
}

std::string write_outcomes_json(const RunSummary& summary) {
  nlohmann::json outcomes = nlohmann::json::array();
  for (const CaseOutcome& outcome : summary.outcomes) {
    nlohmann::json entry;
    entry["case_id"] = outcome.case_id;
    entry["status"] = case_status_name(outcome.status);
    entry["exit_code"] = outcome.exit_code;
    entry["detail"] = outcome.detail;
    entry["stderr_tail"] = outcome.stderr_tail;
    outcomes.push_back(std::move(entry));
  }
  nlohmann::json doc;
  doc["outcomes"] = std::move(outcomes);
  doc["ok"] = summary.ok_count;
  doc["failed"] = summary.failed_count;
  return doc.dump(2) + "\n";
}

}  // namespace puma::cli
