#include "puma/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "puma/error.hpp"

namespace puma {

namespace {

using nlohmann::json;

const char* dice_aggregation_name(DiceAggregation mode) {
  return mode == DiceAggregation::pooled ? "pooled" : "per_image_mean";
}

const char* absent_policy_name(AbsentPolicy policy) {
  return policy == AbsentPolicy::skip ? "skip" : "score_one";
}

json metric_json(double value) {
  json out;
  out["value"] = format_value(value);
  out["display"] = format_display(value);
  return out;
}

json nuclei_section_json(const NucleiSection& section) {
  json classes = json::array();
  for (const NucleiClassRow& row : section.classes) {
    json entry;
    entry["name"] = row.name;
    entry["f1"] = format_value(row.f1);
    entry["display"] = format_display(row.f1);
    entry["precision"] = format_value(row.precision);
    entry["recall"] = format_value(row.recall);
    entry["tp"] = row.counts.tp;
    entry["fp"] = row.counts.fp;
    entry["fn"] = row.counts.fn;
    classes.push_back(std::move(entry));
  }
  json out;
  out["classes"] = std::move(classes);
  out["macro_f1"] = metric_json(section.macro_f1);
  return out;
}

double parse_value(const json& node, const char* what) {
  if (!node.is_string()) fail(errc::malformed_json, std::string("report: ") + what + " must be a fixed-format string");
  return std::strtod(node.get_ref<const std::string&>().c_str(), nullptr);
}

NucleiSection nuclei_section_from_json(const json& node) {
  NucleiSection section;
  for (const auto& entry : node.at("classes")) {
    NucleiClassRow row;
    row.name = entry.at("name").get<std::string>();
    row.f1 = parse_value(entry.at("f1"), "f1");
    row.precision = parse_value(entry.at("precision"), "precision");
    row.recall = parse_value(entry.at("recall"), "recall");
    row.counts.tp = entry.at("tp").get<std::uint64_t>();
    row.counts.fp = entry.at("fp").get<std::uint64_t>();
    row.counts.fn = entry.at("fn").get<std::uint64_t>();
    section.classes.push_back(std::move(row));
  }
  section.macro_f1 = parse_value(node.at("macro_f1").at("value"), "macro_f1");
  return section;
}

NucleiSection make_nuclei_section(const DetectionSummary& summary, const Taxonomy& taxonomy) {
  if (summary.per_class.size() != static_cast<std::size_t>(taxonomy.num_classes()))
    fail(errc::taxonomy_mismatch, "detection summary does not match taxonomy '" +
                                      taxonomy.name() + "'");
  NucleiSection section;
  section.classes.reserve(summary.per_class.size());
  for (std::size_t i = 0; i < summary.per_class.size(); ++i) {
    const ClassDetectionScores& scores = summary.per_class[i];
    NucleiClassRow row;
    row.name = taxonomy.class_name(static_cast<int>(i) + 1);
    row.counts = scores.counts;
    row.precision = round6(scores.precision);
    row.recall = round6(scores.recall);
    row.f1 = round6(scores.f1);
    section.classes.push_back(std::move(row));
  }
  section.macro_f1 = round6(summary.macro_f1);
  return section;
}

std::string csv_field(const std::optional<double>& value, bool display) {
  if (!value.has_value()) return "";
  return display ? format_display(*value) : format_value(*value);
}

void table_row(std::ostringstream& out, const std::string& name, const std::string& a,
               const std::string& b = "", const std::string& c = "", const std::string& d = "",
               const std::string& e = "", const std::string& f = "") {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "  %-14s %8s %10s %8s %7s %7s %7s\n", name.c_str(), a.c_str(),
                b.c_str(), c.c_str(), d.c_str(), e.c_str(), f.c_str());
  out << buf;
}

}  // namespace

const char* track_name(Track track) { return track == Track::track1 ? "track1" : "track2"; }

double round6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%#.6g", x);
  return std::strtod(buf, nullptr);
}

std::string format_value(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%#.6g", x);
  return buf;
}

std::string format_display(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", x);
  return buf;
}

ChallengeReport build_report(Track track, const std::optional<DiceSummary>& tissue,
                             const std::optional<DetectionSummary>& nuclei,
                             const Taxonomy& tissue_tax, const Taxonomy& nuclei_tax,
                             const TaxonomyMapping* supercategory_mapping,
                             const ReportConfig& config) {
  ChallengeReport report;
  report.track = track;
  report.config = config;
  report.config.radius = round6(config.radius);

  if (tissue.has_value()) {
    if (tissue->per_class.size() != static_cast<std::size_t>(tissue_tax.num_classes()))
      fail(errc::taxonomy_mismatch, "dice summary does not match taxonomy '" +
                                        tissue_tax.name() + "'");
    TissueSection section;
    section.classes.reserve(tissue->per_class.size());
    for (std::size_t i = 0; i < tissue->per_class.size(); ++i) {
      TissueClassRow row;
      row.name = tissue_tax.class_name(static_cast<int>(i) + 1);
      if (tissue->per_class[i].has_value()) row.dice = round6(*tissue->per_class[i]);
      section.classes.push_back(std::move(row));
    }
    section.macro = round6(tissue->macro);
    report.tissue = std::move(section);
  }

  if (nuclei.has_value()) {
    report.nuclei = make_nuclei_section(*nuclei, nuclei_tax);

    if (supercategory_mapping != nullptr) {
      if (!(supercategory_mapping->source() == nuclei_tax))
        fail(errc::taxonomy_mismatch,
             "supercategory mapping source is '" + supercategory_mapping->source().name() +
                 "', nuclei taxonomy is '" + nuclei_tax.name() + "'");
      // re-pool tp/fp/fn through the mapping rather than averaging F1 values
      DetectionCounts pooled;
      pooled.per_class.assign(
          static_cast<std::size_t>(supercategory_mapping->target().num_classes()),
          ClassDetectionCounts{});
      for (std::size_t i = 0; i < nuclei->per_class.size(); ++i) {
        const int target = supercategory_mapping->map_index(static_cast<int>(i) + 1);
        ClassDetectionCounts& bucket = pooled.per_class[static_cast<std::size_t>(target) - 1];
        bucket.tp += nuclei->per_class[i].counts.tp;
        bucket.fp += nuclei->per_class[i].counts.fp;
        bucket.fn += nuclei->per_class[i].counts.fn;
      }
      report.supercategory_view =
          make_nuclei_section(detection_f1(pooled), supercategory_mapping->target());
    }
  }

  return report;
}

std::string render_report(const ChallengeReport& report, ReportFormat format) {
  if (format == ReportFormat::json) {
    json doc;
    doc["track"] = track_name(report.track);

    json config;
    config["radius"] = format_value(report.config.radius);
    config["strategy"] = match_strategy_name(report.config.strategy);
    config["dice_aggregation"] = dice_aggregation_name(report.config.dice_aggregation);
    config["absent_policy"] = absent_policy_name(report.config.absent_policy);
    config["seed"] = report.config.seed;
    config["case_count"] = report.config.case_count;
    doc["config"] = std::move(config);

    if (report.tissue.has_value()) {
      json classes = json::array();
      for (const TissueClassRow& row : report.tissue->classes) {
        json entry;
        entry["name"] = row.name;
        entry["dice"] = row.dice.has_value() ? json(format_value(*row.dice)) : json(nullptr);
        entry["display"] = row.dice.has_value() ? json(format_display(*row.dice)) : json(nullptr);
        classes.push_back(std::move(entry));
      }
      json section;
      section["classes"] = std::move(classes);
      section["macro_dice"] = metric_json(report.tissue->macro);
      doc["tissue"] = std::move(section);
    }
    if (report.nuclei.has_value()) doc["nuclei"] = nuclei_section_json(*report.nuclei);
    if (report.supercategory_view.has_value())
      doc["supercategory_view"] = nuclei_section_json(*report.supercategory_view);

    return doc.dump(2) + "\n";
  }

  if (format == ReportFormat::csv) {
    std::ostringstream out;
    out << "section,class,metric,value,display,precision,recall,tp,fp,fn\n";
    if (report.tissue.has_value()) {
      for (const TissueClassRow& row : report.tissue->classes)
        out << "tissue," << row.name << ",dice," << csv_field(row.dice, false) << ','
            << csv_field(row.dice, true) << ",,,,,\n";
      out << "tissue,average,dice," << format_value(report.tissue->macro) << ','
          << format_display(report.tissue->macro) << ",,,,,\n";
    }
    if (report.nuclei.has_value()) {
      for (const NucleiClassRow& row : report.nuclei->classes)
        out << "nuclei," << row.name << ",f1," << format_value(row.f1) << ','
            << format_display(row.f1) << ',' << format_value(row.precision) << ','
            << format_value(row.recall) << ',' << row.counts.tp << ',' << row.counts.fp << ','
            << row.counts.fn << "\n";
      out << "nuclei,average,f1," << format_value(report.nuclei->macro_f1) << ','
          << format_display(report.nuclei->macro_f1) << ",,,,,\n";
    }
    return out.str();
  }

  // aligned text table
  std::ostringstream out;
  out << track_name(report.track) << " evaluation (" << report.config.case_count << " cases)\n";
  out << "config: radius=" << format_value(report.config.radius)
      << " strategy=" << match_strategy_name(report.config.strategy)
      << " dice=" << dice_aggregation_name(report.config.dice_aggregation)
      << " absent=" << absent_policy_name(report.config.absent_policy)
      << " seed=" << report.config.seed << "\n";

  if (report.tissue.has_value()) {
    out << "\ntissue (dice)\n";
    table_row(out, "class", "dice");
    for (const TissueClassRow& row : report.tissue->classes)
      table_row(out, row.name, row.dice.has_value() ? format_display(*row.dice) : "-");
    table_row(out, "average", format_display(report.tissue->macro));
  }

  auto nuclei_table = [&](const char* title, const NucleiSection& section) {
    out << "\n" << title << " (f1)\n";
    table_row(out, "class", "f1", "precision", "recall", "tp", "fp", "fn");
    for (const NucleiClassRow& row : section.classes)
      table_row(out, row.name, format_display(row.f1), format_display(row.precision),
                format_display(row.recall), std::to_string(row.counts.tp),
                std::to_string(row.counts.fp), std::to_string(row.counts.fn));
    table_row(out, "average", format_display(section.macro_f1));
  };
  if (report.nuclei.has_value()) nuclei_table("nuclei", *report.nuclei);
  if (report.supercategory_view.has_value())
    nuclei_table("supercategories", *report.supercategory_view);

  return out.str();
}

ChallengeReport parse_report_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(errc::malformed_json, std::string("report: ") + e.what());
  }

  ChallengeReport report;
  try {
    const std::string track = doc.at("track").get<std::string>();
    if (track == "track1") {
      report.track = Track::track1;
    } else if (track == "track2") {
      report.track = Track::track2;
    } else {
      fail(errc::malformed_json, "report: unknown track '" + track + "'");
    }

    const json& config = doc.at("config");
    report.config.radius = parse_value(config.at("radius"), "radius");
    const std::string strategy = config.at("strategy").get<std::string>();
    if (strategy == "optimal") {
      report.config.strategy = MatchStrategy::optimal;
    } else if (strategy == "greedy") {
      report.config.strategy = MatchStrategy::greedy;
    } else {
      fail(errc::malformed_json, "report: unknown strategy '" + strategy + "'");
    }
    const std::string aggregation = config.at("dice_aggregation").get<std::string>();
    if (aggregation == "pooled") {
      report.config.dice_aggregation = DiceAggregation::pooled;
    } else if (aggregation == "per_image_mean") {
      report.config.dice_aggregation = DiceAggregation::per_image_mean;
    } else {
      fail(errc::malformed_json, "report: unknown dice aggregation '" + aggregation + "'");
    }
    const std::string absent = config.at("absent_policy").get<std::string>();
    if (absent == "skip") {
      report.config.absent_policy = AbsentPolicy::skip;
    } else if (absent == "score_one") {
      report.config.absent_policy = AbsentPolicy::score_one;
    } else {
      fail(errc::malformed_json, "report: unknown absent policy '" + absent + "'");
    }
    report.config.seed = config.at("seed").get<std::uint64_t>();
    report.config.case_count = config.at("case_count").get<int>();

    if (doc.contains("tissue")) {
      TissueSection section;
      for (const auto& entry : doc.at("tissue").at("classes")) {
        TissueClassRow row;
        row.name = entry.at("name").get<std::string>();
        if (!entry.at("dice").is_null()) row.dice = parse_value(entry.at("dice"), "dice");
        section.classes.push_back(std::move(row));
      }
      section.macro = parse_value(doc.at("tissue").at("macro_dice").at("value"), "macro_dice");
      report.tissue = std::move(section);
    }
    if (doc.contains("nuclei")) report.nuclei = nuclei_section_from_json(doc.at("nuclei"));
    if (doc.contains("supercategory_view"))
      report.supercategory_view = nuclei_section_from_json(doc.at("supercategory_view"));
  } catch (const json::exception& e) {
    fail(errc::malformed_json, std::string("report: ") + e.what());
  }
  return report;
}

}  // namespace puma
