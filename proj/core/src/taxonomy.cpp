#include "puma/taxonomy.hpp"

#include <cctype>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "puma/error.hpp"

namespace puma {

std::string Taxonomy::normalize_name(std::string_view raw) {
  // lowercase, trim, collapse runs of whitespace to a single '_' so
  // "Blood Vessel" and "blood_vessel" resolve to the same class
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;

  std::string out;
  out.reserve(end - begin);
  bool pending_gap = false;
  for (std::size_t i = begin; i < end; ++i) {
    const unsigned char c = static_cast<unsigned char>(raw[i]);
    if (std::isspace(c)) {
      pending_gap = true;
      continue;
    }
    if (pending_gap) {
      out.push_back('_');
      pending_gap = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

Taxonomy::Taxonomy(std::string name, std::vector<std::string> class_names)
    : name_(std::move(name)) {
  if (class_names.empty()) fail(errc::invalid_config, "taxonomy '" + name_ + "' has no classes");
  if (class_names.size() > 255)
    fail(errc::index_out_of_range,
         "taxonomy '" + name_ + "' has " + std::to_string(class_names.size()) +
             " classes; masks are limited to 255");

  classes_.reserve(class_names.size());
  std::unordered_set<std::string> seen;
  for (auto& raw : class_names) {
    std::string normalized = normalize_name(raw);
    if (normalized.empty())
      fail(errc::invalid_config, "taxonomy '" + name_ + "' contains an empty class name");
    if (!seen.insert(normalized).second)
      fail(errc::invalid_config, "taxonomy '" + name_ + "' repeats class '" + normalized + "'");
    classes_.push_back(std::move(normalized));
  }
}

const std::string& Taxonomy::class_name(int index) const {
  if (!valid_index(index))
    fail(errc::index_out_of_range,
         "class index " + std::to_string(index) + " outside taxonomy '" + name_ + "'");
  return classes_[static_cast<std::size_t>(index) - 1];
}

std::optional<int> Taxonomy::find(std::string_view raw_name) const {
  const std::string normalized = normalize_name(raw_name);
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (classes_[i] == normalized) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

TaxonomyMapping::TaxonomyMapping(Taxonomy source, Taxonomy target,
                                 std::vector<int> target_of_source)
    : source_(std::move(source)), target_(std::move(target)),
      target_of_source_(std::move(target_of_source)) {
  if (static_cast<int>(target_of_source_.size()) != source_.num_classes())
    fail(errc::class_not_in_mapping,
         "mapping must cover every class of '" + source_.name() + "'");
  for (int t : target_of_source_) {
    if (!target_.valid_index(t))
      fail(errc::class_not_in_mapping,
           "mapped index " + std::to_string(t) + " outside taxonomy '" + target_.name() + "'");
  }
}

int TaxonomyMapping::map_index(int source_index) const {
  if (!source_.valid_index(source_index))
    fail(errc::class_not_in_mapping,
         "class index " + std::to_string(source_index) + " not in taxonomy '" + source_.name() +
             "'");
  return target_of_source_[static_cast<std::size_t>(source_index) - 1];
}

TaxonomyMapping TaxonomyMapping::identity(const Taxonomy& taxonomy) {
  std::vector<int> ident(static_cast<std::size_t>(taxonomy.num_classes()));
  for (int i = 0; i < taxonomy.num_classes(); ++i) ident[static_cast<std::size_t>(i)] = i + 1;
  return TaxonomyMapping(taxonomy, taxonomy, std::move(ident));
}

const Taxonomy& tissue_taxonomy() {
  static const Taxonomy tax("tissue",
                            {"tumor", "stroma", "necrosis", "epidermis", "blood_vessel"});
  return tax;
}

const Taxonomy& track1_taxonomy() {
  static const Taxonomy tax("track1", {"tumor", "tils", "other"});
  return tax;
}

const Taxonomy& track2_taxonomy() {
  static const Taxonomy tax("track2",
                            {"tumor", "lymphocytes", "plasma", "histiocytes", "neutrophils",
                             "stromal", "epithelium", "endothelium", "apoptotic"});
  return tax;
}

const TaxonomyMapping& track2_to_track1() {
  // tumor -> tumor; lymphocytes, plasma -> tils; the remaining six -> other
  static const TaxonomyMapping mapping(track2_taxonomy(), track1_taxonomy(),
                                       {1, 2, 2, 3, 3, 3, 3, 3, 3});
  return mapping;
}

Taxonomy taxonomy_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(errc::malformed_json, std::string("taxonomy: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("name") || !doc.contains("classes") ||
      !doc["classes"].is_array())
    fail(errc::malformed_json, "taxonomy JSON needs {\"name\": ..., \"classes\": [...]}");

  std::vector<std::string> classes;
  for (const auto& entry : doc["classes"]) {
    if (!entry.is_string()) fail(errc::malformed_json, "taxonomy class names must be strings");
    classes.push_back(entry.get<std::string>());
  }
  return Taxonomy(doc["name"].get<std::string>(), std::move(classes));
}

}  // namespace puma
