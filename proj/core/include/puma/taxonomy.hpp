#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace puma {

/// Ordered class list. Indices are 1-based and contiguous; index 0 is always
/// background and never part of the list. Names are normalized (lowercase,
/// trimmed, inner whitespace collapsed to '_') at construction and must be
/// unique. At most 255 classes so label masks fit an 8-bit palette.
class Taxonomy {
public:
  Taxonomy(std::string name, std::vector<std::string> class_names);

  const std::string& name() const { return name_; }
  int num_classes() const { return static_cast<int>(classes_.size()); }
  bool valid_index(int index) const { return index >= 1 && index <= num_classes(); }

  /// Normalized name of a class; index must be in [1, num_classes()].
  const std::string& class_name(int index) const;
  const std::vector<std::string>& class_names() const { return classes_; }

  /// Case-insensitive, whitespace-tolerant lookup. Returns the 1-based index.
  std::optional<int> find(std::string_view raw_name) const;

  static std::string normalize_name(std::string_view raw);

  friend bool operator==(const Taxonomy& a, const Taxonomy& b) {
    return a.name_ == b.name_ && a.classes_ == b.classes_;
  }

private:
  std::string name_;
  std::vector<std::string> classes_;  // classes_[i] holds class index i+1
};

/// Total map from every source class index to a target class index.
class TaxonomyMapping {
public:
  TaxonomyMapping(Taxonomy source, Taxonomy target, std::vector<int> target_of_source);

  const Taxonomy& source() const { return source_; }
  const Taxonomy& target() const { return target_; }

  /// Throws class_not_in_mapping for indices outside the source taxonomy.
  int map_index(int source_index) const;

  static TaxonomyMapping identity(const Taxonomy& taxonomy);

private:
  Taxonomy source_;
  Taxonomy target_;
  std::vector<int> target_of_source_;  // position i maps source index i+1
};

/// Built-in taxonomies: tissue (tumor, stroma, necrosis, epidermis,
/// blood_vessel), the coarse 3-class nuclei track and the fine 9-class track.
const Taxonomy& tissue_taxonomy();
const Taxonomy& track1_taxonomy();
const Taxonomy& track2_taxonomy();

/// Default fine-to-coarse nuclei mapping: tumor->tumor, {lymphocytes,
/// plasma}->tils, everything else->other.
const TaxonomyMapping& track2_to_track1();

/// Parse a user-supplied taxonomy: {"name": "...", "classes": ["...", ...]}.
/// Class indices are implied by list position (first entry = index 1).
Taxonomy taxonomy_from_json(const std::string& text);

}  // namespace puma
