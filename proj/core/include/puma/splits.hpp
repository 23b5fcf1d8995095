#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace puma {

struct CaseRecord {
  std::string case_id;
  std::string stratum;  // empty when unstratified
};

struct SplitSizes {
  int train = 0;
  int validation = 0;
  int test = 0;

  int total() const { return train + validation + test; }
};

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
};

/// Deterministic partition of the manifest into train/validation/test.
///
/// Cases are sorted by case_id (input order must not matter), shuffled with a
/// splitmix64-driven Fisher-Yates pass (see puma/rng.hpp) and sliced. In
/// stratified mode each stratum is shuffled and allocated proportionally to
/// the requested sizes with largest-remainder rounding, so every stratum's
/// allocation stays within one case of exact proportionality.
///
/// Throws sizes_do_not_sum, duplicate_case_id, stratum_too_small.
Split split_dataset(const std::vector<CaseRecord>& manifest, SplitSizes sizes,
                    std::uint64_t seed, bool stratified);

/// Manifest text: one `case_id[,stratum]` per line; a `case_id,stratum`
/// header line and blank lines are skipped.
std::vector<CaseRecord> parse_manifest(const std::string& text);

std::string write_split_json(const Split& split);
Split parse_split_json(const std::string& text);

}  // namespace puma
