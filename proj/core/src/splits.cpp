#include "puma/splits.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "puma/error.hpp"
#include "puma/rng.hpp"

namespace puma {

namespace {

constexpr int kSplitCount = 3;

// Per-stratum allocation: floor the proportional quotas, hand the remaining
// cases to the largest fractional remainders (ties toward train < validation
// < test), then repair column sums by moving single cases between splits
// while every allocation stays within [floor(quota), ceil(quota)]. That keeps
// each stratum within one case of exact proportionality.
std::vector<std::array<int, kSplitCount>> allocate_stratified(
    const std::vector<int>& stratum_sizes, const SplitSizes& sizes) {
  const int total = sizes.total();
  const std::array<int, kSplitCount> targets{sizes.train, sizes.validation, sizes.test};
  const std::size_t strata = stratum_sizes.size();

  std::vector<std::array<int, kSplitCount>> alloc(strata);
  std::vector<std::array<double, kSplitCount>> quota(strata);

  for (std::size_t s = 0; s < strata; ++s) {
    int assigned = 0;
    std::array<double, kSplitCount> fractional{};
    for (int k = 0; k < kSplitCount; ++k) {
      quota[s][k] = static_cast<double>(stratum_sizes[s]) * targets[k] / total;
      alloc[s][k] = static_cast<int>(std::floor(quota[s][k]));
      fractional[k] = quota[s][k] - alloc[s][k];
      assigned += alloc[s][k];
    }
    int remainder = stratum_sizes[s] - assigned;
    std::array<int, kSplitCount> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fractional[a] > fractional[b]; });
    for (int r = 0; r < remainder; ++r) ++alloc[s][order[static_cast<std::size_t>(r)]];
  }

  auto column_sum = [&](int k) {
    int sum = 0;
    for (std::size_t s = 0; s < strata; ++s) sum += alloc[s][k];
    return sum;
  };

  // move surplus cases toward deficit splits, one at a time
  bool progress = true;
  while (progress) {
    int over = -1, under = -1;
    for (int k = 0; k < kSplitCount; ++k) {
      const int sum = column_sum(k);
      if (sum > targets[k] && over < 0) over = k;
      if (sum < targets[k] && under < 0) under = k;
    }
    if (over < 0 && under < 0) break;
    progress = false;
    for (std::size_t s = 0; s < strata && !progress; ++s) {
      if (alloc[s][over] > static_cast<int>(std::floor(quota[s][over])) &&
          alloc[s][under] < static_cast<int>(std::ceil(quota[s][under]))) {
        --alloc[s][over];
        ++alloc[s][under];
        progress = true;
      }
    }
    if (!progress)
      fail(errc::stratum_too_small,
           "stratified allocation cannot meet the requested sizes within one case per stratum");
  }
  return alloc;
}

}  // namespace

Split split_dataset(const std::vector<CaseRecord>& manifest, SplitSizes sizes,
                    std::uint64_t seed, bool stratified) {
  if (sizes.train < 0 || sizes.validation < 0 || sizes.test < 0 ||
      sizes.total() != static_cast<int>(manifest.size()))
    fail(errc::sizes_do_not_sum,
         "sizes " + std::to_string(sizes.train) + "+" + std::to_string(sizes.validation) + "+" +
             std::to_string(sizes.test) + " do not sum to the manifest size " +
             std::to_string(manifest.size()));

  {
    std::unordered_set<std::string> seen;
    for (const CaseRecord& record : manifest)
      if (!seen.insert(record.case_id).second)
        fail(errc::duplicate_case_id, "case '" + record.case_id + "' appears twice");
  }

  Split split;
  split.seed = seed;
  if (manifest.empty()) return split;

  // filesystem enumeration order is not stable, so order by case_id first
  std::vector<CaseRecord> ordered = manifest;
  std::sort(ordered.begin(), ordered.end(),
            [](const CaseRecord& a, const CaseRecord& b) { return a.case_id < b.case_id; });

  // std::map iteration gives a stable stratum order
  std::map<std::string, std::vector<std::string>> strata;
  if (stratified) {
    for (const CaseRecord& record : ordered) strata[record.stratum].push_back(record.case_id);
  } else {
    auto& all = strata[""];
    all.reserve(ordered.size());
    for (const CaseRecord& record : ordered) all.push_back(record.case_id);
  }

  std::vector<int> stratum_sizes;
  stratum_sizes.reserve(strata.size());
  for (const auto& [_, ids] : strata) stratum_sizes.push_back(static_cast<int>(ids.size()));

  std::vector<std::array<int, kSplitCount>> alloc;
  if (stratified) {
    alloc = allocate_stratified(stratum_sizes, sizes);
  } else {
    alloc = {{sizes.train, sizes.validation, sizes.test}};
  }

  SplitMix64 rng(seed);

  std::size_t s = 0;
  for (auto& [_, ids] : strata) {
    fisher_yates_shuffle(ids, rng);
    const auto& a = alloc[s++];
    std::size_t cursor = 0;
    for (int i = 0; i < a[0]; ++i) split.train.push_back(ids[cursor++]);
    for (int i = 0; i < a[1]; ++i) split.validation.push_back(ids[cursor++]);
    for (int i = 0; i < a[2]; ++i) split.test.push_back(ids[cursor++]);
  }
  return split;
}

std::vector<CaseRecord> parse_manifest(const std::string& text) {
  std::vector<CaseRecord> records;
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
    CaseRecord record;
    record.case_id = trim(comma == std::string::npos ? line : line.substr(0, comma));
    if (comma != std::string::npos) record.stratum = trim(line.substr(comma + 1));

    const bool header = first_line && record.case_id == "case_id";
    first_line = false;
    if (header || record.case_id.empty()) continue;
    records.push_back(std::move(record));
  }
  return records;
}

std::string write_split_json(const Split& split) {
  nlohmann::json doc;
  doc["seed"] = split.seed;
  doc["train"] = split.train;
  doc["validation"] = split.validation;
  doc["test"] = split.test;
  return doc.dump(2) + "\n";
}

Split parse_split_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(errc::malformed_json, std::string("split: ") + e.what());
  }
  Split split;
  try {
    split.seed = doc.at("seed").get<std::uint64_t>();
    split.train = doc.at("train").get<std::vector<std::string>>();
    split.validation = doc.at("validation").get<std::vector<std::string>>();
    split.test = doc.at("test").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_json, std::string("split: ") + e.what());
  }
  return split;
}

}  // namespace puma
