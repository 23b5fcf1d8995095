#pragma once

#include <vector>

namespace puma {

/// Minimum-cost assignment on a square cost matrix (Jonker-Volgenant style
/// shortest augmenting paths, O(n^3)). Returns the column assigned to each
/// row. Deterministic: identical input yields identical output.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace puma
