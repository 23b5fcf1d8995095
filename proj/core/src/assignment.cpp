#include "puma/assignment.hpp"

#include <limits>

#include "puma/error.hpp"

namespace puma {

// Shortest-augmenting-path formulation with row/column potentials. Rows are
// inserted in index order and every scan runs in index order, so the result
// is a pure function of the cost matrix.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != n)
      fail(errc::dimension_mismatch, "assignment cost matrix must be square");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> row_of_col(static_cast<std::size_t>(n) + 1, 0);  // 1-based, 0 = free
  std::vector<int> prev_col(static_cast<std::size_t>(n) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    int j0 = 0;
    std::vector<double> min_reduced(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<char> visited(static_cast<std::size_t>(n) + 1, 0);

    do {
      visited[static_cast<std::size_t>(j0)] = 1;
      const int i0 = row_of_col[static_cast<std::size_t>(j0)];
      double delta = kInf;
      int j1 = 0;

      for (int j = 1; j <= n; ++j) {
        if (visited[static_cast<std::size_t>(j)]) continue;
        const double reduced = cost[static_cast<std::size_t>(i0) - 1][static_cast<std::size_t>(j) - 1] -
                               u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (reduced < min_reduced[static_cast<std::size_t>(j)]) {
          min_reduced[static_cast<std::size_t>(j)] = reduced;
          prev_col[static_cast<std::size_t>(j)] = j0;
        }
        if (min_reduced[static_cast<std::size_t>(j)] < delta) {
          delta = min_reduced[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }

      for (int j = 0; j <= n; ++j) {
        if (visited[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(row_of_col[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          min_reduced[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[static_cast<std::size_t>(j0)] != 0);

    // walk the augmenting path back to the root
    while (j0 != 0) {
      const int j1 = prev_col[static_cast<std::size_t>(j0)];
      row_of_col[static_cast<std::size_t>(j0)] = row_of_col[static_cast<std::size_t>(j1)];
      j0 = j1;
    }
  }

  std::vector<int> col_of_row(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (row_of_col[static_cast<std::size_t>(j)] != 0)
      col_of_row[static_cast<std::size_t>(row_of_col[static_cast<std::size_t>(j)]) - 1] = j - 1;
  return col_of_row;
}

}  // namespace puma
