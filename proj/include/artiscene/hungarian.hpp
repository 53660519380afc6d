// artiscene - articulated 3D scene graphs from point trajectories
//
// Minimum-cost rectangular assignment (Hungarian algorithm with potentials).

#pragma once

#include <Eigen/Core>

#include <limits>
#include <vector>

#include "artiscene/errors.hpp"

namespace artiscene {

struct Assignment {
  /// row_to_col[i] is the column of row i, or -1 when row i is unassigned
  /// (only when rows outnumber columns).
  std::vector<int> row_to_col;
  double cost = 0.0;
};

namespace detail {

// Rows <= cols. Classic O(n^2 m) shortest augmenting path with potentials;
// rows are inserted in index order and ties resolve toward the lowest column.
inline std::vector<int> hungarian_rows_le_cols(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace detail

/// Minimum-cost assignment of min(n, m) rows to distinct columns. Costs must
/// be finite.
inline Assignment hungarian(const Eigen::MatrixXd& cost) {
  if (!cost.allFinite()) fail(ErrorKind::kInvalidArgument, "hungarian: non-finite cost");
  Assignment out;
  out.row_to_col.assign(static_cast<std::size_t>(cost.rows()), -1);
  if (cost.rows() == 0 || cost.cols() == 0) return out;
  if (cost.rows() <= cost.cols()) {
    out.row_to_col = detail::hungarian_rows_le_cols(cost);
  } else {
    const std::vector<int> col_to_row = detail::hungarian_rows_le_cols(cost.transpose());
    for (std::size_t j = 0; j < col_to_row.size(); ++j) out.row_to_col[col_to_row[j]] = static_cast<int>(j);
  }
  for (std::size_t i = 0; i < out.row_to_col.size(); ++i) {
    if (out.row_to_col[i] >= 0) out.cost += cost(static_cast<Eigen::Index>(i), out.row_to_col[i]);
  }
  return out;
}

}  // namespace artiscene
