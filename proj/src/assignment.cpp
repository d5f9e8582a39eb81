#include "deconfuse/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace deconfuse {

namespace {

// Padded-square costs: a forbidden pair must always lose against routing
// both endpoints to dummies, and any real pair must beat its two dummies.
constexpr double kBig = 1e9;
constexpr double kDummy = 10.0;

// Shortest-augmenting-path assignment on a dense square matrix, O(n^3).
// Returns col -> row (size n, all matched). Deterministic: rows processed in
// order, column ties broken toward the lowest index.
std::vector<int> square_assign(const std::vector<double>& a, int n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
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
    } while (j0);
  }
  std::vector<int> col_to_row(n);
  for (int j = 1; j <= n; ++j) col_to_row[j - 1] = p[j] - 1;
  return col_to_row;
}

}  // namespace

CostMatrix make_cost_matrix(std::vector<int> row_ids, std::vector<int> col_ids) {
  CostMatrix m;
  m.rows = std::move(row_ids);
  m.cols = std::move(col_ids);
  m.cost.assign(m.rows.size() * m.cols.size(), kForbidden);
  return m;
}

CostMatrix build_cost(const std::vector<Detection>& dets,
                      const std::vector<BBox>& predicted, double gate) {
  std::vector<int> row_ids(dets.size());
  std::vector<int> col_ids(predicted.size());
  for (std::size_t i = 0; i < dets.size(); ++i) row_ids[i] = static_cast<int>(i);
  for (std::size_t j = 0; j < predicted.size(); ++j) col_ids[j] = static_cast<int>(j);
  CostMatrix m = make_cost_matrix(std::move(row_ids), std::move(col_ids));
  for (std::size_t i = 0; i < dets.size(); ++i) {
    for (std::size_t j = 0; j < predicted.size(); ++j) {
      const double sim = loc_sim(dets[i], predicted[j]);
      m.at(i, j) = sim < gate ? kForbidden : 1.0 - sim;
    }
  }
  return m;
}

AssignmentSet solve(const CostMatrix& c) {
  AssignmentSet result;
  const int r = static_cast<int>(c.n_rows());
  const int m = static_cast<int>(c.n_cols());
  if (r == 0 || m == 0) return result;

  // Extend to (r+m) x (r+m): top-right and bottom-left blocks are per-side
  // dummies, bottom-right is free so leftover dummies can pair off.
  const int n = r + m;
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v;
      if (i < r && j < m) {
        const double e = c.at(i, j);
        v = std::isinf(e) ? kBig : e;
      } else if (i < r || j < m) {
        v = kDummy;
      } else {
        v = 0.0;
      }
      a[static_cast<std::size_t>(i) * n + j] = v;
    }
  }

  const std::vector<int> col_to_row = square_assign(a, n);
  std::vector<std::pair<int, int>> picked;
  for (int j = 0; j < m; ++j) {
    const int i = col_to_row[j];
    if (i >= 0 && i < r && !std::isinf(c.at(i, j))) picked.emplace_back(i, j);
  }
  std::sort(picked.begin(), picked.end());
  for (const auto& [i, j] : picked) result.add(c.rows[i], c.cols[j]);
  return result;
}

AssignmentSet solve_pinned(const CostMatrix& c, const AssignmentSet& pinned) {
  if (pinned.empty()) return solve(c);

  std::unordered_set<int> pinned_rows, pinned_cols;
  for (const auto& [det_id, track_id] : pinned.pairs()) {
    if (std::find(c.rows.begin(), c.rows.end(), det_id) == c.rows.end()) {
      throw std::invalid_argument("solve_pinned: unknown detection id " +
                                  std::to_string(det_id));
    }
    if (std::find(c.cols.begin(), c.cols.end(), track_id) == c.cols.end()) {
      throw std::invalid_argument("solve_pinned: unknown track id " +
                                  std::to_string(track_id));
    }
    pinned_rows.insert(det_id);
    pinned_cols.insert(track_id);
  }

  // Reduce to the unpinned rows/cols and solve those optimally.
  std::vector<int> keep_rows, keep_cols;
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    if (pinned_rows.count(c.rows[i]) == 0) keep_rows.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < c.cols.size(); ++j) {
    if (pinned_cols.count(c.cols[j]) == 0) keep_cols.push_back(static_cast<int>(j));
  }

  CostMatrix reduced;
  reduced.rows.reserve(keep_rows.size());
  reduced.cols.reserve(keep_cols.size());
  for (int i : keep_rows) reduced.rows.push_back(c.rows[i]);
  for (int j : keep_cols) reduced.cols.push_back(c.cols[j]);
  reduced.cost.resize(keep_rows.size() * keep_cols.size());
  for (std::size_t i = 0; i < keep_rows.size(); ++i) {
    for (std::size_t j = 0; j < keep_cols.size(); ++j) {
      reduced.at(i, j) = c.at(keep_rows[i], keep_cols[j]);
    }
  }

  AssignmentSet result;
  for (const auto& [det_id, track_id] : pinned.sorted_pairs()) {
    result.add(det_id, track_id);
  }
  for (const auto& [det_id, track_id] : solve(reduced).sorted_pairs()) {
    result.add(det_id, track_id);
  }
  return result;
}

}  // namespace deconfuse
