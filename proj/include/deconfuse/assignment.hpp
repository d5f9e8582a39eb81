#ifndef DECONFUSE_ASSIGNMENT_HPP_
#define DECONFUSE_ASSIGNMENT_HPP_

#include <limits>
#include <vector>

#include "deconfuse/core.hpp"

namespace deconfuse {

// Sentinel for gated-out pairs. Such a pair is never part of a solution.
inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

// Rectangular cost matrix over detection ids (rows) and track ids (cols).
// Finite entries live in [0,1]; kForbidden marks gated-out pairs.
struct CostMatrix {
  std::vector<int> rows;  // detection ids
  std::vector<int> cols;  // track ids
  std::vector<double> cost;  // row-major, rows.size() x cols.size()

  double at(std::size_t i, std::size_t j) const {
    return cost[i * cols.size() + j];
  }
  double& at(std::size_t i, std::size_t j) { return cost[i * cols.size() + j]; }
  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return cols.size(); }
};

CostMatrix make_cost_matrix(std::vector<int> row_ids, std::vector<int> col_ids);

// Cost = 1 - LocSim(det, predicted); entries with LocSim < gate are forbidden.
// Row ids are detection indices 0..n-1, column ids track indices 0..m-1.
CostMatrix build_cost(const std::vector<Detection>& dets,
                      const std::vector<BBox>& predicted, double gate);

// Minimum-cost bipartite matching maximizing cardinality first. Forbidden
// pairs are never selected; ties resolved deterministically by scan order.
AssignmentSet solve(const CostMatrix& c);

// Like solve, but the result is forced to contain every pinned pair; the
// remaining rows/cols are matched optimally on the reduced matrix.
// Throws std::invalid_argument if a pin references an unknown row/col.
AssignmentSet solve_pinned(const CostMatrix& c, const AssignmentSet& pinned);

}  // namespace deconfuse

#endif  // DECONFUSE_ASSIGNMENT_HPP_
