#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "vcount/core.hpp"

namespace vcount {

// Dense rows x cols cost table with a per-cell gate (true = pair forbidden).
class CostMatrix {
public:
  CostMatrix(std::size_t rows, std::size_t cols);
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> costs, std::vector<bool> gated);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double cost(std::size_t r, std::size_t c) const noexcept { return costs_[r * cols_ + c]; }
  bool gated(std::size_t r, std::size_t c) const noexcept { return gated_[r * cols_ + c]; }

  // Costs must be finite and non-negative.
  void set(std::size_t r, std::size_t c, double cost, bool gated = false);
  void gate(std::size_t r, std::size_t c) noexcept { gated_[r * cols_ + c] = true; }

  CostMatrix transposed() const;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> costs_;
  std::vector<bool> gated_;
};

using Assignment = std::vector<std::pair<std::size_t, std::size_t>>;

// Minimum-cost matching among the maximum-cardinality matchings of the
// un-gated bipartite graph. Pairs are returned sorted by row. Among
// equal-cost optima the lexicographically smallest (row, col) sequence wins.
Assignment solve_assignment(const CostMatrix& m);

double assignment_cost(const CostMatrix& m, const Assignment& a);

// cost = 1 - IoU; gated when IoU < iou_min.
CostMatrix iou_cost(const std::vector<BoundingBox>& tracks, const std::vector<BoundingBox>& dets,
                    double iou_min);

}  // namespace vcount
