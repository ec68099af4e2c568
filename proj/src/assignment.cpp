#include "vcount/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vcount/error.hpp"
#include "vcount/geometry.hpp"

namespace vcount {
namespace {

struct Solution {
  Assignment pairs;
  std::size_t cardinality = 0;
  double cost = 0.0;
};

// Shortest-augmenting-path Hungarian method on an n x n matrix (n >= 1).
// Returns col_of_row.
std::vector<std::size_t> hungarian_square(const std::vector<double>& a, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = a[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
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
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<std::size_t> col_of_row(n);
  for (std::size_t j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

// Cardinality-first optimum: every un-gated cell is discounted by a bonus
// exceeding any achievable total cost, so extra pairs always dominate.
Solution solve_once(const CostMatrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  const std::size_t n = std::max(rows, cols);
  double bonus = 1.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double row_max = 0.0;
    for (std::size_t c = 0; c < cols; ++c)
      if (!m.gated(r, c)) row_max = std::max(row_max, m.cost(r, c));
    bonus += row_max;
  }
  bonus *= 2.0;

  std::vector<double> a(n * n, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (!m.gated(r, c)) a[r * n + c] = m.cost(r, c) - bonus;

  auto col_of_row = hungarian_square(a, n);
  Solution s;
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t c = col_of_row[r];
    if (c < cols && !m.gated(r, c)) {
      s.pairs.emplace_back(r, c);
      s.cost += m.cost(r, c);
    }
  }
  s.cardinality = s.pairs.size();
  return s;
}

bool same_optimum(const Solution& a, const Solution& b) {
  if (a.cardinality != b.cardinality) return false;
  return std::abs(a.cost - b.cost) <= 1e-9 * std::max(1.0, std::abs(a.cost));
}

// Restrict row r to column c only (and column c to row r only).
CostMatrix with_forced(const CostMatrix& m, std::size_t r, std::size_t c) {
  CostMatrix out = m;
  for (std::size_t j = 0; j < m.cols(); ++j)
    if (j != c) out.gate(r, j);
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (i != r) out.gate(i, c);
  return out;
}

CostMatrix with_row_unmatched(const CostMatrix& m, std::size_t r) {
  CostMatrix out = m;
  for (std::size_t j = 0; j < m.cols(); ++j) out.gate(r, j);
  return out;
}

}  // namespace

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), costs_(rows * cols, 0.0), gated_(rows * cols, false) {
  if (rows == 0 || cols == 0) throw ValidationError("cost matrix dimensions must be positive");
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> costs,
                       std::vector<bool> gated)
    : rows_(rows), cols_(cols), costs_(std::move(costs)), gated_(std::move(gated)) {
  if (rows == 0 || cols == 0) throw ValidationError("cost matrix dimensions must be positive");
  if (costs_.size() != rows * cols || gated_.size() != rows * cols)
    throw ValidationError("cost matrix storage does not match its dimensions");
  for (double c : costs_)
    if (!std::isfinite(c) || c < 0.0) throw ValidationError("costs must be finite and non-negative");
}

void CostMatrix::set(std::size_t r, std::size_t c, double cost, bool gated) {
  if (!std::isfinite(cost) || cost < 0.0)
    throw ValidationError("cost must be finite and non-negative, got " + std::to_string(cost));
  costs_[r * cols_ + c] = cost;
  gated_[r * cols_ + c] = gated;
}

CostMatrix CostMatrix::transposed() const {
  CostMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t.set(c, r, cost(r, c), gated(r, c));
  return t;
}

Assignment solve_assignment(const CostMatrix& m) {
  const Solution optimum = solve_once(m);
  if (optimum.cardinality == 0) return {};
  Solution best = optimum;

  // Canonicalize among equal optima: walk rows in order and pin each to the
  // smallest column (matched before unmatched) that still admits an optimum.
  CostMatrix constrained = m;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::size_t current = m.cols();
    for (const auto& [pr, pc] : best.pairs)
      if (pr == r) current = pc;

    for (std::size_t c = 0; c < current; ++c) {
      if (constrained.gated(r, c)) continue;
      Solution trial = solve_once(with_forced(constrained, r, c));
      bool uses_pair = std::find(trial.pairs.begin(), trial.pairs.end(), std::pair{r, c}) != trial.pairs.end();
      if (uses_pair && same_optimum(trial, optimum)) {
        best = std::move(trial);
        current = c;
        break;
      }
    }
    constrained = current < m.cols() ? with_forced(constrained, r, current)
                                     : with_row_unmatched(constrained, r);
  }
  std::sort(best.pairs.begin(), best.pairs.end());
  return best.pairs;
}

double assignment_cost(const CostMatrix& m, const Assignment& a) {
  double sum = 0.0;
  for (const auto& [r, c] : a) sum += m.cost(r, c);
  return sum;
}

CostMatrix iou_cost(const std::vector<BoundingBox>& tracks, const std::vector<BoundingBox>& dets,
                    double iou_min) {
  CostMatrix m(tracks.size(), dets.size());
  for (std::size_t r = 0; r < tracks.size(); ++r) {
    for (std::size_t c = 0; c < dets.size(); ++c) {
      double v = iou(tracks[r], dets[c]);
      m.set(r, c, 1.0 - v, v < iou_min);
    }
  }
  return m;
}

}  // namespace vcount
