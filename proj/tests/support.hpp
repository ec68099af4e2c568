#pragma once

// Independent reference implementations and shared helpers for the unit
// tests and the acceptance runner.

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "vcount/assignment.hpp"
#include "vcount/core.hpp"
#include "vcount/geometry.hpp"
#include "vcount/synth.hpp"
#include "vcount/trackers.hpp"

namespace oracle {

// Intersection-over-union by summing per-unit-cell coverage.
double raster_iou(const vcount::BoundingBox& a, const vcount::BoundingBox& b);

struct BruteForceResult {
  std::size_t cardinality = 0;
  double cost = 0.0;
};

// Exhaustive search over column permutations of the padded square matrix:
// maximum matched (un-gated) pairs first, then minimum summed cost.
BruteForceResult brute_force_assignment(const vcount::CostMatrix& m);

// Winding number of `poly` around `p` (non-zero means inside).
int winding_number(vcount::Point p, const std::vector<vcount::Point>& poly);
double distance_to_boundary(vcount::Point p, const std::vector<vcount::Point>& poly);

// Plain-array Kalman filter written straight from the textbook equations:
// explicit matrix products, Gauss-Jordan inverse, P = (I - K H) P.
class DenseKalman {
public:
  using Vec = std::array<double, 7>;
  using Mat = std::array<std::array<double, 7>, 7>;

  DenseKalman(const vcount::BoundingBox& box, const vcount::KalmanConfig& cfg);

  void predict();
  void update(const vcount::BoundingBox& box);

  const Vec& mean() const { return x_; }
  const Mat& covariance() const { return p_; }

private:
  vcount::KalmanConfig cfg_;
  Vec x_{};
  Mat p_{};
};

}  // namespace oracle

namespace support {

// Uniformly random box with corners in [lo, hi].
vcount::BoundingBox random_box(std::mt19937_64& rng, double lo, double hi);

// Frame list from per-frame box lists (class car, given score).
std::vector<vcount::Frame> frames_of(const std::vector<std::vector<vcount::BoundingBox>>& boxes,
                                     double score = 0.9);

// Returns false when some frame has a detection absorbed twice.
bool run_with_exclusivity_audit(const vcount::TrackerParams& params, const std::vector<vcount::Frame>& frames,
                                std::vector<vcount::Track>* out = nullptr);

struct IdentityAudit {
  std::size_t identities = 0;  // ground-truth identities seen by some track
  std::size_t preserved = 0;   // ... followed by exactly one track id
  double rate() const { return identities ? static_cast<double>(preserved) / static_cast<double>(identities) : 1.0; }
};

// Per frame, measured track boxes are matched to ground-truth boxes
// (optimal, IoU >= 0.5); an identity is preserved when all its matches
// carry the same track id.
IdentityAudit identity_audit(const vcount::GroundTruth& gt, const std::vector<vcount::Track>& tracks);

// Noisy stream with isolated single-frame gaps: each object drops out for
// exactly one frame at a time, never twice in a row.
std::vector<vcount::Frame> gapped_stream(std::uint64_t seed, std::size_t frames, std::size_t objects);

}  // namespace support
