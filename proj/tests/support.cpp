#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace oracle {

using vcount::BoundingBox;

double raster_iou(const BoundingBox& a, const BoundingBox& b) {
  auto overlap = [](double lo1, double hi1, double lo2, double hi2) {
    return std::max(0.0, std::min(hi1, hi2) - std::max(lo1, lo2));
  };
  const int x0 = static_cast<int>(std::floor(std::min(a.x_min, b.x_min)));
  const int x1 = static_cast<int>(std::ceil(std::max(a.x_max, b.x_max)));
  const int y0 = static_cast<int>(std::floor(std::min(a.y_min, b.y_min)));
  const int y1 = static_cast<int>(std::ceil(std::max(a.y_max, b.y_max)));
  double area_a = 0.0, area_b = 0.0, inter = 0.0;
  for (int y = y0; y < y1; ++y) {
    const double ay = overlap(y, y + 1, a.y_min, a.y_max);
    const double by = overlap(y, y + 1, b.y_min, b.y_max);
    const double iy = overlap(std::max<double>(y, a.y_min), std::min<double>(y + 1, a.y_max), b.y_min, b.y_max);
    for (int x = x0; x < x1; ++x) {
      const double ax = overlap(x, x + 1, a.x_min, a.x_max);
      const double bx = overlap(x, x + 1, b.x_min, b.x_max);
      const double ix = overlap(std::max<double>(x, a.x_min), std::min<double>(x + 1, a.x_max), b.x_min, b.x_max);
      area_a += ax * ay;
      area_b += bx * by;
      inter += ix * iy;
    }
  }
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

BruteForceResult brute_force_assignment(const vcount::CostMatrix& m) {
  const std::size_t n = std::max(m.rows(), m.cols());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  BruteForceResult best{0, 0.0};
  bool first = true;
  do {
    std::size_t card = 0;
    double cost = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const std::size_t c = perm[r];
      if (c >= m.cols() || m.gated(r, c)) continue;
      ++card;
      cost += m.cost(r, c);
    }
    if (first || card > best.cardinality || (card == best.cardinality && cost < best.cost)) {
      best = {card, cost};
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

int winding_number(vcount::Point p, const std::vector<vcount::Point>& poly) {
  auto is_left = [](vcount::Point a, vcount::Point b, vcount::Point c) {
    return (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  };
  int wn = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto a = poly[i], b = poly[(i + 1) % poly.size()];
    if (a.y <= p.y) {
      if (b.y > p.y && is_left(a, b, p) > 0) ++wn;
    } else if (b.y <= p.y && is_left(a, b, p) < 0) {
      --wn;
    }
  }
  return wn;
}

double distance_to_boundary(vcount::Point p, const std::vector<vcount::Point>& poly) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto a = poly[i], b = poly[(i + 1) % poly.size()];
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy)));
  }
  return best;
}

namespace {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

Vec4 measure(const BoundingBox& b) {
  const double w = b.x_max - b.x_min, h = b.y_max - b.y_min;
  return {(b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0, w * h, w / h};
}

Mat4 invert(Mat4 a) {
  Mat4 inv{};
  for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (int k = 0; k < 4; ++k) {
      a[col][k] /= d;
      inv[col][k] /= d;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (int k = 0; k < 4; ++k) {
        a[r][k] -= f * a[col][k];
        inv[r][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

}  // namespace

DenseKalman::DenseKalman(const BoundingBox& box, const vcount::KalmanConfig& cfg) : cfg_(cfg) {
  const Vec4 z = measure(box);
  for (int i = 0; i < 4; ++i) x_[i] = z[i];
  for (int i = 0; i < 7; ++i) p_[i][i] = i < 4 ? cfg.init_position_var : cfg.init_rate_var;
}

void DenseKalman::predict() {
  // F: identity plus unit coupling (0,4), (1,5), (2,6).
  Mat f{};
  for (int i = 0; i < 7; ++i) f[i][i] = 1.0;
  f[0][4] = f[1][5] = f[2][6] = 1.0;
  Vec x{};
  for (int i = 0; i < 7; ++i)
    for (int k = 0; k < 7; ++k) x[i] += f[i][k] * x_[k];
  if (x[2] <= 0.0) x[2] = vcount::kMinPredictedArea;
  Mat fp{}, p{};
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int k = 0; k < 7; ++k) fp[i][j] += f[i][k] * p_[k][j];
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int k = 0; k < 7; ++k) p[i][j] += fp[i][k] * f[j][k];
  const double q[7] = {cfg_.process_position_var, cfg_.process_position_var, cfg_.process_position_var,
                       cfg_.process_position_var, cfg_.process_velocity_var, cfg_.process_velocity_var,
                       cfg_.process_area_rate_var};
  for (int i = 0; i < 7; ++i) p[i][i] += q[i];
  x_ = x;
  p_ = p;
}

void DenseKalman::update(const BoundingBox& box) {
  const Vec4 z = measure(box);
  const double w = box.x_max - box.x_min, h = box.y_max - box.y_min;
  const double sd[4] = {cfg_.meas_position_factor * w, cfg_.meas_position_factor * h, cfg_.meas_area_factor * w * h,
                        cfg_.meas_ratio_factor * w / h};
  // H selects the first four state components.
  Mat4 s{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s[i][j] = p_[i][j] + (i == j ? sd[i] * sd[i] : 0.0);
  const Mat4 s_inv = invert(s);
  std::array<std::array<double, 4>, 7> k{};
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 4; ++j)
      for (int m = 0; m < 4; ++m) k[i][j] += p_[i][m] * s_inv[m][j];
  Vec4 y{};
  for (int i = 0; i < 4; ++i) y[i] = z[i] - x_[i];
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 4; ++j) x_[i] += k[i][j] * y[j];
  Mat ikh{};
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) ikh[i][j] = (i == j ? 1.0 : 0.0) - (j < 4 ? k[i][j] : 0.0);
  Mat p{};
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int m = 0; m < 7; ++m) p[i][j] += ikh[i][m] * p_[m][j];
  p_ = p;
}

}  // namespace oracle

namespace support {

using namespace vcount;

BoundingBox random_box(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  double x0 = u(rng), x1 = u(rng), y0 = u(rng), y1 = u(rng);
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  if (x1 - x0 < 1e-3) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-3) y1 = y0 + 1.0;
  return {x0, y0, x1, y1};
}

std::vector<Frame> frames_of(const std::vector<std::vector<BoundingBox>>& boxes, double score) {
  std::vector<Frame> frames;
  for (std::size_t f = 0; f < boxes.size(); ++f) {
    Frame frame;
    frame.index = static_cast<std::int64_t>(f);
    for (const auto& b : boxes[f]) frame.detections.push_back({b, VehicleClass::Car, score, std::nullopt});
    frames.push_back(std::move(frame));
  }
  return frames;
}

bool run_with_exclusivity_audit(const TrackerParams& params, const std::vector<Frame>& frames,
                                std::vector<Track>* out) {
  auto tracker = make_tracker(params);
  bool ok = true;
  for (const auto& f : frames) {
    tracker->step(f);
    std::set<std::size_t> used;
    for (const auto& a : tracker->last_absorptions()) ok = used.insert(a.detection).second && ok;
  }
  auto tracks = tracker->flush();
  if (out) *out = std::move(tracks);
  return ok;
}

IdentityAudit identity_audit(const GroundTruth& gt, const std::vector<Track>& tracks) {
  const auto truth = gt.boxes_by_frame();
  std::vector<std::vector<std::pair<std::int64_t, BoundingBox>>> measured(truth.size());
  for (const auto& t : tracks)
    for (const auto& b : t.boxes)
      if (!b.predicted() && b.frame >= 0 && static_cast<std::size_t>(b.frame) < truth.size())
        measured[static_cast<std::size_t>(b.frame)].emplace_back(t.id, b.box);

  std::vector<std::set<std::int64_t>> ids(gt.identities.size());
  for (std::size_t f = 0; f < truth.size(); ++f) {
    if (truth[f].empty() || measured[f].empty()) continue;
    std::vector<BoundingBox> g, d;
    for (const auto& [_, b] : truth[f]) g.push_back(b);
    for (const auto& [_, b] : measured[f]) d.push_back(b);
    for (const auto& [r, c] : solve_assignment(iou_cost(g, d, 0.5))) ids[truth[f][r].first].insert(measured[f][c].first);
  }
  IdentityAudit audit;
  for (const auto& s : ids) {
    if (s.empty()) continue;
    ++audit.identities;
    if (s.size() == 1) ++audit.preserved;
  }
  return audit;
}

std::vector<Frame> gapped_stream(std::uint64_t seed, std::size_t frames, std::size_t objects) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 0.5);
  std::vector<Frame> out;
  std::vector<char> missed(objects, 0);
  for (std::size_t f = 0; f < frames; ++f) {
    Frame frame;
    frame.index = static_cast<std::int64_t>(f);
    for (std::size_t k = 0; k < objects; ++k) {
      const bool drop = f > 0 && f + 1 < frames && !missed[k] && u(rng) < 0.15;
      const double dx = n(rng), dy = n(rng);
      missed[k] = drop;
      if (drop) continue;
      const double x = 20.0 + 2.5 * static_cast<double>(f) + dx;
      const double y = 30.0 + 120.0 * static_cast<double>(k) + dy;
      frame.detections.push_back({{x, y, x + 40.0, y + 64.0}, VehicleClass::Car, 0.9, std::nullopt});
    }
    out.push_back(std::move(frame));
  }
  return out;
}

}  // namespace support
