#include "vcount/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "vcount/error.hpp"

namespace vcount {
namespace {

double cross(Point o, Point a, Point b) noexcept {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Collinearity tolerance relative to the segment's scale.
bool on_segment(Point p, Point a, Point b) noexcept {
  double scale = std::max({std::abs(a.x), std::abs(a.y), std::abs(b.x), std::abs(b.y), 1.0});
  double len = std::hypot(b.x - a.x, b.y - a.y);
  if (std::abs(cross(a, b, p)) > 1e-12 * scale * std::max(len, 1.0)) return false;
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

int orientation(Point a, Point b, Point c) noexcept {
  double v = cross(a, b, c);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

}  // namespace

Polygon::Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) throw ValidationError("polygon needs at least 3 vertices");
  for (const auto& p : vertices_)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw ValidationError("polygon vertex coordinates must be finite");
  if (signed_area() == 0.0) throw ValidationError("polygon encloses zero area");

  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j], vertices_[(j + 1) % n]))
        throw ValidationError("polygon is self-intersecting");
    }
  }

  auto [xmin, xmax] = std::minmax_element(vertices_.begin(), vertices_.end(),
                                          [](Point a, Point b) { return a.x < b.x; });
  auto [ymin, ymax] = std::minmax_element(vertices_.begin(), vertices_.end(),
                                          [](Point a, Point b) { return a.y < b.y; });
  bounds_ = {xmin->x, ymin->y, xmax->x, ymax->y};
}

double Polygon::signed_area() const noexcept {
  double sum = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = vertices_[i];
    const Point& b = vertices_[(i + 1) % n];
    sum += a.x * b.y - b.x * a.y;
  }
  return 0.5 * sum;
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  if (a == b) return 1.0;
  return inter / (a.area() + b.area() - inter);
}

Point box_center(const BoundingBox& b) noexcept {
  return {0.5 * (b.x_min + b.x_max), 0.5 * (b.y_min + b.y_max)};
}

Point box_anchor(const BoundingBox& b, Anchor anchor) noexcept {
  if (anchor == Anchor::BottomCenter) return {0.5 * (b.x_min + b.x_max), b.y_max};
  return box_center(b);
}

bool point_in_polygon(Point p, const Polygon& poly) noexcept {
  const BoundingBox& bb = poly.bounds();
  if (p.x < bb.x_min || p.x > bb.x_max || p.y < bb.y_min || p.y > bb.y_max) return false;

  const auto& v = poly.vertices();
  const std::size_t n = v.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (on_segment(p, v[j], v[i])) return true;
    // Half-open crossing rule: each edge owns its lower endpoint only.
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      double x_cross = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

std::optional<std::size_t> trajectory_enters(std::span<const Point> points, const Polygon& poly) noexcept {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (point_in_polygon(points[i], poly)) return i;
  return std::nullopt;
}

bool segments_intersect(Point a, Point b, Point c, Point d) noexcept {
  int o1 = orientation(a, b, c);
  int o2 = orientation(a, b, d);
  int o3 = orientation(c, d, a);
  int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(c, a, b)) return true;
  if (o2 == 0 && on_segment(d, a, b)) return true;
  if (o3 == 0 && on_segment(a, c, d)) return true;
  if (o4 == 0 && on_segment(b, c, d)) return true;
  return false;
}

bool polygons_overlap(const Polygon& a, const Polygon& b) noexcept {
  const auto& va = a.vertices();
  const auto& vb = b.vertices();
  for (std::size_t i = 0; i < va.size(); ++i)
    for (std::size_t j = 0; j < vb.size(); ++j)
      if (segments_intersect(va[i], va[(i + 1) % va.size()], vb[j], vb[(j + 1) % vb.size()]))
        return true;
  return point_in_polygon(va.front(), b) || point_in_polygon(vb.front(), a);
}

}  // namespace vcount
