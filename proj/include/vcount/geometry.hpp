#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vcount/core.hpp"

namespace vcount {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Simple polygon with non-zero enclosed area. Construction validates.
class Polygon {
public:
  explicit Polygon(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  double signed_area() const noexcept;
  BoundingBox bounds() const noexcept { return bounds_; }

private:
  std::vector<Point> vertices_;
  BoundingBox bounds_;
};

// Which point of a box stands for the vehicle in trajectory tests.
enum class Anchor { Center, BottomCenter };

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept;
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

Point box_center(const BoundingBox& b) noexcept;
Point box_anchor(const BoundingBox& b, Anchor anchor) noexcept;

// Boundary points count as inside.
bool point_in_polygon(Point p, const Polygon& poly) noexcept;

// Index of the first point inside `poly`, if any.
std::optional<std::size_t> trajectory_enters(std::span<const Point> points, const Polygon& poly) noexcept;

bool segments_intersect(Point a, Point b, Point c, Point d) noexcept;
bool polygons_overlap(const Polygon& a, const Polygon& b) noexcept;

}  // namespace vcount
