#include "vcount/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vcount/error.hpp"

namespace vcount {

bool is_valid(const BoundingBox& box) noexcept {
  return std::isfinite(box.x_min) && std::isfinite(box.y_min) && std::isfinite(box.x_max) &&
         std::isfinite(box.y_max) && box.x_min < box.x_max && box.y_min < box.y_max;
}

void validate(const BoundingBox& box) {
  if (is_valid(box)) return;
  std::ostringstream msg;
  msg.precision(17);
  msg << "invalid bounding box [" << box.x_min << ", " << box.y_min << ", " << box.x_max << ", "
      << box.y_max << "]: coordinates must be finite with x_min < x_max and y_min < y_max";
  throw ValidationError(msg.str());
}

BoundingBox translated(const BoundingBox& box, double dx, double dy) noexcept {
  return {box.x_min + dx, box.y_min + dy, box.x_max + dx, box.y_max + dy};
}

std::string_view to_string(VehicleClass cls) noexcept {
  return cls == VehicleClass::Truck ? "truck" : "car";
}

VehicleClass parse_vehicle_class(std::string_view text) {
  if (text == "car") return VehicleClass::Car;
  if (text == "truck") return VehicleClass::Truck;
  throw ValidationError("unknown vehicle class '" + std::string(text) + "' (expected car|truck)");
}

double l2_norm(const Embedding& v) noexcept {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

std::size_t Track::measured_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(boxes.begin(), boxes.end(), [](const TrackBox& b) { return !b.predicted(); }));
}

}  // namespace vcount
