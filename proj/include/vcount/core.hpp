#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vcount {

inline constexpr std::size_t kEmbeddingSize = 128;
inline constexpr double kEmbeddingNormTolerance = 1e-6;

// Axis-aligned box in continuous image coordinates.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Finite coordinates and strictly positive extent on both axes.
bool is_valid(const BoundingBox& box) noexcept;
void validate(const BoundingBox& box);

BoundingBox translated(const BoundingBox& box, double dx, double dy) noexcept;

enum class VehicleClass : std::uint8_t { Car, Truck };

inline constexpr VehicleClass kAllClasses[] = {VehicleClass::Car, VehicleClass::Truck};

std::string_view to_string(VehicleClass cls) noexcept;
VehicleClass parse_vehicle_class(std::string_view text);

using Embedding = std::vector<double>;

struct Detection {
  BoundingBox box;
  VehicleClass cls = VehicleClass::Car;
  double score = 1.0;
  std::optional<Embedding> embedding;

  friend bool operator==(const Detection&, const Detection&) = default;
};

double l2_norm(const Embedding& v) noexcept;

struct Frame {
  std::int64_t index = 0;
  std::optional<std::int64_t> timestamp_ms;
  std::vector<Detection> detections;

  friend bool operator==(const Frame&, const Frame&) = default;
};

enum class BoxSource : std::uint8_t { Measured, Predicted };

struct TrackBox {
  std::int64_t frame = 0;
  BoundingBox box;
  BoxSource source = BoxSource::Measured;

  bool predicted() const noexcept { return source == BoxSource::Predicted; }

  friend bool operator==(const TrackBox&, const TrackBox&) = default;
};

enum class TrackStatus : std::uint8_t { Active, Finished };

struct Track {
  std::int64_t id = 0;
  VehicleClass cls = VehicleClass::Car;             // class of the latest absorbed detection
  VehicleClass majority_class = VehicleClass::Car;  // most frequent class over measured boxes
  double max_score = 0.0;
  std::vector<TrackBox> boxes;
  TrackStatus status = TrackStatus::Active;

  std::size_t measured_count() const noexcept;

  friend bool operator==(const Track&, const Track&) = default;
};

}  // namespace vcount
