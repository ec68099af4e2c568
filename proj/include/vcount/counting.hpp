#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vcount/core.hpp"
#include "vcount/geometry.hpp"

namespace vcount {

enum class Direction : std::uint8_t { Northbound, Southbound };

inline constexpr Direction kAllDirections[] = {Direction::Northbound, Direction::Southbound};

std::string_view to_string(Direction d) noexcept;
Direction parse_direction(std::string_view text);

struct Zone {
  std::string name;
  Direction direction;
  Polygon polygon;
};

// Throws ConfigError when polygons of different directions overlap.
void validate_zones(const std::vector<Zone>& zones);

// Zones file: {"zones":[{"name":…,"direction":"northbound"|"southbound","polygon":[[x,y],…]}]}
std::vector<Zone> read_zones(std::istream& in);
std::vector<Zone> read_zones_file(const std::filesystem::path& path);
void write_zones(std::ostream& out, const std::vector<Zone>& zones);
void write_zones_file(const std::filesystem::path& path, const std::vector<Zone>& zones);

enum class CountingMode { FirstEntry, EntryExit };
enum class ClassSource { Majority, Latest };

struct CountOptions {
  Anchor anchor = Anchor::Center;
  bool include_predicted = false;
  ClassSource class_source = ClassSource::Majority;
  CountingMode mode = CountingMode::FirstEntry;
};

struct CountEvent {
  std::int64_t track_id;
  Direction direction;
  std::string zone;
  std::int64_t frame;  // frame of the triggering trajectory point
  VehicleClass cls;

  friend bool operator==(const CountEvent&, const CountEvent&) = default;
};

class CountReport {
public:
  std::size_t count(Direction d, VehicleClass c) const noexcept {
    return cells_[static_cast<std::size_t>(d)][static_cast<std::size_t>(c)];
  }
  std::size_t total(Direction d) const noexcept { return count(d, VehicleClass::Car) + count(d, VehicleClass::Truck); }
  std::size_t total() const noexcept { return total(Direction::Northbound) + total(Direction::Southbound); }

  const std::vector<CountEvent>& events() const noexcept { return events_; }

  void record(CountEvent event);
  void set(Direction d, VehicleClass c, std::size_t n) noexcept {
    cells_[static_cast<std::size_t>(d)][static_cast<std::size_t>(c)] = n;
  }

  friend bool operator==(const CountReport&, const CountReport&) = default;

private:
  std::array<std::array<std::size_t, 2>, 2> cells_{};
  std::vector<CountEvent> events_;
};

// Each track is claimed by the first zone its anchor trajectory enters
// (earliest frame, then zone order) and counted exactly once.
CountReport count_tracks(const std::vector<Track>& tracks, const std::vector<Zone>& zones,
                         const CountOptions& options = {});

// 100 * auto / gt; empty when gt == 0.
std::optional<double> count_percentage(std::size_t auto_count, std::size_t ground_truth) noexcept;

// `direction,class,count` table, every cell listed.
void write_counts_csv(std::ostream& out, const CountReport& report);
CountReport read_counts_csv(std::istream& in);
CountReport read_counts_file(const std::filesystem::path& path);
void write_count_events(std::ostream& out, const CountReport& report);

}  // namespace vcount
