#include "vcount/counting.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "vcount/error.hpp"

namespace vcount {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct Claim {
  std::int64_t frame;
  std::size_t zone;
};

std::optional<Claim> claim_for(const std::vector<Point>& points, const std::vector<std::int64_t>& frames,
                               const std::vector<Zone>& zones, CountingMode mode) {
  std::optional<Claim> best;
  for (std::size_t z = 0; z < zones.size(); ++z) {
    auto entry = trajectory_enters(points, zones[z].polygon);
    if (!entry) continue;
    if (mode == CountingMode::EntryExit) {
      bool exits = false;
      for (std::size_t i = *entry + 1; i < points.size() && !exits; ++i)
        exits = !point_in_polygon(points[i], zones[z].polygon);
      if (!exits) continue;
    }
    const std::int64_t frame = frames[*entry];
    if (!best || frame < best->frame) best = Claim{frame, z};
  }
  return best;
}

}  // namespace

std::string_view to_string(Direction d) noexcept {
  return d == Direction::Southbound ? "southbound" : "northbound";
}

Direction parse_direction(std::string_view text) {
  if (text == "northbound") return Direction::Northbound;
  if (text == "southbound") return Direction::Southbound;
  throw ConfigError("unknown direction '" + std::string(text) + "' (expected northbound|southbound)");
}

void validate_zones(const std::vector<Zone>& zones) {
  for (std::size_t i = 0; i < zones.size(); ++i)
    for (std::size_t j = i + 1; j < zones.size(); ++j)
      if (zones[i].direction != zones[j].direction && polygons_overlap(zones[i].polygon, zones[j].polygon))
        throw ConfigError("zones '" + zones[i].name + "' and '" + zones[j].name +
                          "' have different directions but overlap");
}

std::vector<Zone> read_zones(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed zones file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("zones") || !doc["zones"].is_array())
    throw ConfigError("zones file must be an object with a 'zones' array");
  std::vector<Zone> zones;
  for (const auto& z : doc["zones"]) {
    if (!z.is_object() || !z.contains("name") || !z.contains("direction") || !z.contains("polygon"))
      throw ConfigError("zone requires name, direction and polygon");
    if (!z["name"].is_string() || !z["direction"].is_string() || !z["polygon"].is_array())
      throw ConfigError("zone fields have the wrong type");
    const std::string name = z["name"].get<std::string>();
    std::vector<Point> pts;
    for (const auto& p : z["polygon"]) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        throw ConfigError("zone '" + name + "': polygon vertices must be [x, y] pairs");
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    try {
      zones.push_back({name, parse_direction(z["direction"].get<std::string>()), Polygon(std::move(pts))});
    } catch (const ValidationError& e) {
      throw ConfigError("zone '" + name + "': " + e.what());
    }
  }
  validate_zones(zones);
  return zones;
}

std::vector<Zone> read_zones_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open zones file '" + path.string() + "'");
  return read_zones(in);
}

void write_zones(std::ostream& out, const std::vector<Zone>& zones) {
  ordered_json arr = ordered_json::array();
  for (const auto& z : zones) {
    ordered_json jz;
    jz["name"] = z.name;
    jz["direction"] = to_string(z.direction);
    auto poly = ordered_json::array();
    for (const auto& p : z.polygon.vertices()) poly.push_back({p.x, p.y});
    jz["polygon"] = std::move(poly);
    arr.push_back(std::move(jz));
  }
  ordered_json doc;
  doc["zones"] = std::move(arr);
  out << doc.dump(2) << '\n';
}

void write_zones_file(const std::filesystem::path& path, const std::vector<Zone>& zones) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_zones(out, zones);
}

void CountReport::record(CountEvent event) {
  ++cells_[static_cast<std::size_t>(event.direction)][static_cast<std::size_t>(event.cls)];
  events_.push_back(std::move(event));
}

CountReport count_tracks(const std::vector<Track>& tracks, const std::vector<Zone>& zones,
                         const CountOptions& options) {
  validate_zones(zones);
  CountReport report;
  std::vector<Point> points;
  std::vector<std::int64_t> frames;
  for (const auto& track : tracks) {
    // A single measured point is not a trajectory.
    if (track.measured_count() < 2) continue;
    points.clear();
    frames.clear();
    for (const auto& b : track.boxes) {
      if (b.predicted() && !options.include_predicted) continue;
      points.push_back(box_anchor(b.box, options.anchor));
      frames.push_back(b.frame);
    }
    auto claim = claim_for(points, frames, zones, options.mode);
    if (!claim) continue;
    const Zone& zone = zones[claim->zone];
    const VehicleClass cls = options.class_source == ClassSource::Majority ? track.majority_class : track.cls;
    report.record({track.id, zone.direction, zone.name, claim->frame, cls});
  }
  return report;
}

std::optional<double> count_percentage(std::size_t auto_count, std::size_t ground_truth) noexcept {
  if (ground_truth == 0) return std::nullopt;
  return 100.0 * static_cast<double>(auto_count) / static_cast<double>(ground_truth);
}

void write_counts_csv(std::ostream& out, const CountReport& report) {
  out << "direction,class,count\n";
  for (Direction d : kAllDirections)
    for (VehicleClass c : kAllClasses) out << to_string(d) << ',' << to_string(c) << ',' << report.count(d, c) << '\n';
}

CountReport read_counts_csv(std::istream& in) {
  CountReport report;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (n == 1) {
      if (line != "direction,class,count") throw StreamError(n, "expected header 'direction,class,count'");
      continue;
    }
    std::istringstream row(line);
    std::string dir, cls, count;
    if (!std::getline(row, dir, ',') || !std::getline(row, cls, ',') || !std::getline(row, count))
      throw StreamError(n, "expected three comma-separated fields");
    try {
      std::size_t pos = 0;
      long long v = std::stoll(count, &pos);
      if (pos != count.size() || v < 0) throw StreamError(n, "count must be a non-negative integer");
      report.set(parse_direction(dir), parse_vehicle_class(cls), static_cast<std::size_t>(v));
    } catch (const StreamError&) {
      throw;
    } catch (const std::exception& e) {
      throw StreamError(n, e.what());
    }
  }
  if (n == 0) throw StreamError(0, "empty counts file");
  return report;
}

CountReport read_counts_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open counts file '" + path.string() + "'");
  return read_counts_csv(in);
}

void write_count_events(std::ostream& out, const CountReport& report) {
  for (const auto& e : report.events()) {
    ordered_json rec;
    rec["track_id"] = e.track_id;
    rec["direction"] = to_string(e.direction);
    rec["zone"] = e.zone;
    rec["frame"] = e.frame;
    rec["class"] = to_string(e.cls);
    out << rec.dump() << '\n';
  }
}

}  // namespace vcount
