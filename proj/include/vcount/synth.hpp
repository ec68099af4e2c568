#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "vcount/core.hpp"
#include "vcount/counting.hpp"
#include "vcount/geometry.hpp"

namespace vcount {

// Seeded generator with a pinned algorithm: std::mt19937_64 seeded through
// a SplitMix64 mix of (seed, stream, index), and hand-written variate
// transforms (the std:: distributions are implementation-defined).
class Rng {
public:
  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

  double uniform() noexcept;  // (0, 1]
  double normal() noexcept;   // Box-Muller, standard normal
  bool bernoulli(double p) noexcept { return uniform() <= p && p > 0.0; }
  std::uint32_t poisson(double mean) noexcept;
  Embedding unit_vector(std::size_t dim = kEmbeddingSize) noexcept;

private:
  std::mt19937_64 engine_;
};

struct Dwell {
  double at = 0.0;  // arc length along the lane, pixels
  int frames = 0;
};

struct Lane {
  std::string name;
  Direction direction = Direction::Northbound;
  std::vector<Point> path;  // polyline, >= 2 points, inside the image
  double width = 0.0;       // vehicles get a seeded lateral offset within +-width/2
  std::optional<Dwell> dwell;

  double length() const noexcept;
};

struct Spawn {
  std::int64_t frame = 0;
  std::size_t lane = 0;
  VehicleClass cls = VehicleClass::Car;
  double speed = 4.0;  // pixels per frame
  double box_width = 0.0;
  double box_height = 0.0;
};

struct BoxSize {
  double width = 0.0;
  double height = 0.0;
};

struct Scenario {
  std::string name;
  double width = 1280.0;
  double height = 720.0;
  double fps = 30.0;
  std::int64_t duration = 0;  // frames
  std::array<BoxSize, 2> class_sizes{{{40.0, 64.0}, {48.0, 120.0}}};
  double truck_fraction = 0.25;  // class mix of false positives
  std::vector<Lane> lanes;
  std::vector<Spawn> spawns;

  const BoxSize& size_of(VehicleClass c) const noexcept { return class_sizes[static_cast<std::size_t>(c)]; }
  std::size_t lane_index(std::string_view name) const;
  // Throws ConfigError naming the offending lane or spawn.
  void validate() const;
};

struct NoiseModel {
  double miss_rate = 0.0;
  double fp_rate = 0.0;  // expected false positives per frame
  double jitter_sigma = 0.0;
  double duplicate_rate = 0.0;
  double class_flip_rate = 0.0;
  double occlusion_iou = 1.0;  // IoU above which the smaller box vanishes; 1 disables
  double score_mean = 1.0;
  double score_std = 0.0;
  double fp_score_mean = 0.5;
  double fp_score_std = 0.0;
  double embedding_noise = 0.0;  // radians

  void validate() const;
};

struct GroundTruthBox {
  std::int64_t frame;
  BoundingBox box;
};

struct Identity {
  std::int64_t id;  // 1-based, spawn order
  VehicleClass cls;
  Direction direction;
  std::size_t lane;
  std::vector<GroundTruthBox> boxes;
};

struct GroundTruth {
  double width = 0.0;
  double height = 0.0;
  double fps = 30.0;
  std::int64_t duration = 0;
  std::array<BoxSize, 2> class_sizes{};
  double truck_fraction = 0.0;
  std::vector<Identity> identities;
  CountReport counts;  // identities passing a zone of their lane's direction

  std::vector<Track> tracks() const;
  // Ground-truth boxes as a detection stream (score 1, no embeddings).
  std::vector<Frame> frames() const;
  // (identity index, box) per frame.
  std::vector<std::vector<std::pair<std::size_t, BoundingBox>>> boxes_by_frame() const;
};

GroundTruth generate(const Scenario& scenario, const std::vector<Zone>& zones, std::uint64_t seed);

// Per-identity unit embeddings; identities within each block of 128 are
// mutually orthogonal.
std::vector<Embedding> identity_embeddings(std::size_t count, std::uint64_t seed);

std::vector<Frame> corrupt(const GroundTruth& gt, const NoiseModel& noise, std::uint64_t seed);

// Throughput workload: `objects` vehicles visible in every frame, each
// drifting at constant velocity with mild jitter and replaced after a
// random lifetime. No embeddings.
std::vector<Frame> bench_stream(std::size_t frames, std::size_t objects, std::uint64_t seed);

struct ScenarioPreset {
  std::string name;
  std::string description;
  Scenario scenario;
  std::vector<Zone> zones;
  std::string noise;  // suggested noise preset
};

std::vector<ScenarioPreset> scenario_library();
ScenarioPreset find_scenario(std::string_view name);

// "zero", "daylight", "night", "rain".
std::vector<std::pair<std::string, NoiseModel>> noise_library();
NoiseModel find_noise(std::string_view name);

}  // namespace vcount
