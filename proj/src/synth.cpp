#include "vcount/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vcount/error.hpp"

namespace vcount {
namespace {

constexpr std::uint64_t kStreamFrame = 1;
constexpr std::uint64_t kStreamEmbedding = 2;
constexpr std::uint64_t kStreamLateral = 3;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void require_rate(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw ConfigError(std::string("noise ") + name + " must lie in [0, 1]");
}

void require_non_negative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string("noise ") + name + " must be finite and >= 0");
}

bool inside_extent(Point p, double w, double h) noexcept { return p.x >= 0.0 && p.x <= w && p.y >= 0.0 && p.y <= h; }

// Point at arc length `d` along the polyline, shifted `offset` pixels to the
// left of the local heading.
Point point_on_lane(const Lane& lane, double d, double offset) noexcept {
  const auto& pts = lane.path;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double dx = pts[i + 1].x - pts[i].x, dy = pts[i + 1].y - pts[i].y;
    const double seg = std::hypot(dx, dy);
    if (seg == 0.0) continue;
    if (d <= seg || i + 2 == pts.size()) {
      const double t = std::min(d, seg) / seg;
      return {pts[i].x + t * dx - offset * dy / seg, pts[i].y + t * dy + offset * dx / seg};
    }
    d -= seg;
  }
  return pts.back();
}

// Arc length travelled `t` frames after spawn, honoring an optional dwell.
double distance_travelled(const Lane& lane, double speed, std::int64_t t) noexcept {
  const double free_run = speed * static_cast<double>(t);
  if (!lane.dwell || free_run <= lane.dwell->at) return free_run;
  const double reach = lane.dwell->at / speed;
  const double resume = reach + lane.dwell->frames;
  if (static_cast<double>(t) <= resume) return lane.dwell->at;
  return speed * (static_cast<double>(t) - lane.dwell->frames);
}

BoundingBox centered_box(Point c, double w, double h) noexcept {
  return {c.x - 0.5 * w, c.y - 0.5 * h, c.x + 0.5 * w, c.y + 0.5 * h};
}

// Translation and size perturbation applied edge-wise, so zero sigma leaves
// every coordinate bit-identical.
BoundingBox jitter(const BoundingBox& b, double sigma, Rng& rng) noexcept {
  const double dx = sigma * rng.normal(), dy = sigma * rng.normal();
  const double dw = sigma * rng.normal(), dh = sigma * rng.normal();
  BoundingBox out{b.x_min + dx - 0.5 * dw, b.y_min + dy - 0.5 * dh, b.x_max + dx + 0.5 * dw,
                  b.y_max + dy + 0.5 * dh};
  if (!(out.width() >= 1.0)) {
    const double cx = 0.5 * (out.x_min + out.x_max);
    out.x_min = cx - 0.5;
    out.x_max = cx + 0.5;
  }
  if (!(out.height() >= 1.0)) {
    const double cy = 0.5 * (out.y_min + out.y_max);
    out.y_min = cy - 0.5;
    out.y_max = cy + 0.5;
  }
  return out;
}

double draw_score(double mean, double sd, Rng& rng) noexcept {
  return std::clamp(mean + sd * rng.normal(), 0.0, 1.0);
}

// Base vector rotated by a normally distributed angle towards a random
// orthogonal direction.
Embedding perturb(const Embedding& base, double sigma, Rng& rng) {
  const double theta = sigma * rng.normal();
  Embedding dir = rng.unit_vector(base.size());
  double dot = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) dot += dir[i] * base[i];
  for (std::size_t i = 0; i < base.size(); ++i) dir[i] -= dot * base[i];
  const double n = l2_norm(dir);
  if (theta == 0.0 || n == 0.0) return base;
  Embedding out(base.size());
  const double c = std::cos(theta), s = std::sin(theta) / n;
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = c * base[i] + s * dir[i];
  const double norm = l2_norm(out);
  for (double& x : out) x /= norm;
  return out;
}

VehicleClass flipped(VehicleClass c) noexcept {
  return c == VehicleClass::Car ? VehicleClass::Truck : VehicleClass::Car;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
    : engine_(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index)) {}

double Rng::uniform() noexcept {
  return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

double Rng::normal() noexcept {
  const double u1 = uniform(), u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint32_t Rng::poisson(double mean) noexcept {
  if (!(mean > 0.0)) return 0;
  if (mean > 30.0) {
    const double v = std::round(mean + std::sqrt(mean) * normal());
    return v < 0.0 ? 0u : static_cast<std::uint32_t>(v);
  }
  const double limit = std::exp(-mean);
  std::uint32_t k = 0;
  double p = uniform();
  while (p > limit) {
    ++k;
    p *= uniform();
  }
  return k;
}

Embedding Rng::unit_vector(std::size_t dim) noexcept {
  Embedding v(dim);
  for (double& x : v) x = normal();
  const double n = l2_norm(v);
  for (double& x : v) x /= n;
  return v;
}

double Lane::length() const noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) sum += std::hypot(path[i + 1].x - path[i].x, path[i + 1].y - path[i].y);
  return sum;
}

std::size_t Scenario::lane_index(std::string_view lane_name) const {
  for (std::size_t i = 0; i < lanes.size(); ++i)
    if (lanes[i].name == lane_name) return i;
  throw ConfigError("unknown lane '" + std::string(lane_name) + "'");
}

void Scenario::validate() const {
  if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height))
    throw ConfigError("scenario image extent must be positive");
  if (!(fps > 0.0)) throw ConfigError("scenario fps must be positive");
  if (duration < 0) throw ConfigError("scenario duration must be non-negative");
  for (const auto& s : class_sizes)
    if (!(s.width > 0.0) || !(s.height > 0.0)) throw ConfigError("class box sizes must be positive");
  if (!(truck_fraction >= 0.0 && truck_fraction <= 1.0)) throw ConfigError("truck_fraction must lie in [0, 1]");
  for (const auto& lane : lanes) {
    if (lane.path.size() < 2) throw ConfigError("lane '" + lane.name + "' needs at least two path points");
    for (const auto& p : lane.path)
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !inside_extent(p, width, height))
        throw ConfigError("lane '" + lane.name + "' leaves the image extent");
    if (!(lane.length() > 0.0)) throw ConfigError("lane '" + lane.name + "' has zero length");
    if (!(lane.width >= 0.0)) throw ConfigError("lane '" + lane.name + "' width must be >= 0");
    if (lane.dwell && (lane.dwell->at < 0.0 || lane.dwell->frames < 0))
      throw ConfigError("lane '" + lane.name + "' dwell must be non-negative");
  }
  for (std::size_t i = 0; i < spawns.size(); ++i) {
    const auto& s = spawns[i];
    const std::string which = "spawn #" + std::to_string(i);
    if (s.lane >= lanes.size()) throw ConfigError(which + " references a missing lane");
    if (s.frame < 0 || s.frame >= duration) throw ConfigError(which + " lies outside the scenario duration");
    if (!(s.speed > 0.0) || !std::isfinite(s.speed)) throw ConfigError(which + " speed must be positive");
    if (s.box_width < 0.0 || s.box_height < 0.0) throw ConfigError(which + " box size must be positive");
  }
}

void NoiseModel::validate() const {
  require_rate(miss_rate, "miss_rate");
  require_non_negative(fp_rate, "fp_rate");
  require_non_negative(jitter_sigma, "jitter_sigma");
  require_rate(duplicate_rate, "duplicate_rate");
  require_rate(class_flip_rate, "class_flip_rate");
  require_rate(occlusion_iou, "occlusion_iou");
  require_rate(score_mean, "score_mean");
  require_non_negative(score_std, "score_std");
  require_rate(fp_score_mean, "fp_score_mean");
  require_non_negative(fp_score_std, "fp_score_std");
  require_non_negative(embedding_noise, "embedding_noise");
}

std::vector<Track> GroundTruth::tracks() const {
  std::vector<Track> out;
  out.reserve(identities.size());
  for (const auto& id : identities) {
    Track t;
    t.id = id.id;
    t.cls = t.majority_class = id.cls;
    t.max_score = 1.0;
    t.status = TrackStatus::Finished;
    for (const auto& b : id.boxes) t.boxes.push_back({b.frame, b.box, BoxSource::Measured});
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::vector<std::pair<std::size_t, BoundingBox>>> GroundTruth::boxes_by_frame() const {
  std::vector<std::vector<std::pair<std::size_t, BoundingBox>>> out(static_cast<std::size_t>(duration));
  for (std::size_t i = 0; i < identities.size(); ++i)
    for (const auto& b : identities[i].boxes) out[static_cast<std::size_t>(b.frame)].emplace_back(i, b.box);
  return out;
}

std::vector<Frame> GroundTruth::frames() const {
  auto by_frame = boxes_by_frame();
  std::vector<Frame> out;
  out.reserve(by_frame.size());
  for (std::size_t f = 0; f < by_frame.size(); ++f) {
    Frame frame;
    frame.index = static_cast<std::int64_t>(f);
    frame.timestamp_ms = std::llround(static_cast<double>(f) * 1000.0 / fps);
    for (const auto& [i, box] : by_frame[f]) frame.detections.push_back({box, identities[i].cls, 1.0, std::nullopt});
    out.push_back(std::move(frame));
  }
  return out;
}

GroundTruth generate(const Scenario& scenario, const std::vector<Zone>& zones, std::uint64_t seed) {
  scenario.validate();
  validate_zones(zones);

  GroundTruth gt;
  gt.width = scenario.width;
  gt.height = scenario.height;
  gt.fps = scenario.fps;
  gt.duration = scenario.duration;
  gt.class_sizes = scenario.class_sizes;
  gt.truck_fraction = scenario.truck_fraction;

  for (std::size_t i = 0; i < scenario.spawns.size(); ++i) {
    const Spawn& s = scenario.spawns[i];
    const Lane& lane = scenario.lanes[s.lane];
    Rng rng(seed, kStreamLateral, i);
    const double offset = (rng.uniform() - 0.5) * lane.width;
    const BoxSize size = s.box_width > 0.0 && s.box_height > 0.0 ? BoxSize{s.box_width, s.box_height}
                                                                 : scenario.size_of(s.cls);
    Identity id{static_cast<std::int64_t>(i + 1), s.cls, lane.direction, s.lane, {}};
    const double length = lane.length();
    for (std::int64_t f = s.frame; f < scenario.duration; ++f) {
      const double d = distance_travelled(lane, s.speed, f - s.frame);
      if (d > length) break;
      id.boxes.push_back({f, centered_box(point_on_lane(lane, d, offset), size.width, size.height)});
    }

    bool counted = false;
    for (const auto& zone : zones) {
      for (const auto& b : id.boxes) {
        if (!point_in_polygon(box_center(b.box), zone.polygon)) continue;
        if (zone.direction != lane.direction)
          throw ConfigError("lane '" + lane.name + "' passes through zone '" + zone.name +
                            "' of the opposite direction");
        counted = true;
        break;
      }
    }
    if (counted && id.boxes.size() >= 2) gt.counts.set(lane.direction, s.cls, gt.counts.count(lane.direction, s.cls) + 1);
    gt.identities.push_back(std::move(id));
  }
  return gt;
}

std::vector<Embedding> identity_embeddings(std::size_t count, std::uint64_t seed) {
  std::vector<Embedding> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(seed, kStreamEmbedding, k);
    Embedding v = rng.unit_vector();
    const std::size_t block_start = k - k % kEmbeddingSize;
    // Two Gram-Schmidt passes keep the block orthogonal to ~1e-15.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = block_start; j < k; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < kEmbeddingSize; ++i) dot += v[i] * out[j][i];
        for (std::size_t i = 0; i < kEmbeddingSize; ++i) v[i] -= dot * out[j][i];
      }
      const double n = l2_norm(v);
      for (double& x : v) x /= n;
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Frame> corrupt(const GroundTruth& gt, const NoiseModel& noise, std::uint64_t seed) {
  noise.validate();
  const auto base = identity_embeddings(gt.identities.size(), seed);
  const auto by_frame = gt.boxes_by_frame();
  const double dup_sigma = 1.0 + 0.5 * noise.jitter_sigma;

  std::vector<Frame> frames;
  frames.reserve(by_frame.size());
  for (std::size_t f = 0; f < by_frame.size(); ++f) {
    Rng rng(seed, kStreamFrame, f);
    const auto& boxes = by_frame[f];
    Frame frame;
    frame.index = static_cast<std::int64_t>(f);
    frame.timestamp_ms = std::llround(static_cast<double>(f) * 1000.0 / gt.fps);

    // Occlusion: the smaller of two strongly overlapping boxes is hidden
    // (equal areas: the later identity).
    std::vector<char> visible(boxes.size(), 1);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      for (std::size_t j = i + 1; j < boxes.size(); ++j) {
        if (!(iou(boxes[i].second, boxes[j].second) > noise.occlusion_iou)) continue;
        const double ai = boxes[i].second.area(), aj = boxes[j].second.area();
        visible[ai < aj ? i : j] = 0;
      }
    }

    for (std::size_t k = 0; k < boxes.size(); ++k) {
      const auto& [ident, truth] = boxes[k];
      const Identity& who = gt.identities[ident];
      // Every variate is drawn unconditionally so that, for a fixed seed,
      // raising one rate never reshuffles the others.
      const bool missed = rng.bernoulli(noise.miss_rate);
      const BoundingBox seen = jitter(truth, noise.jitter_sigma, rng);
      const bool duplicated = rng.bernoulli(noise.duplicate_rate);
      const BoundingBox twin = jitter(seen, dup_sigma, rng);
      const bool flip1 = rng.bernoulli(noise.class_flip_rate);
      const bool flip2 = rng.bernoulli(noise.class_flip_rate);
      const double score1 = draw_score(noise.score_mean, noise.score_std, rng);
      const double score2 = draw_score(noise.score_mean, noise.score_std, rng);
      Embedding emb1 = perturb(base[ident], noise.embedding_noise, rng);
      Embedding emb2 = perturb(base[ident], noise.embedding_noise, rng);
      if (!visible[k] || missed) continue;

      frame.detections.push_back({seen, flip1 ? flipped(who.cls) : who.cls, score1, std::move(emb1)});
      if (duplicated) frame.detections.push_back({twin, flip2 ? flipped(who.cls) : who.cls, score2, std::move(emb2)});
    }

    const std::uint32_t false_positives = rng.poisson(noise.fp_rate);
    for (std::uint32_t k = 0; k < false_positives; ++k) {
      const VehicleClass cls = rng.uniform() <= gt.truck_fraction ? VehicleClass::Truck : VehicleClass::Car;
      const BoxSize& size = gt.class_sizes[static_cast<std::size_t>(cls)];
      const double cx = size.width < gt.width ? 0.5 * size.width + rng.uniform() * (gt.width - size.width) : 0.5 * gt.width;
      const double cy =
          size.height < gt.height ? 0.5 * size.height + rng.uniform() * (gt.height - size.height) : 0.5 * gt.height;
      const double score = draw_score(noise.fp_score_mean, noise.fp_score_std, rng);
      frame.detections.push_back({centered_box({cx, cy}, size.width, size.height), cls, score, rng.unit_vector()});
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<Frame> bench_stream(std::size_t frames, std::size_t objects, std::uint64_t seed) {
  constexpr double kWidth = 1280.0, kHeight = 720.0;
  struct Mover {
    Point start, velocity;
    std::size_t born = 0, lifetime = 0;
    VehicleClass cls = VehicleClass::Car;
  };
  const Scenario defaults;
  auto spawn = [&](std::size_t slot, std::size_t frame) {
    Rng rng(seed, kStreamLateral, slot * 1000003ULL + frame);
    Mover m;
    m.cls = rng.uniform() <= 0.25 ? VehicleClass::Truck : VehicleClass::Car;
    m.start = {100.0 + rng.uniform() * (kWidth - 200.0), 100.0 + rng.uniform() * (kHeight - 200.0)};
    m.velocity = {2.0 * rng.normal(), 2.0 * rng.normal()};
    m.born = frame;
    m.lifetime = 30 + static_cast<std::size_t>(rng.uniform() * 60.0);
    return m;
  };
  std::vector<Mover> movers;
  for (std::size_t k = 0; k < objects; ++k) movers.push_back(spawn(k, 0));

  std::vector<Frame> out;
  out.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    Rng rng(seed, kStreamFrame, f);
    Frame frame;
    frame.index = static_cast<std::int64_t>(f);
    frame.timestamp_ms = std::llround(static_cast<double>(f) * 1000.0 / defaults.fps);
    for (std::size_t k = 0; k < objects; ++k) {
      if (f - movers[k].born >= movers[k].lifetime) movers[k] = spawn(k, f);
      const Mover& m = movers[k];
      const double t = static_cast<double>(f - m.born);
      const BoxSize& size = defaults.size_of(m.cls);
      const Point c{m.start.x + t * m.velocity.x, m.start.y + t * m.velocity.y};
      frame.detections.push_back({jitter(centered_box(c, size.width, size.height), 1.0, rng), m.cls,
                                  draw_score(0.8, 0.1, rng), std::nullopt});
    }
    out.push_back(std::move(frame));
  }
  return out;
}

namespace {

Polygon rect(double x0, double y0, double x1, double y1) {
  return Polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

// Alternating schedule: every `period` frames from `first`, a truck every
// `truck_every`-th vehicle.
void schedule(Scenario& s, std::size_t lane, std::int64_t first, std::int64_t period, std::int64_t last,
              double speed, int truck_every) {
  int n = 0;
  for (std::int64_t f = first; f <= last; f += period, ++n) {
    const VehicleClass cls = truck_every > 0 && n % truck_every == truck_every - 1 ? VehicleClass::Truck : VehicleClass::Car;
    s.spawns.push_back({f, lane, cls, speed, 0.0, 0.0});
  }
}

Scenario two_lane_base(std::string name) {
  Scenario s;
  s.name = std::move(name);
  s.lanes.push_back({"north", Direction::Northbound, {{520.0, 710.0}, {520.0, 10.0}}, 12.0, std::nullopt});
  s.lanes.push_back({"south", Direction::Southbound, {{760.0, 10.0}, {760.0, 710.0}}, 12.0, std::nullopt});
  return s;
}

std::vector<Zone> two_lane_zones() {
  return {{"north_gate", Direction::Northbound, rect(440.0, 140.0, 600.0, 260.0)},
          {"south_gate", Direction::Southbound, rect(680.0, 460.0, 840.0, 580.0)}};
}

}  // namespace

std::vector<ScenarioPreset> scenario_library() {
  std::vector<ScenarioPreset> out;

  {
    Scenario s = two_lane_base("straight_two_lane");
    s.duration = 600;
    schedule(s, 0, 0, 45, 420, 4.0, 4);
    schedule(s, 1, 10, 50, 420, 3.6, 3);
    out.push_back({s.name, "one straight lane per direction, steady mixed traffic", s, two_lane_zones(), "daylight"});
  }
  {
    // Two same-direction lanes cross inside each zone (one pair per
    // direction). Half-lanes are 3-4-5 triangles of length 350, so at speed 4
    // simultaneous spawns meet at t = 87.5 with a horizontal closing speed of
    // 4.8 px/frame: boxes overlap above IoU 0.8 on exactly frames 87 and 88.
    Scenario s;
    s.name = "crossing_occlusion";
    s.duration = 320;
    s.lanes.push_back({"north_a", Direction::Northbound, {{130.0, 640.0}, {550.0, 80.0}}, 0.0, std::nullopt});
    s.lanes.push_back({"north_b", Direction::Northbound, {{550.0, 640.0}, {130.0, 80.0}}, 0.0, std::nullopt});
    s.lanes.push_back({"south_a", Direction::Southbound, {{730.0, 80.0}, {1150.0, 640.0}}, 0.0, std::nullopt});
    s.lanes.push_back({"south_b", Direction::Southbound, {{1150.0, 80.0}, {730.0, 640.0}}, 0.0, std::nullopt});
    for (std::int64_t f = 0; f <= 120; f += 40)
      for (std::size_t lane = 0; lane < 4; ++lane) s.spawns.push_back({f, lane, VehicleClass::Car, 4.0, 0.0, 0.0});
    std::vector<Zone> zones{{"north_gate", Direction::Northbound, rect(260.0, 300.0, 420.0, 420.0)},
                            {"south_gate", Direction::Southbound, rect(860.0, 300.0, 1020.0, 420.0)}};
    out.push_back({s.name, "crossing paths with a two-frame occlusion at each meeting", s, zones, "daylight"});
  }
  {
    Scenario s = two_lane_base("congestion_dwell");
    s.duration = 600;
    s.lanes[0].dwell = Dwell{420.0, 40};
    schedule(s, 0, 0, 80, 400, 3.0, 3);
    schedule(s, 1, 20, 60, 420, 3.0, 4);
    out.push_back({s.name, "northbound vehicles queue just short of the gate", s, two_lane_zones(), "daylight"});
  }
  {
    Scenario s = two_lane_base("night_sparse");
    s.duration = 600;
    schedule(s, 0, 0, 90, 420, 4.0, 3);
    schedule(s, 1, 30, 90, 420, 3.6, 3);
    out.push_back({s.name, "sparse traffic meant for the night noise model", s, two_lane_zones(), "night"});
  }
  return out;
}

ScenarioPreset find_scenario(std::string_view name) {
  for (auto& p : scenario_library())
    if (p.name == name) return p;
  throw ConfigError("unknown scenario preset '" + std::string(name) + "'");
}

std::vector<std::pair<std::string, NoiseModel>> noise_library() {
  NoiseModel zero;

  NoiseModel daylight;
  daylight.miss_rate = 0.05;
  daylight.fp_rate = 0.2;
  daylight.jitter_sigma = 1.5;
  daylight.duplicate_rate = 0.02;
  daylight.class_flip_rate = 0.03;
  daylight.occlusion_iou = 0.8;
  daylight.score_mean = 0.85;
  daylight.score_std = 0.08;
  daylight.fp_score_mean = 0.45;
  daylight.fp_score_std = 0.15;
  daylight.embedding_noise = 0.15;

  NoiseModel night;
  night.miss_rate = 0.3;
  night.fp_rate = 0.4;
  night.jitter_sigma = 3.0;
  night.duplicate_rate = 0.03;
  night.class_flip_rate = 0.08;
  night.occlusion_iou = 0.7;
  night.score_mean = 0.45;
  night.score_std = 0.12;
  night.fp_score_mean = 0.35;
  night.fp_score_std = 0.1;
  night.embedding_noise = 0.3;

  NoiseModel rain;
  rain.miss_rate = 0.15;
  rain.fp_rate = 0.6;
  rain.jitter_sigma = 2.5;
  rain.duplicate_rate = 0.05;
  rain.class_flip_rate = 0.05;
  rain.occlusion_iou = 0.75;
  rain.score_mean = 0.65;
  rain.score_std = 0.1;
  rain.fp_score_mean = 0.4;
  rain.fp_score_std = 0.12;
  rain.embedding_noise = 0.25;

  return {{"zero", zero}, {"daylight", daylight}, {"night", night}, {"rain", rain}};
}

NoiseModel find_noise(std::string_view name) {
  for (auto& [n, model] : noise_library())
    if (n == name) return model;
  throw ConfigError("unknown noise preset '" + std::string(name) + "'");
}

}  // namespace vcount
