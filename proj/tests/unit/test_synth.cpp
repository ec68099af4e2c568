#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "vcount/counting.hpp"
#include "vcount/error.hpp"
#include "vcount/geometry.hpp"
#include "vcount/stream_io.hpp"
#include "vcount/synth.hpp"
#include "vcount/trackers.hpp"

using namespace vcount;

namespace {

double dot(const Embedding& a, const Embedding& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string dump(const std::vector<Frame>& frames) {
  std::ostringstream out;
  write_stream(out, frames);
  return out.str();
}

double mean_detections(const std::vector<Frame>& frames) {
  double n = 0.0;
  for (const auto& f : frames) n += static_cast<double>(f.detections.size());
  return frames.empty() ? 0.0 : n / static_cast<double>(frames.size());
}

struct Stats {
  double mean, se;
};

Stats over_seeds(const ScenarioPreset& p, const NoiseModel& noise) {
  std::vector<double> v;
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    v.push_back(mean_detections(corrupt(generate(p.scenario, p.zones, seed), noise, seed)));
  double m = 0.0, var = 0.0;
  for (double x : v) m += x;
  m /= 50.0;
  for (double x : v) var += (x - m) * (x - m);
  return {m, std::sqrt(var / 49.0 / 50.0)};
}

Scenario one_lane(double x0, double y0, double x1, double y1) {
  Scenario s;
  s.name = "custom";
  s.duration = 200;
  s.lanes.push_back({"up", Direction::Northbound, {{x0, y0}, {x1, y1}}, 0.0, std::nullopt});
  return s;
}

}  // namespace

TEST(Rng, DeterministicAndInRange) {
  Rng a(5, 1, 9), b(5, 1, 9), c(5, 2, 9);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    ASSERT_EQ(x, b.uniform());
    ASSERT_GT(x, 0.0);
    ASSERT_LE(x, 1.0);
    differs = differs || x != c.uniform();
  }
  EXPECT_TRUE(differs);
  EXPECT_NEAR(l2_norm(a.unit_vector()), 1.0, 1e-12);
  EXPECT_FALSE(a.bernoulli(0.0));
  EXPECT_TRUE(a.bernoulli(1.0));
}

TEST(Rng, PoissonMean) {
  Rng r(1, 0, 0);
  for (double mean : {0.5, 4.0, 50.0}) {
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) sum += r.poisson(mean);
    EXPECT_NEAR(sum / 20000.0, mean, 4.0 * std::sqrt(mean / 20000.0));
  }
  EXPECT_EQ(r.poisson(0.0), 0u);
}

TEST(Generate, EmptySchedule) {
  Scenario s = one_lane(100, 700, 100, 10);
  const GroundTruth gt = generate(s, {}, 1);
  EXPECT_TRUE(gt.identities.empty());
  EXPECT_EQ(gt.counts.total(), 0u);
  EXPECT_EQ(gt.frames().size(), 200u);
}

TEST(Generate, OneCarThroughNorthZone) {
  Scenario s = one_lane(100, 700, 100, 10);
  s.spawns.push_back({0, 0, VehicleClass::Car, 5.0, 0.0, 0.0});
  const std::vector<Zone> zones{
      {"gate", Direction::Northbound, Polygon({{50, 300}, {150, 300}, {150, 400}, {50, 400}})}};
  const GroundTruth gt = generate(s, zones, 1);
  ASSERT_EQ(gt.identities.size(), 1u);
  EXPECT_EQ(gt.counts.count(Direction::Northbound, VehicleClass::Car), 1u);
  EXPECT_EQ(gt.counts.total(), 1u);
  // Constant speed along the lane.
  const auto& boxes = gt.identities[0].boxes;
  for (std::size_t i = 1; i < boxes.size(); ++i) {
    ASSERT_EQ(boxes[i].frame, boxes[i - 1].frame + 1);
    ASSERT_NEAR(box_center(boxes[i - 1].box).y - box_center(boxes[i].box).y, 5.0, 1e-9);
  }
}

TEST(Generate, LaneOutsideImageNamesLane) {
  Scenario s = one_lane(100, 700, 100, 10);
  s.lanes.push_back({"runaway", Direction::Southbound, {{200, 10}, {200, 900}}, 0.0, std::nullopt});
  try {
    generate(s, {}, 1);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("runaway"), std::string::npos);
  }
}

TEST(Generate, OppositeDirectionZoneNamesLane) {
  Scenario s = one_lane(100, 700, 100, 10);
  s.spawns.push_back({0, 0, VehicleClass::Car, 5.0, 0.0, 0.0});
  const std::vector<Zone> zones{
      {"gate", Direction::Southbound, Polygon({{50, 300}, {150, 300}, {150, 400}, {50, 400}})}};
  try {
    generate(s, zones, 1);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("up"), std::string::npos);
  }
}

TEST(Generate, DeterministicPresets) {
  for (const auto& p : scenario_library()) {
    EXPECT_NO_THROW(p.scenario.validate()) << p.name;
    const GroundTruth a = generate(p.scenario, p.zones, 42), b = generate(p.scenario, p.zones, 42);
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_EQ(dump(a.frames()), dump(b.frames()));
    const NoiseModel n = find_noise(p.noise);
    EXPECT_EQ(dump(corrupt(a, n, 42)), dump(corrupt(b, n, 42))) << p.name;
    EXPECT_GT(a.counts.total(), 0u) << p.name;
  }
}

TEST(Generate, RequiredPresetsExist) {
  std::set<std::string> names;
  for (const auto& p : scenario_library()) names.insert(p.name);
  for (const char* n : {"straight_two_lane", "crossing_occlusion", "congestion_dwell", "night_sparse"})
    EXPECT_TRUE(names.count(n)) << n;
  EXPECT_THROW(find_scenario("nope"), ConfigError);
  EXPECT_THROW(find_noise("fog"), ConfigError);
}

TEST(Corrupt, ZeroNoiseIsGroundTruth) {
  for (const auto& p : scenario_library()) {
    const GroundTruth gt = generate(p.scenario, p.zones, 3);
    const auto frames = corrupt(gt, find_noise("zero"), 3);
    const auto truth = gt.boxes_by_frame();
    const auto embeddings = identity_embeddings(gt.identities.size(), 3);
    ASSERT_EQ(frames.size(), truth.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
      ASSERT_EQ(frames[f].detections.size(), truth[f].size());
      for (std::size_t k = 0; k < truth[f].size(); ++k) {
        const Detection& d = frames[f].detections[k];
        const std::size_t id = truth[f][k].first;
        ASSERT_EQ(d.box, truth[f][k].second);
        ASSERT_EQ(d.score, 1.0);
        ASSERT_EQ(d.cls, gt.identities[id].cls);
        ASSERT_TRUE(d.embedding);
        ASSERT_EQ(*d.embedding, embeddings[id]);
      }
    }
  }
}

TEST(Corrupt, MissRateOneEmptiesEveryFrame) {
  const ScenarioPreset p = find_scenario("straight_two_lane");
  NoiseModel n;
  n.miss_rate = 1.0;
  for (const auto& f : corrupt(generate(p.scenario, p.zones, 1), n, 1)) ASSERT_TRUE(f.detections.empty());
}

TEST(Corrupt, DuplicateRateOneDoubles) {
  const ScenarioPreset p = find_scenario("congestion_dwell");
  NoiseModel n;
  n.duplicate_rate = 1.0;
  n.jitter_sigma = 1.0;
  const GroundTruth gt = generate(p.scenario, p.zones, 1);
  const auto frames = corrupt(gt, n, 1);
  const auto truth = gt.boxes_by_frame();
  for (std::size_t f = 0; f < frames.size(); ++f) ASSERT_EQ(frames[f].detections.size(), 2 * truth[f].size());
}

TEST(Corrupt, DetectionsValid) {
  for (const auto& p : scenario_library())
    for (const auto& [name, noise] : noise_library()) {
      NoiseModel n = noise;
      n.fp_rate = std::max(n.fp_rate, 1.0);
      for (const auto& f : corrupt(generate(p.scenario, p.zones, 8), n, 8))
        for (const auto& d : f.detections) {
          ASSERT_TRUE(is_valid(d.box));
          ASSERT_GE(d.score, 0.0);
          ASSERT_LE(d.score, 1.0);
          ASSERT_NEAR(l2_norm(*d.embedding), 1.0, 1e-9);
        }
    }
}

TEST(Corrupt, NoiseMonotonicity) {
  const ScenarioPreset p = find_scenario("straight_two_lane");
  NoiseModel base = find_noise("daylight");
  std::optional<Stats> prev;
  for (double miss : {0.0, 0.1, 0.3, 0.6}) {
    NoiseModel n = base;
    n.miss_rate = miss;
    const Stats s = over_seeds(p, n);
    if (prev) EXPECT_LE(s.mean, prev->mean + 3.0 * std::hypot(s.se, prev->se)) << miss;
    prev = s;
  }
  prev.reset();
  for (double fp : {0.0, 0.2, 1.0, 3.0}) {
    NoiseModel n = base;
    n.fp_rate = fp;
    const Stats s = over_seeds(p, n);
    if (prev) EXPECT_GE(s.mean, prev->mean - 3.0 * std::hypot(s.se, prev->se)) << fp;
    prev = s;
  }
}

TEST(Embeddings, FidelityOnCrossingPreset) {
  const ScenarioPreset p = find_scenario("crossing_occlusion");
  const GroundTruth gt = generate(p.scenario, p.zones, 4);
  const auto frames = corrupt(gt, find_noise("zero"), 4);
  const auto truth = gt.boxes_by_frame();
  std::map<std::size_t, Embedding> seen;
  for (std::size_t f = 0; f < frames.size(); ++f)
    for (std::size_t k = 0; k < truth[f].size(); ++k) {
      const Embedding& e = *frames[f].detections[k].embedding;
      auto [it, fresh] = seen.emplace(truth[f][k].first, e);
      if (!fresh) ASSERT_NEAR(1.0 - dot(it->second, e), 0.0, 1e-12);
    }
  ASSERT_EQ(seen.size(), gt.identities.size());
  for (auto a = seen.begin(); a != seen.end(); ++a)
    for (auto b = std::next(a); b != seen.end(); ++b) ASSERT_NEAR(1.0 - dot(a->second, b->second), 1.0, 1e-12);
}

TEST(Embeddings, NoiseRotatesByAngle) {
  const ScenarioPreset p = find_scenario("straight_two_lane");
  const GroundTruth gt = generate(p.scenario, p.zones, 6);
  NoiseModel n;
  n.embedding_noise = 0.1;
  const auto frames = corrupt(gt, n, 6);
  const auto truth = gt.boxes_by_frame();
  const auto base = identity_embeddings(gt.identities.size(), 6);
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < frames.size(); ++f)
    for (std::size_t k = 0; k < truth[f].size(); ++k) {
      const double angle = std::acos(std::clamp(dot(*frames[f].detections[k].embedding, base[truth[f][k].first]), -1.0, 1.0));
      sum_sq += angle * angle;
      ++count;
    }
  ASSERT_GT(count, 100u);
  EXPECT_NEAR(std::sqrt(sum_sq / static_cast<double>(count)), 0.1, 0.01);
}

TEST(Embeddings, BlocksAreOrthonormal) {
  const auto e = identity_embeddings(130, 9);
  for (std::size_t i = 0; i < 128; ++i) {
    ASSERT_NEAR(dot(e[i], e[i]), 1.0, 1e-12);
    for (std::size_t j = i + 1; j < 128; ++j) ASSERT_NEAR(dot(e[i], e[j]), 0.0, 1e-12);
  }
  EXPECT_NEAR(dot(e[128], e[129]), 0.0, 1e-12);
}

TEST(CrossingPreset, OcclusionWindow) {
  const ScenarioPreset p = find_scenario("crossing_occlusion");
  const GroundTruth gt = generate(p.scenario, p.zones, 0);
  NoiseModel n = find_noise("zero");
  n.occlusion_iou = 0.8;
  const auto frames = corrupt(gt, n, 0);
  const auto truth = gt.boxes_by_frame();
  std::vector<std::int64_t> occluded;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    // Geometric check: boxes whose IoU with a larger-or-equal box exceeds the threshold vanish.
    std::size_t hidden = 0;
    for (std::size_t a = 0; a < truth[f].size(); ++a)
      for (std::size_t b = a + 1; b < truth[f].size(); ++b)
        if (iou(truth[f][a].second, truth[f][b].second) > 0.8) ++hidden;
    ASSERT_EQ(frames[f].detections.size() + hidden, truth[f].size()) << "frame " << f;
    if (hidden) {
      EXPECT_EQ(hidden, 2u) << "frame " << f;  // one per crossing pair
      occluded.push_back(static_cast<std::int64_t>(f));
    }
  }
  // Two consecutive occluded frames per spawn wave.
  EXPECT_EQ(occluded, (std::vector<std::int64_t>{87, 88, 127, 128, 167, 168, 207, 208}));
  n.occlusion_iou = 1.0;
  EXPECT_EQ(corrupt(gt, n, 0).at(87).detections.size(), truth[87].size());
}

TEST(BenchStream, EightPerFrame) {
  const auto frames = bench_stream(500, 8, 1);
  ASSERT_EQ(frames.size(), 500u);
  for (const auto& f : frames) {
    ASSERT_EQ(f.detections.size(), 8u);
    for (const auto& d : f.detections) ASSERT_TRUE(is_valid(d.box));
  }
  EXPECT_EQ(dump(frames), dump(bench_stream(500, 8, 1)));
}

TEST(NoiseModel, Validation) {
  NoiseModel n;
  n.miss_rate = 1.5;
  EXPECT_THROW(n.validate(), ConfigError);
  n = {};
  n.fp_rate = -1.0;
  EXPECT_THROW(n.validate(), ConfigError);
  n = {};
  n.jitter_sigma = INFINITY;
  EXPECT_THROW(n.validate(), ConfigError);
}
