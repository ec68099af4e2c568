#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"
#include "vcount/evaluation.hpp"
#include "vcount/synth.hpp"

using namespace vcount;

namespace {

Detection det(const BoundingBox& b, double score = 0.9) { return {b, VehicleClass::Car, score, std::nullopt}; }

// Clipped area of `b` inside [0, w] x [0, h].
double clipped_area(const BoundingBox& b, double w, double h) {
  const double x0 = std::max(b.x_min, 0.0), x1 = std::min(b.x_max, w);
  const double y0 = std::max(b.y_min, 0.0), y1 = std::min(b.y_max, h);
  return (x1 > x0 && y1 > y0) ? (x1 - x0) * (y1 - y0) : 0.0;
}

}  // namespace

TEST(Match, IdenticalAllTruePositive) {
  const std::vector<BoundingBox> gt{{0, 0, 10, 10}, {20, 0, 30, 10}};
  const MatchResult r = match_detections({det(gt[0]), det(gt[1])}, gt);
  EXPECT_EQ(r.true_positives.size(), 2u);
  EXPECT_TRUE(r.false_positives.empty());
  EXPECT_TRUE(r.false_negatives.empty());
}

TEST(Match, NoDetections) {
  const MatchResult r = match_detections({}, {{0, 0, 1, 1}, {2, 2, 3, 3}, {4, 4, 5, 5}});
  EXPECT_EQ(r.false_negatives.size(), 3u);
  EXPECT_TRUE(r.true_positives.empty());
}

TEST(Match, FarDetectionIsFalsePositive) {
  const std::vector<BoundingBox> gt{{0, 0, 10, 10}, {20, 0, 30, 10}};
  const MatchResult r = match_detections({det({1, 0, 11, 10}), det({500, 500, 510, 510}), det({21, 1, 31, 11})}, gt);
  EXPECT_EQ(r.true_positives.size(), 2u);
  ASSERT_EQ(r.false_positives.size(), 1u);
  EXPECT_EQ(r.false_positives[0].box, (BoundingBox{500, 500, 510, 510}));
  EXPECT_TRUE(r.false_negatives.empty());
}

TEST(Match, ThresholdBoundaryCounts) {
  // IoU exactly 1/3.
  EXPECT_EQ(match_detections({det({5, 0, 15, 10})}, {{0, 0, 10, 10}}, 1.0 / 3.0).true_positives.size(), 1u);
  EXPECT_EQ(match_detections({det({5, 0, 15, 10})}, {{0, 0, 10, 10}}, 0.34).true_positives.size(), 0u);
}

TEST(Match, IdentitiesMonotonicityOptimality) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 3000; ++i) {
    std::vector<Detection> dets;
    std::vector<BoundingBox> gt;
    const std::size_t ng = rng() % 8, nd = rng() % 8;
    for (std::size_t k = 0; k < ng; ++k) gt.push_back(support::random_box(rng, 0.0, 60.0));
    for (std::size_t k = 0; k < nd; ++k)
      dets.push_back(det(k < ng && k % 2 == 0 ? translated(gt[k], 1.5, -1.0) : support::random_box(rng, 0.0, 60.0)));
    std::size_t prev_tp = SIZE_MAX;
    for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const MatchResult r = match_detections(dets, gt, t);
      ASSERT_EQ(r.true_positives.size() + r.false_negatives.size(), gt.size());
      ASSERT_EQ(r.true_positives.size() + r.false_positives.size(), dets.size());
      ASSERT_LE(r.true_positives.size(), prev_tp);
      prev_tp = r.true_positives.size();
      if (!gt.empty() && !dets.empty() && gt.size() <= 7 && dets.size() <= 7) {
        std::vector<BoundingBox> boxes;
        for (const auto& d : dets) boxes.push_back(d.box);
        ASSERT_EQ(r.true_positives.size(), oracle::brute_force_assignment(iou_cost(boxes, gt, t)).cardinality);
      }
    }
  }
}

TEST(Heatmap, EmptyAndSingleCell) {
  const HeatmapGrid blank(4, 3, 10.0);
  EXPECT_EQ(accumulate_heatmap(blank, {}).cells(), blank.cells());
  const HeatmapGrid g = accumulate_heatmap(blank, {{10, 20, 20, 30}});
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(g.at(c, r), (c == 1 && r == 2) ? 1.0 : 0.0);
}

TEST(Heatmap, OutsideContributesNothing) {
  const HeatmapGrid g = accumulate_heatmap(HeatmapGrid(4, 3, 10.0), {{100, 100, 120, 120}, {-50, -50, -10, -10}});
  EXPECT_EQ(g.total(), 0.0);
}

TEST(Heatmap, MassConservation) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 500; ++i) {
    HeatmapGrid grid(13, 7, 7.5);
    const double w = 13 * 7.5, h = 7 * 7.5;
    std::vector<BoundingBox> boxes;
    double expect = 0.0;
    for (int k = 0; k < 10; ++k) {
      const BoundingBox b = support::random_box(rng, -20.0, 120.0);
      boxes.push_back(b);
      expect += clipped_area(b, w, h) / (7.5 * 7.5);
    }
    const HeatmapGrid g = accumulate_heatmap(grid, boxes);
    ASSERT_NEAR(g.total(), expect, 1e-9);
    for (double v : g.cells()) ASSERT_GE(v, 0.0);
  }
}

TEST(Heatmap, CenterPointMode) {
  const HeatmapGrid g = accumulate_heatmap(HeatmapGrid(4, 3, 10.0), {{0, 0, 30, 30}, {100, 0, 110, 10}},
                                           HeatmapMode::CenterPoint);
  EXPECT_EQ(g.at(1, 1), 1.0);
  EXPECT_EQ(g.total(), 1.0);
}

TEST(Heatmap, SelfComparisonHasNoErrors) {
  const ScenarioPreset p = find_scenario("congestion_dwell");
  const GroundTruth gt = generate(p.scenario, p.zones, 3);
  const auto frames = gt.frames();
  const HeatmapSet set = build_heatmaps(frames, frames, HeatmapGrid(128, 72, 10.0));
  EXPECT_EQ(set.false_negatives.total(), 0.0);
  EXPECT_EQ(set.false_positives.total(), 0.0);
  EXPECT_GT(set.true_positives.total(), 0.0);
}

TEST(Heatmap, MissingFramesCountAsEmpty) {
  const std::vector<Frame> gt{{0, std::nullopt, {det({0, 0, 10, 10})}}, {1, std::nullopt, {det({0, 0, 10, 10})}}};
  const std::vector<Frame> dets{{1, std::nullopt, {det({0, 0, 10, 10})}}, {2, std::nullopt, {det({0, 0, 10, 10})}}};
  const HeatmapSet set = build_heatmaps(dets, gt, HeatmapGrid(2, 2, 10.0));
  EXPECT_EQ(set.false_negatives.total(), 1.0);
  EXPECT_EQ(set.false_positives.total(), 1.0);
  EXPECT_EQ(set.true_positives.total(), 1.0);
}

TEST(Heatmap, CsvAndPgm) {
  HeatmapGrid g = accumulate_heatmap(HeatmapGrid(3, 2, 10.0), {{0, 0, 10, 10}, {0, 0, 10, 10}, {20, 10, 25, 20}});
  std::ostringstream csv, pgm;
  write_grid_csv(csv, g);
  write_pgm(pgm, g);
  EXPECT_EQ(csv.str(), "2.0,0.0,0.0\n0.0,0.0,0.5\n");
  EXPECT_EQ(pgm.str(), "P2\n3 2\n255\n255 0 0\n0 0 64\n");
  std::ostringstream empty;
  write_pgm(empty, HeatmapGrid(2, 1, 1.0));
  EXPECT_EQ(empty.str(), "P2\n2 1\n255\n0 0\n");
}

TEST(Format, Numbers) {
  EXPECT_EQ(format_number(100.0), "100.0");
  EXPECT_EQ(format_number(92.277562), "92.277562");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.3333333333333333");
  EXPECT_EQ(format_percentage(std::nullopt), "NA");
}

TEST(Comparison, RowsAndGrouping) {
  const std::vector<RunCounts> runs{{"Daylight", "A and IOU", {92, 50}, {100, 50}},
                                    {"Night", "A and IOU", {0, 1}, {57, 0}},
                                    {"Daylight", "A and SORT", {113, 49}, {100, 50}}};
  const auto rows = build_comparison(runs);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].northbound_pct, 92.0);
  EXPECT_EQ(rows[1].combination, "A and SORT");
  EXPECT_EQ(rows[1].northbound_pct, 113.0);
  EXPECT_EQ(rows[2].condition, "Night");
  EXPECT_EQ(rows[2].northbound_pct, 0.0);
  EXPECT_FALSE(rows[2].southbound_pct);
  EXPECT_TRUE(build_comparison({}).empty());
}

TEST(Comparison, TableRowLayout) {
  const ComparisonRow row{"Daylight", "YOLOv4 and Deep SORT", 92.277562, 91.5865623};
  EXPECT_EQ(format_table_row(row), "Daylight | YOLOv4 and Deep SORT | 92.277562 | 91.5865623");
}

TEST(Comparison, SixteenRows) {
  std::vector<RunCounts> runs;
  for (const char* cond : {"Daylight", "Night"})
    for (const char* det : {"D1", "D2"})
      for (const char* trk : {"IOU", "KIOU", "SORT", "Deep SORT"})
        runs.push_back({cond, std::string(det) + " and " + trk, {1, 1}, {1, 1}});
  EXPECT_EQ(build_comparison(runs).size(), 16u);
}

TEST(Comparison, CsvRoundTrip) {
  const std::vector<ComparisonRow> rows{{"Daylight", "X and Y", 92.5, std::nullopt}, {"Rain", "X and Z", 100.0, 0.0}};
  std::ostringstream out;
  write_comparison_csv(out, rows);
  EXPECT_EQ(out.str(), std::string(kComparisonHeader) + "\nDaylight,X and Y,92.5,NA\nRain,X and Z,100.0,0.0\n");
  std::istringstream in(out.str());
  EXPECT_EQ(read_comparison_csv(in), rows);
}

TEST(Matrix, ZeroNoiseAllHundred) {
  const ScenarioPreset p = find_scenario("straight_two_lane");
  const GroundTruth gt = generate(p.scenario, p.zones, 1);
  std::vector<LabeledStream> streams{{"Daylight", "Synthetic", corrupt(gt, find_noise("zero"), 1), gt.counts, {}}};
  std::vector<TrackerSpec> trackers;
  for (TrackerKind k : {TrackerKind::Iou, TrackerKind::Kiou, TrackerKind::Sort, TrackerKind::DeepSort})
    trackers.push_back({std::string(display_name(k)), default_params(k), {}});
  const MatrixResult r = run_matrix(streams, trackers, p.zones);
  ASSERT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.northbound_pct, 100.0);
    EXPECT_EQ(row.southbound_pct, 100.0);
  }
  EXPECT_EQ(r.rows[3].combination, "Synthetic and Deep SORT");
  EXPECT_TRUE(run_matrix({}, trackers, p.zones).rows.empty());
}

TEST(Matrix, IndependentOfJobs) {
  std::vector<LabeledStream> streams;
  for (const auto& p : scenario_library()) {
    const GroundTruth gt = generate(p.scenario, p.zones, 2);
    streams.push_back({p.name, "Synthetic", corrupt(gt, find_noise("rain"), 2), gt.counts, p.zones});
  }
  std::vector<TrackerSpec> trackers;
  for (TrackerKind k : {TrackerKind::Iou, TrackerKind::Kiou, TrackerKind::Sort, TrackerKind::DeepSort})
    trackers.push_back({std::string(display_name(k)), default_params(k), {}});
  const MatrixResult a = run_matrix(streams, trackers, {}, {}, 1);
  const MatrixResult b = run_matrix(streams, trackers, {}, {}, 7);
  EXPECT_EQ(a.rows, b.rows);
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].tracks, b.runs[i].tracks);
    EXPECT_EQ(a.runs[i].counts, b.runs[i].counts);
  }
}
