#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vcount/core.hpp"
#include "vcount/counting.hpp"
#include "vcount/trackers.hpp"

namespace vcount {

struct MatchResult {
  std::vector<std::pair<Detection, BoundingBox>> true_positives;
  std::vector<Detection> false_positives;
  std::vector<BoundingBox> false_negatives;
};

inline constexpr double kDefaultMatchIou = 0.5;

// Optimal one-to-one matching on 1 - IoU; pairs with IoU below the
// threshold are never matched (IoU equal to the threshold is a match).
MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<BoundingBox>& gt,
                             double iou_threshold = kDefaultMatchIou);

enum class HeatmapMode { Footprint, CenterPoint };

// Row-major accumulator of width x height square cells of `cell_size` pixels.
class HeatmapGrid {
public:
  HeatmapGrid(std::size_t width, std::size_t height, double cell_size);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  double cell_size() const noexcept { return cell_size_; }

  double at(std::size_t col, std::size_t row) const noexcept { return cells_[row * width_ + col]; }
  const std::vector<double>& cells() const noexcept { return cells_; }
  double total() const noexcept;
  double max() const noexcept;

  // Adds the box's overlap with each cell, in cell-area units.
  void add_footprint(const BoundingBox& box) noexcept;
  void add_point(Point p) noexcept;

private:
  std::size_t width_;
  std::size_t height_;
  double cell_size_;
  std::vector<double> cells_;
};

HeatmapGrid accumulate_heatmap(HeatmapGrid grid, const std::vector<BoundingBox>& boxes,
                               HeatmapMode mode = HeatmapMode::Footprint);

struct HeatmapSet {
  HeatmapGrid false_negatives;
  HeatmapGrid false_positives;
  HeatmapGrid true_positives;
};

// Frame-by-frame matching of a detection stream against a ground-truth
// stream (frames are paired by index; a missing frame counts as empty).
HeatmapSet build_heatmaps(const std::vector<Frame>& detections, const std::vector<Frame>& ground_truth,
                          const HeatmapGrid& blank, double iou_threshold = kDefaultMatchIou,
                          HeatmapMode mode = HeatmapMode::Footprint);

void write_grid_csv(std::ostream& out, const HeatmapGrid& grid);
// Plain graymap scaled so the grid maximum maps to 255.
void write_pgm(std::ostream& out, const HeatmapGrid& grid);

// Shortest decimal that round-trips; integral values keep a ".0".
std::string format_number(double value);
std::string format_percentage(const std::optional<double>& pct);  // "NA" when undefined

struct ComparisonRow {
  std::string condition;
  std::string combination;
  std::optional<double> northbound_pct;
  std::optional<double> southbound_pct;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct RunCounts {
  std::string condition;
  std::string combination;
  std::array<std::size_t, 2> automatic{};     // indexed by Direction
  std::array<std::size_t, 2> ground_truth{};  // indexed by Direction
};

// One row per run, grouped by condition (first-appearance order), input
// order kept within a group.
std::vector<ComparisonRow> build_comparison(const std::vector<RunCounts>& runs);

inline constexpr const char* kComparisonHeader = "condition,combination,northbound_pct,southbound_pct";
void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);
std::vector<ComparisonRow> read_comparison_csv(std::istream& in);
std::string format_table_row(const ComparisonRow& row);  // "Daylight | X and Y | 92.27 | 91.58"

struct LabeledStream {
  std::string condition;
  std::string detector;
  std::vector<Frame> frames;
  CountReport ground_truth;
  std::optional<std::vector<Zone>> zones;  // overrides the matrix-wide zones
};

struct TrackerSpec {
  std::string label;  // e.g. "Deep SORT"
  TrackerParams params;
  TrackerOptions options;
};

struct MatrixRun {
  std::size_t stream = 0;
  std::size_t tracker = 0;
  std::string condition;
  std::string combination;
  std::vector<Track> tracks;
  CountReport counts;
  TrackerStats stats;
};

struct MatrixResult {
  std::vector<ComparisonRow> rows;
  std::vector<MatrixRun> runs;  // stream-major, tracker-minor
};

// Every stream x tracker pair, tracked, counted and compared against the
// stream's ground truth. Output is independent of `jobs`.
MatrixResult run_matrix(const std::vector<LabeledStream>& streams, const std::vector<TrackerSpec>& trackers,
                        const std::vector<Zone>& zones, const CountOptions& count_options = {},
                        unsigned jobs = 1);

}  // namespace vcount
