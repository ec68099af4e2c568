#include "vcount/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "vcount/assignment.hpp"
#include "vcount/error.hpp"
#include "vcount/geometry.hpp"

namespace vcount {

MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<BoundingBox>& gt,
                             double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
    throw ValidationError("match IoU threshold must lie in (0, 1]");
  MatchResult result;
  if (dets.empty() || gt.empty()) {
    result.false_positives = dets;
    result.false_negatives = gt;
    return result;
  }
  std::vector<BoundingBox> det_boxes;
  det_boxes.reserve(dets.size());
  for (const auto& d : dets) det_boxes.push_back(d.box);

  const Assignment pairs = solve_assignment(iou_cost(det_boxes, gt, iou_threshold));
  std::vector<char> det_used(dets.size(), 0), gt_used(gt.size(), 0);
  for (const auto& [d, g] : pairs) {
    det_used[d] = gt_used[g] = 1;
    result.true_positives.emplace_back(dets[d], gt[g]);
  }
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (!det_used[i]) result.false_positives.push_back(dets[i]);
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (!gt_used[i]) result.false_negatives.push_back(gt[i]);
  return result;
}

HeatmapGrid::HeatmapGrid(std::size_t width, std::size_t height, double cell_size)
    : width_(width), height_(height), cell_size_(cell_size), cells_(width * height, 0.0) {
  if (width == 0 || height == 0) throw ValidationError("heat-map grid needs at least one cell per axis");
  if (!std::isfinite(cell_size) || cell_size <= 0.0) throw ValidationError("heat-map cell size must be positive");
}

double HeatmapGrid::total() const noexcept {
  double sum = 0.0;
  for (double v : cells_) sum += v;
  return sum;
}

double HeatmapGrid::max() const noexcept {
  return cells_.empty() ? 0.0 : *std::max_element(cells_.begin(), cells_.end());
}

void HeatmapGrid::add_footprint(const BoundingBox& box) noexcept {
  const double cs = cell_size_;
  const double x0 = std::max(box.x_min, 0.0), x1 = std::min(box.x_max, cs * static_cast<double>(width_));
  const double y0 = std::max(box.y_min, 0.0), y1 = std::min(box.y_max, cs * static_cast<double>(height_));
  if (x0 >= x1 || y0 >= y1) return;
  const auto c0 = static_cast<std::size_t>(std::floor(x0 / cs));
  const auto r0 = static_cast<std::size_t>(std::floor(y0 / cs));
  const auto c1 = std::min(width_, static_cast<std::size_t>(std::ceil(x1 / cs)));
  const auto r1 = std::min(height_, static_cast<std::size_t>(std::ceil(y1 / cs)));
  const double unit = cs * cs;
  for (std::size_t r = r0; r < r1; ++r) {
    const double oy = std::min(y1, cs * static_cast<double>(r + 1)) - std::max(y0, cs * static_cast<double>(r));
    if (oy <= 0.0) continue;
    for (std::size_t c = c0; c < c1; ++c) {
      const double ox = std::min(x1, cs * static_cast<double>(c + 1)) - std::max(x0, cs * static_cast<double>(c));
      if (ox > 0.0) cells_[r * width_ + c] += ox * oy / unit;
    }
  }
}

void HeatmapGrid::add_point(Point p) noexcept {
  if (!(p.x >= 0.0) || !(p.y >= 0.0)) return;
  const double c = std::floor(p.x / cell_size_), r = std::floor(p.y / cell_size_);
  if (c >= static_cast<double>(width_) || r >= static_cast<double>(height_)) return;
  cells_[static_cast<std::size_t>(r) * width_ + static_cast<std::size_t>(c)] += 1.0;
}

HeatmapGrid accumulate_heatmap(HeatmapGrid grid, const std::vector<BoundingBox>& boxes, HeatmapMode mode) {
  for (const auto& b : boxes) {
    if (mode == HeatmapMode::Footprint)
      grid.add_footprint(b);
    else
      grid.add_point(box_center(b));
  }
  return grid;
}

HeatmapSet build_heatmaps(const std::vector<Frame>& detections, const std::vector<Frame>& ground_truth,
                          const HeatmapGrid& blank, double iou_threshold, HeatmapMode mode) {
  HeatmapSet set{blank, blank, blank};
  std::map<std::int64_t, std::pair<const Frame*, const Frame*>> paired;
  for (const auto& f : detections) paired[f.index].first = &f;
  for (const auto& f : ground_truth) paired[f.index].second = &f;

  static const std::vector<Detection> none;
  for (const auto& [index, frames] : paired) {
    const auto& dets = frames.first ? frames.first->detections : none;
    std::vector<BoundingBox> gt;
    if (frames.second)
      for (const auto& d : frames.second->detections) gt.push_back(d.box);
    MatchResult m = match_detections(dets, gt, iou_threshold);

    std::vector<BoundingBox> tp, fp;
    for (const auto& [det, truth] : m.true_positives) tp.push_back(det.box);
    for (const auto& det : m.false_positives) fp.push_back(det.box);
    set.false_negatives = accumulate_heatmap(std::move(set.false_negatives), m.false_negatives, mode);
    set.false_positives = accumulate_heatmap(std::move(set.false_positives), fp, mode);
    set.true_positives = accumulate_heatmap(std::move(set.true_positives), tp, mode);
  }
  return set;
}

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, end);
  if (std::isfinite(value) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string format_percentage(const std::optional<double>& pct) {
  return pct ? format_number(*pct) : std::string("NA");
}

void write_grid_csv(std::ostream& out, const HeatmapGrid& grid) {
  for (std::size_t r = 0; r < grid.height(); ++r) {
    for (std::size_t c = 0; c < grid.width(); ++c) {
      if (c) out << ',';
      out << format_number(grid.at(c, r));
    }
    out << '\n';
  }
}

void write_pgm(std::ostream& out, const HeatmapGrid& grid) {
  const double peak = grid.max();
  out << "P2\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  for (std::size_t r = 0; r < grid.height(); ++r) {
    for (std::size_t c = 0; c < grid.width(); ++c) {
      if (c) out << ' ';
      const long level = peak > 0.0 ? std::lround(255.0 * grid.at(c, r) / peak) : 0;
      out << level;
    }
    out << '\n';
  }
}

std::vector<ComparisonRow> build_comparison(const std::vector<RunCounts>& runs) {
  std::vector<std::string> conditions;
  for (const auto& run : runs)
    if (std::find(conditions.begin(), conditions.end(), run.condition) == conditions.end())
      conditions.push_back(run.condition);

  std::vector<ComparisonRow> rows;
  rows.reserve(runs.size());
  for (const auto& condition : conditions) {
    for (const auto& run : runs) {
      if (run.condition != condition) continue;
      rows.push_back({run.condition, run.combination, count_percentage(run.automatic[0], run.ground_truth[0]),
                      count_percentage(run.automatic[1], run.ground_truth[1])});
    }
  }
  return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << kComparisonHeader << '\n';
  for (const auto& row : rows) {
    if (row.condition.find(',') != std::string::npos || row.combination.find(',') != std::string::npos)
      throw ValidationError("comparison labels must not contain commas");
    out << row.condition << ',' << row.combination << ',' << format_percentage(row.northbound_pct) << ','
        << format_percentage(row.southbound_pct) << '\n';
  }
}

std::vector<ComparisonRow> read_comparison_csv(std::istream& in) {
  std::vector<ComparisonRow> rows;
  std::string line;
  std::size_t n = 0;
  auto parse_pct = [&](const std::string& field) -> std::optional<double> {
    if (field == "NA") return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) throw StreamError(n, "bad percentage '" + field + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1) {
      if (line != kComparisonHeader) throw StreamError(n, std::string("expected header '") + kComparisonHeader + "'");
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cond, combo, north, south;
    if (!std::getline(ss, cond, ',') || !std::getline(ss, combo, ',') || !std::getline(ss, north, ',') ||
        !std::getline(ss, south))
      throw StreamError(n, "expected four comma-separated fields");
    rows.push_back({cond, combo, parse_pct(north), parse_pct(south)});
  }
  return rows;
}

std::string format_table_row(const ComparisonRow& row) {
  return row.condition + " | " + row.combination + " | " + format_percentage(row.northbound_pct) + " | " +
         format_percentage(row.southbound_pct);
}

MatrixResult run_matrix(const std::vector<LabeledStream>& streams, const std::vector<TrackerSpec>& trackers,
                        const std::vector<Zone>& zones, const CountOptions& count_options, unsigned jobs) {
  validate_zones(zones);
  for (const auto& s : streams)
    if (s.zones) validate_zones(*s.zones);
  MatrixResult result;
  const std::size_t total = streams.size() * trackers.size();
  result.runs.resize(total);

  auto run_one = [&](std::size_t k) {
    const std::size_t s = k / trackers.size(), t = k % trackers.size();
    MatrixRun& run = result.runs[k];
    run.stream = s;
    run.tracker = t;
    run.condition = streams[s].condition;
    run.combination = streams[s].detector + " and " + trackers[t].label;
    run.tracks = run_tracker(trackers[t].params, streams[s].frames, trackers[t].options, &run.stats);
    run.counts = count_tracks(run.tracks, streams[s].zones ? *streams[s].zones : zones, count_options);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(total)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < total; ++k) run_one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(total);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < total;) {
          try {
            run_one(k);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<RunCounts> counts;
  counts.reserve(total);
  for (const auto& run : result.runs) {
    const CountReport& gt = streams[run.stream].ground_truth;
    counts.push_back({run.condition,
                      run.combination,
                      {run.counts.total(Direction::Northbound), run.counts.total(Direction::Southbound)},
                      {gt.total(Direction::Northbound), gt.total(Direction::Southbound)}});
  }
  result.rows = build_comparison(counts);
  return result;
}

}  // namespace vcount
