#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "vcount/core.hpp"
#include "vcount/kalman.hpp"

namespace vcount {

// How a track that stopped being extended is judged worth keeping.
//   Or:  max score >= sigma_h  or  measured length >= min_size
//   And: both
enum class FinishRule { Or, And };

std::string_view to_string(FinishRule rule) noexcept;
FinishRule parse_finish_rule(std::string_view text);

struct IouParams {
  double sigma_l = 0.0;    // detections below this score are ignored
  double sigma_h = 0.5;    // a kept track needs one detection at least this confident...
  double sigma_iou = 0.5;  // minimum overlap to extend a track
  int min_size = 2;        // ...or at least this many measured frames
  FinishRule finish_rule = FinishRule::Or;

  void validate() const;
};

struct KiouParams {
  IouParams iou;
  int ttl = 3;   // consecutive unmatched processed frames a track may coast
  int skip = 2;  // only every (skip + 1)-th frame is associated
  KalmanConfig kalman;

  void validate() const;
};

struct SortParams {
  double iou_min = 0.3;
  int max_age = 1;   // frames a track may go unmatched before termination
  int min_hits = 1;  // measured frames before a track is reported
  KalmanConfig kalman;

  void validate() const;
};

struct DeepSortParams {
  SortParams sort{0.1, 30, 1, {}};
  double lambda_motion = 0.5;  // weight of (1 - IoU) against cosine distance
  double cos_max = 0.4;
  int gallery_budget = 100;

  void validate() const;
};

enum class TrackerKind { Iou, Kiou, Sort, DeepSort };

std::string_view to_string(TrackerKind kind) noexcept;
std::string_view display_name(TrackerKind kind) noexcept;  // "IOU", "KIOU", "SORT", "Deep SORT"
TrackerKind parse_tracker_kind(std::string_view text);

using TrackerParams = std::variant<IouParams, KiouParams, SortParams, DeepSortParams>;

TrackerKind kind_of(const TrackerParams& params) noexcept;
TrackerParams default_params(TrackerKind kind);

// One detection taken by one track in the latest step; `detection` indexes
// the frame's original detection list.
struct Absorption {
  std::int64_t track_id;
  std::size_t detection;
};

struct TrackerStats {
  std::size_t frames = 0;
  std::size_t tracks_created = 0;
  std::size_t tracks_finished = 0;  // kept by the finish rule
};

// Consumes frames in increasing index order; finished tracks are returned
// by flush() sorted by id. A tracker instance serves exactly one stream.
class Tracker {
public:
  virtual ~Tracker() = default;

  virtual TrackerKind kind() const noexcept = 0;

  // Throws SequencingError when frame.index does not exceed the previous one
  // or when called after flush().
  virtual void step(const Frame& frame) = 0;

  // Finishes every active track. Idempotent.
  virtual std::vector<Track> flush() = 0;

  virtual std::size_t active_count() const noexcept = 0;

  const std::vector<Absorption>& last_absorptions() const noexcept { return absorptions_; }
  const TrackerStats& stats() const noexcept { return stats_; }

protected:
  void begin_step(const Frame& frame);

  std::vector<Absorption> absorptions_;
  TrackerStats stats_;
  std::optional<std::int64_t> last_index_;
  std::optional<std::int64_t> first_index_;
  bool flushed_ = false;
};

std::unique_ptr<Tracker> make_tracker(const TrackerParams& params);

struct TrackerOptions {
  bool nms = false;
  double nms_iou = 0.9;
};

// Drops the lower-scored of any two detections overlapping by more than
// `iou_threshold` (ties keep the earlier detection).
Frame suppress_duplicates(const Frame& frame, double iou_threshold);

std::vector<Track> run_tracker(const TrackerParams& params, const std::vector<Frame>& frames,
                               const TrackerOptions& options = {}, TrackerStats* stats = nullptr);

// Minimum cosine distance between `query` and any gallery entry.
double min_cosine_distance(const Embedding& query, const std::deque<Embedding>& gallery) noexcept;

}  // namespace vcount
