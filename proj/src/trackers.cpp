#include "vcount/trackers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "vcount/assignment.hpp"
#include "vcount/error.hpp"
#include "vcount/geometry.hpp"

namespace vcount {
namespace {

void require_unit(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0)
    throw ConfigError(std::string(name) + " must lie in [0, 1]");
}

void require_positive(int v, const char* name) {
  if (v < 1) throw ConfigError(std::string(name) + " must be a positive integer");
}

// Track under construction plus the per-class vote used for majority class.
struct TrackBuilder {
  Track track;
  std::array<std::uint32_t, 2> votes{};

  TrackBuilder(std::int64_t id, std::int64_t frame, const Detection& det) {
    track.id = id;
    absorb(frame, det);
  }

  void absorb(std::int64_t frame, const Detection& det) {
    track.boxes.push_back({frame, det.box, BoxSource::Measured});
    track.max_score = std::max(track.max_score, det.score);
    track.cls = det.cls;
    ++votes[static_cast<std::size_t>(det.cls)];
  }

  void coast(std::int64_t frame, const BoundingBox& box) {
    track.boxes.push_back({frame, box, BoxSource::Predicted});
  }

  std::size_t measured() const noexcept { return votes[0] + votes[1]; }

  // Trailing predictions carry no evidence and are dropped.
  Track finish() && {
    while (!track.boxes.empty() && track.boxes.back().predicted()) track.boxes.pop_back();
    const auto car = votes[0], truck = votes[1];
    track.majority_class = car > truck ? VehicleClass::Car
                           : truck > car ? VehicleClass::Truck
                                         : track.cls;  // tie: latest class
    track.status = TrackStatus::Finished;
    return std::move(track);
  }
};

bool passes_finish_rule(const IouParams& p, double max_score, std::size_t measured) {
  const bool confident = max_score >= p.sigma_h;
  const bool long_enough = measured >= static_cast<std::size_t>(p.min_size);
  return p.finish_rule == FinishRule::Or ? (confident || long_enough) : (confident && long_enough);
}

std::optional<BoundingBox> box_of(const KalmanState& st) {
  try {
    BoundingBox b = state_to_box(st);
    if (is_valid(b)) return b;
  } catch (const DegenerateStateError&) {
  }
  return std::nullopt;
}

// Index into `pool` of the detection overlapping `tail` most; first wins ties.
std::pair<std::size_t, double> best_overlap(const BoundingBox& tail, const std::vector<std::size_t>& pool,
                                            const std::vector<Detection>& dets) {
  std::size_t best = pool.size();
  double best_iou = -1.0;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    double v = iou(tail, dets[pool[k]].box);
    if (v > best_iou) {
      best_iou = v;
      best = k;
    }
  }
  return {best, best_iou};
}

// Greedy IOU tracker. Active tracks are visited in ascending id.
//
// The published pseudo-code guards the finish branch with
// "if empty(T_u) or t_i is not last(T_u)"; read literally that also fires
// for a track appended to T_u moments earlier whenever it is not the last
// element, and it cannot distinguish an unextended track once T_u is
// non-empty. The intent, and what is implemented, is: any active track not
// extended in this frame is finished and then kept or dropped by the rule.
class IouTracker final : public Tracker {
public:
  explicit IouTracker(IouParams p) : p_(p) { p_.validate(); }

  TrackerKind kind() const noexcept override { return TrackerKind::Iou; }
  std::size_t active_count() const noexcept override { return active_.size(); }

  void step(const Frame& frame) override {
    begin_step(frame);
    const auto& dets = frame.detections;

    pool_.clear();
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (dets[i].score >= p_.sigma_l) pool_.push_back(i);

    updated_.clear();
    for (auto& t : active_) {
      bool extended = false;
      if (!pool_.empty()) {
        auto [k, best_iou] = best_overlap(t.track.boxes.back().box, pool_, dets);
        if (best_iou >= p_.sigma_iou) {
          t.absorb(frame.index, dets[pool_[k]]);
          absorptions_.push_back({t.track.id, pool_[k]});
          pool_.erase(pool_.begin() + static_cast<std::ptrdiff_t>(k));
          extended = true;
        }
      }
      if (extended)
        updated_.push_back(std::move(t));
      else
        finish(std::move(t));
    }
    for (std::size_t i : pool_) {
      updated_.emplace_back(next_id_++, frame.index, dets[i]);
      absorptions_.push_back({updated_.back().track.id, i});
      ++stats_.tracks_created;
    }
    active_.swap(updated_);
  }

  std::vector<Track> flush() override {
    for (auto& t : active_) finish(std::move(t));
    active_.clear();
    flushed_ = true;
    std::sort(finished_.begin(), finished_.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
    return finished_;
  }

private:
  void finish(TrackBuilder&& t) {
    if (!passes_finish_rule(p_, t.track.max_score, t.measured())) return;
    finished_.push_back(std::move(t).finish());
    ++stats_.tracks_finished;
  }

  IouParams p_;
  std::int64_t next_id_ = 1;
  std::vector<TrackBuilder> active_;
  std::vector<TrackBuilder> updated_;
  std::vector<std::size_t> pool_;
  std::vector<Track> finished_;
};

struct KalmanTrack {
  TrackBuilder builder;
  KalmanState state;
  int misses = 0;           // consecutive unmatched association frames (KIOU)
  std::int64_t since_update = 0;  // frames since last measurement (SORT family)
  std::size_t hits = 1;
  std::deque<Embedding> gallery;

  KalmanTrack(std::int64_t id, std::int64_t frame, const Detection& det, const KalmanConfig& cfg)
      : builder(id, frame, det), state(box_to_state(det.box, cfg)) {}

  std::int64_t id() const noexcept { return builder.track.id; }
};

void advance(KalmanTrack& t, std::int64_t frames, const KalmanConfig& cfg) {
  for (std::int64_t i = 0; i < frames; ++i) t.state = predict(t.state, cfg);
}

// IOU association on Kalman-predicted tails with coasting and frame skipping.
class KiouTracker final : public Tracker {
public:
  explicit KiouTracker(KiouParams p) : p_(std::move(p)) { p_.validate(); }

  TrackerKind kind() const noexcept override { return TrackerKind::Kiou; }
  std::size_t active_count() const noexcept override { return active_.size(); }

  void step(const Frame& frame) override {
    const std::int64_t delta = last_index_ ? frame.index - *last_index_ : 0;
    begin_step(frame);
    for (auto& t : active_) advance(t, delta, p_.kalman);

    // Whole frames are skipped before any score filtering.
    const bool associate = (frame.index - *first_index_) % (p_.skip + 1) == 0;
    updated_.clear();
    if (!associate) {
      for (auto& t : active_) {
        if (auto b = box_of(t.state))
          t.builder.coast(frame.index, *b);
        else {
          finish(std::move(t));
          continue;
        }
        updated_.push_back(std::move(t));
      }
      active_.swap(updated_);
      return;
    }

    const auto& dets = frame.detections;
    pool_.clear();
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (dets[i].score >= p_.iou.sigma_l) pool_.push_back(i);

    for (auto& t : active_) {
      auto tail = box_of(t.state);
      if (!tail) {
        finish(std::move(t));
        continue;
      }
      bool extended = false;
      if (!pool_.empty()) {
        auto [k, best_iou] = best_overlap(*tail, pool_, dets);
        if (best_iou >= p_.iou.sigma_iou) {
          const Detection& det = dets[pool_[k]];
          t.state = update(t.state, det.box, p_.kalman);
          t.builder.absorb(frame.index, det);
          t.misses = 0;
          absorptions_.push_back({t.id(), pool_[k]});
          pool_.erase(pool_.begin() + static_cast<std::ptrdiff_t>(k));
          extended = true;
        }
      }
      if (!extended) {
        if (++t.misses > p_.ttl) {
          finish(std::move(t));
          continue;
        }
        t.builder.coast(frame.index, *tail);
      }
      updated_.push_back(std::move(t));
    }
    for (std::size_t i : pool_) {
      updated_.emplace_back(next_id_++, frame.index, dets[i], p_.kalman);
      absorptions_.push_back({updated_.back().id(), i});
      ++stats_.tracks_created;
    }
    active_.swap(updated_);
  }

  std::vector<Track> flush() override {
    for (auto& t : active_) finish(std::move(t));
    active_.clear();
    flushed_ = true;
    std::sort(finished_.begin(), finished_.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
    return finished_;
  }

private:
  void finish(KalmanTrack&& t) {
    if (!passes_finish_rule(p_.iou, t.builder.track.max_score, t.builder.measured())) return;
    finished_.push_back(std::move(t.builder).finish());
    ++stats_.tracks_finished;
  }

  KiouParams p_;
  std::int64_t next_id_ = 1;
  std::vector<KalmanTrack> active_;
  std::vector<KalmanTrack> updated_;
  std::vector<std::size_t> pool_;
  std::vector<Track> finished_;
};

constexpr double kCosineZero = 1e-12;

// SORT and Deep SORT share the lifecycle; `appearance` switches on the
// blended motion/appearance cost and the embedding gallery.
class SortFamilyTracker final : public Tracker {
public:
  explicit SortFamilyTracker(SortParams p) : p_(std::move(p)) { p_.validate(); }
  explicit SortFamilyTracker(DeepSortParams p) : p_(p.sort), deep_(p), appearance_(true) { deep_.validate(); }

  TrackerKind kind() const noexcept override { return appearance_ ? TrackerKind::DeepSort : TrackerKind::Sort; }
  std::size_t active_count() const noexcept override { return active_.size(); }

  void step(const Frame& frame) override {
    const std::int64_t delta = last_index_ ? frame.index - *last_index_ : 0;
    begin_step(frame);
    const auto& dets = frame.detections;

    std::vector<std::optional<BoundingBox>> tails(active_.size());
    for (std::size_t r = 0; r < active_.size(); ++r) {
      advance(active_[r], delta, p_.kalman);
      tails[r] = box_of(active_[r].state);
    }

    std::vector<std::size_t> det_track(dets.size(), active_.size());
    std::vector<char> matched(active_.size(), 0);
    if (!active_.empty() && !dets.empty()) {
      CostMatrix m = cost_matrix(tails, dets);
      for (const auto& [r, c] : solve_assignment(m)) {
        det_track[c] = r;
        matched[r] = 1;
      }
    }

    updated_.clear();
    for (std::size_t c = 0; c < dets.size(); ++c) {
      if (det_track[c] == active_.size()) continue;
      KalmanTrack& t = active_[det_track[c]];
      t.state = update(t.state, dets[c].box, p_.kalman);
      t.builder.absorb(frame.index, dets[c]);
      t.since_update = 0;
      ++t.hits;
      if (appearance_ && dets[c].embedding) {
        t.gallery.push_back(*dets[c].embedding);
        while (t.gallery.size() > static_cast<std::size_t>(deep_.gallery_budget)) t.gallery.pop_front();
      }
      absorptions_.push_back({t.id(), c});
    }
    for (std::size_t r = 0; r < active_.size(); ++r) {
      KalmanTrack& t = active_[r];
      if (!matched[r]) {
        t.since_update += std::max<std::int64_t>(delta, 1);
        if (t.since_update > p_.max_age || !tails[r]) {
          finish(std::move(t));
          continue;
        }
        t.builder.coast(frame.index, *tails[r]);
      }
      updated_.push_back(std::move(t));
    }
    for (std::size_t c = 0; c < dets.size(); ++c) {
      if (det_track[c] != active_.size()) continue;
      updated_.emplace_back(next_id_++, frame.index, dets[c], p_.kalman);
      if (appearance_ && dets[c].embedding) updated_.back().gallery.push_back(*dets[c].embedding);
      absorptions_.push_back({updated_.back().id(), c});
      ++stats_.tracks_created;
    }
    active_.swap(updated_);
  }

  std::vector<Track> flush() override {
    for (auto& t : active_) finish(std::move(t));
    active_.clear();
    flushed_ = true;
    std::sort(finished_.begin(), finished_.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
    return finished_;
  }

private:
  CostMatrix cost_matrix(const std::vector<std::optional<BoundingBox>>& tails,
                         const std::vector<Detection>& dets) const {
    CostMatrix m(tails.size(), dets.size());
    for (std::size_t r = 0; r < tails.size(); ++r) {
      for (std::size_t c = 0; c < dets.size(); ++c) {
        if (!tails[r]) {
          m.gate(r, c);
          continue;
        }
        const double overlap = iou(*tails[r], dets[c].box);
        double cost = 1.0 - overlap;
        bool gated = overlap < p_.iou_min;
        const auto& gallery = active_[r].gallery;
        if (appearance_ && dets[c].embedding && !gallery.empty()) {
          const double d_cos = min_cosine_distance(*dets[c].embedding, gallery);
          cost = deep_.lambda_motion * cost + (1.0 - deep_.lambda_motion) * d_cos;
          gated = gated || d_cos > deep_.cos_max;
        }
        m.set(r, c, cost, gated);
      }
    }
    return m;
  }

  void finish(KalmanTrack&& t) {
    if (t.hits < static_cast<std::size_t>(p_.min_hits)) return;
    finished_.push_back(std::move(t.builder).finish());
    ++stats_.tracks_finished;
  }

  SortParams p_;
  DeepSortParams deep_;
  bool appearance_ = false;
  std::int64_t next_id_ = 1;
  std::vector<KalmanTrack> active_;
  std::vector<KalmanTrack> updated_;
  std::vector<Track> finished_;
};

}  // namespace

std::string_view to_string(FinishRule rule) noexcept { return rule == FinishRule::And ? "and" : "or"; }

FinishRule parse_finish_rule(std::string_view text) {
  if (text == "or") return FinishRule::Or;
  if (text == "and") return FinishRule::And;
  throw ConfigError("unknown finish rule '" + std::string(text) + "' (expected or|and)");
}

void IouParams::validate() const {
  require_unit(sigma_l, "sigma_l");
  require_unit(sigma_h, "sigma_h");
  require_unit(sigma_iou, "sigma_iou");
  if (sigma_l > sigma_h) throw ConfigError("sigma_l must not exceed sigma_h");
  if (sigma_iou <= 0.0) throw ConfigError("sigma_iou must lie in (0, 1]");
  require_positive(min_size, "min_size");
}

void KiouParams::validate() const {
  iou.validate();
  require_positive(ttl, "ttl");
  if (skip < 0) throw ConfigError("skip must be non-negative");
  kalman.validate();
}

void SortParams::validate() const {
  require_unit(iou_min, "iou_min");
  require_positive(max_age, "max_age");
  require_positive(min_hits, "min_hits");
  kalman.validate();
}

void DeepSortParams::validate() const {
  sort.validate();
  require_unit(lambda_motion, "lambda_motion");
  require_unit(cos_max, "cos_max");
  require_positive(gallery_budget, "gallery_budget");
}

std::string_view to_string(TrackerKind kind) noexcept {
  switch (kind) {
    case TrackerKind::Iou: return "iou";
    case TrackerKind::Kiou: return "kiou";
    case TrackerKind::Sort: return "sort";
    case TrackerKind::DeepSort: return "deepsort";
  }
  return "iou";
}

std::string_view display_name(TrackerKind kind) noexcept {
  switch (kind) {
    case TrackerKind::Iou: return "IOU";
    case TrackerKind::Kiou: return "KIOU";
    case TrackerKind::Sort: return "SORT";
    case TrackerKind::DeepSort: return "Deep SORT";
  }
  return "IOU";
}

TrackerKind parse_tracker_kind(std::string_view text) {
  if (text == "iou") return TrackerKind::Iou;
  if (text == "kiou") return TrackerKind::Kiou;
  if (text == "sort") return TrackerKind::Sort;
  if (text == "deepsort") return TrackerKind::DeepSort;
  throw ConfigError("unknown tracker kind '" + std::string(text) + "' (expected iou|kiou|sort|deepsort)");
}

TrackerKind kind_of(const TrackerParams& params) noexcept {
  return static_cast<TrackerKind>(params.index());
}

TrackerParams default_params(TrackerKind kind) {
  switch (kind) {
    case TrackerKind::Iou: return IouParams{};
    case TrackerKind::Kiou: return KiouParams{};
    case TrackerKind::Sort: return SortParams{};
    case TrackerKind::DeepSort: return DeepSortParams{};
  }
  return IouParams{};
}

void Tracker::begin_step(const Frame& frame) {
  if (flushed_) throw SequencingError("tracker already flushed");
  if (last_index_ && frame.index <= *last_index_)
    throw SequencingError("out-of-order frame " + std::to_string(frame.index) + " after " +
                          std::to_string(*last_index_));
  if (!first_index_) first_index_ = frame.index;
  last_index_ = frame.index;
  absorptions_.clear();
  ++stats_.frames;
}

std::unique_ptr<Tracker> make_tracker(const TrackerParams& params) {
  return std::visit(
      [](const auto& p) -> std::unique_ptr<Tracker> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, IouParams>)
          return std::make_unique<IouTracker>(p);
        else if constexpr (std::is_same_v<P, KiouParams>)
          return std::make_unique<KiouTracker>(p);
        else
          return std::make_unique<SortFamilyTracker>(p);
      },
      params);
}

Frame suppress_duplicates(const Frame& frame, double iou_threshold) {
  const auto& dets = frame.detections;
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  std::vector<char> keep(dets.size(), 0);
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool dup = std::any_of(kept.begin(), kept.end(),
                           [&](std::size_t k) { return iou(dets[i].box, dets[k].box) > iou_threshold; });
    if (!dup) {
      keep[i] = 1;
      kept.push_back(i);
    }
  }
  Frame out{frame.index, frame.timestamp_ms, {}};
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (keep[i]) out.detections.push_back(dets[i]);
  return out;
}

std::vector<Track> run_tracker(const TrackerParams& params, const std::vector<Frame>& frames,
                               const TrackerOptions& options, TrackerStats* stats) {
  auto tracker = make_tracker(params);
  for (const auto& frame : frames) {
    if (options.nms)
      tracker->step(suppress_duplicates(frame, options.nms_iou));
    else
      tracker->step(frame);
  }
  auto tracks = tracker->flush();
  if (stats) *stats = tracker->stats();
  return tracks;
}

double min_cosine_distance(const Embedding& query, const std::deque<Embedding>& gallery) noexcept {
  double best = 2.0;
  for (const auto& g : gallery) {
    const std::size_t n = std::min(query.size(), g.size());
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += query[i] * g[i];
    best = std::min(best, 1.0 - dot);
  }
  return best < kCosineZero ? 0.0 : best;
}

}  // namespace vcount
