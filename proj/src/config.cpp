#include "vcount/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "vcount/error.hpp"
#include "vcount/evaluation.hpp"

namespace vcount {
namespace {

// Reads fields from one JSON object and rejects whatever was not read.
class Fields {
public:
  Fields(const Json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j_.is_object()) throw ConfigError(what_ + " must be a JSON object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const Json* raw(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_number() || !std::isfinite(v->get<double>())) fail(key, "a finite number");
      out = v->get<double>();
    }
  }

  template <class Int>
  void integer(const char* key, Int& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_number_integer()) fail(key, "an integer");
      out = v->get<Int>();
    }
  }

  void boolean(const char* key, bool& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_boolean()) fail(key, "a boolean");
      out = v->get<bool>();
    }
  }

  void text(const char* key, std::string& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_string()) fail(key, "a string");
      out = v->get<std::string>();
    }
  }

  const Json& required(const char* key) {
    const Json* v = raw(key);
    if (!v) throw ConfigError(what_ + ": missing '" + key + "'");
    return *v;
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError(what_ + ": unknown key '" + item.key() + "'");
  }

private:
  [[noreturn]] void fail(const char* key, const char* kind) const {
    throw ConfigError(what_ + ": '" + key + "' must be " + kind);
  }

  const Json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

Json iou_fields(const IouParams& p) {
  return {{"sigma_l", p.sigma_l},
          {"sigma_h", p.sigma_h},
          {"sigma_iou", p.sigma_iou},
          {"min_size", p.min_size},
          {"finish_rule", std::string(to_string(p.finish_rule))}};
}

void read_iou_fields(Fields& f, IouParams& p) {
  f.number("sigma_l", p.sigma_l);
  f.number("sigma_h", p.sigma_h);
  f.number("sigma_iou", p.sigma_iou);
  f.integer("min_size", p.min_size);
  std::string rule(to_string(p.finish_rule));
  f.text("finish_rule", rule);
  p.finish_rule = parse_finish_rule(rule);
}

Json sort_fields(const SortParams& p) {
  return {{"iou_min", p.iou_min}, {"max_age", p.max_age}, {"min_hits", p.min_hits}, {"kalman", to_json(p.kalman)}};
}

void read_sort_fields(Fields& f, SortParams& p) {
  f.number("iou_min", p.iou_min);
  f.integer("max_age", p.max_age);
  f.integer("min_hits", p.min_hits);
  if (const Json* k = f.raw("kalman")) p.kalman = kalman_from_json(*k, p.kalman);
}

Json point_json(Point p) { return Json::array({p.x, p.y}); }

Point point_from(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(what + ": points must be [x, y] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

VehicleClass class_from(const std::string& text, const std::string& what) {
  try {
    return parse_vehicle_class(text);
  } catch (const ValidationError& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed configuration file '" + path.string() + "': " + e.what());
  }
}

Json to_json(const KalmanConfig& c) {
  return {{"init_position_var", c.init_position_var},
          {"init_rate_var", c.init_rate_var},
          {"meas_position_factor", c.meas_position_factor},
          {"meas_area_factor", c.meas_area_factor},
          {"meas_ratio_factor", c.meas_ratio_factor},
          {"process_position_var", c.process_position_var},
          {"process_velocity_var", c.process_velocity_var},
          {"process_area_rate_var", c.process_area_rate_var}};
}

KalmanConfig kalman_from_json(const Json& j, KalmanConfig c) {
  Fields f(j, "kalman");
  f.number("init_position_var", c.init_position_var);
  f.number("init_rate_var", c.init_rate_var);
  f.number("meas_position_factor", c.meas_position_factor);
  f.number("meas_area_factor", c.meas_area_factor);
  f.number("meas_ratio_factor", c.meas_ratio_factor);
  f.number("process_position_var", c.process_position_var);
  f.number("process_velocity_var", c.process_velocity_var);
  f.number("process_area_rate_var", c.process_area_rate_var);
  f.finish();
  c.validate();
  return c;
}

Json to_json(const TrackerParams& params) {
  Json j{{"kind", std::string(to_string(kind_of(params)))}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        Json body;
        if constexpr (std::is_same_v<T, IouParams>) {
          body = iou_fields(p);
        } else if constexpr (std::is_same_v<T, KiouParams>) {
          body = iou_fields(p.iou);
          body["ttl"] = p.ttl;
          body["skip"] = p.skip;
          body["kalman"] = to_json(p.kalman);
        } else if constexpr (std::is_same_v<T, SortParams>) {
          body = sort_fields(p);
        } else {
          body = sort_fields(p.sort);
          body["lambda_motion"] = p.lambda_motion;
          body["cos_max"] = p.cos_max;
          body["gallery_budget"] = p.gallery_budget;
        }
        for (auto& [k, v] : body.items()) j[k] = v;
      },
      params);
  return j;
}

TrackerParams tracker_params_from_json(const Json& j) {
  Fields f(j, "tracker");
  const Json& kind_json = f.required("kind");
  if (!kind_json.is_string()) throw ConfigError("tracker: 'kind' must be a string");
  TrackerParams params;
  try {
    params = default_params(parse_tracker_kind(kind_json.get<std::string>()));
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("tracker: ") + e.what());
  }
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IouParams>) {
          read_iou_fields(f, p);
        } else if constexpr (std::is_same_v<T, KiouParams>) {
          read_iou_fields(f, p.iou);
          f.integer("ttl", p.ttl);
          f.integer("skip", p.skip);
          if (const Json* k = f.raw("kalman")) p.kalman = kalman_from_json(*k, p.kalman);
        } else if constexpr (std::is_same_v<T, SortParams>) {
          read_sort_fields(f, p);
        } else {
          read_sort_fields(f, p.sort);
          f.number("lambda_motion", p.lambda_motion);
          f.number("cos_max", p.cos_max);
          f.integer("gallery_budget", p.gallery_budget);
        }
        f.finish();
        p.validate();
      },
      params);
  return params;
}

Json to_json(const TrackerOptions& o) { return {{"enabled", o.nms}, {"iou", o.nms_iou}}; }

TrackerOptions tracker_options_from_json(const Json& j, TrackerOptions o) {
  Fields f(j, "nms");
  f.boolean("enabled", o.nms);
  f.number("iou", o.nms_iou);
  f.finish();
  if (!(o.nms_iou > 0.0 && o.nms_iou <= 1.0)) throw ConfigError("nms: 'iou' must lie in (0, 1]");
  return o;
}

Json to_json(const CountOptions& o) {
  return {{"anchor", o.anchor == Anchor::Center ? "center" : "bottom_center"},
          {"include_predicted", o.include_predicted},
          {"class_source", o.class_source == ClassSource::Majority ? "majority" : "latest"},
          {"mode", o.mode == CountingMode::FirstEntry ? "first_entry" : "entry_exit"}};
}

CountOptions count_options_from_json(const Json& j, CountOptions o) {
  Fields f(j, "counting");
  std::string anchor = o.anchor == Anchor::Center ? "center" : "bottom_center";
  std::string source = o.class_source == ClassSource::Majority ? "majority" : "latest";
  std::string mode = o.mode == CountingMode::FirstEntry ? "first_entry" : "entry_exit";
  f.text("anchor", anchor);
  f.boolean("include_predicted", o.include_predicted);
  f.text("class_source", source);
  f.text("mode", mode);
  f.finish();
  if (anchor == "center") o.anchor = Anchor::Center;
  else if (anchor == "bottom_center") o.anchor = Anchor::BottomCenter;
  else throw ConfigError("counting: anchor must be 'center' or 'bottom_center'");
  if (source == "majority") o.class_source = ClassSource::Majority;
  else if (source == "latest") o.class_source = ClassSource::Latest;
  else throw ConfigError("counting: class_source must be 'majority' or 'latest'");
  if (mode == "first_entry") o.mode = CountingMode::FirstEntry;
  else if (mode == "entry_exit") o.mode = CountingMode::EntryExit;
  else throw ConfigError("counting: mode must be 'first_entry' or 'entry_exit'");
  return o;
}

Json to_json(const NoiseModel& n) {
  return {{"miss_rate", n.miss_rate},
          {"fp_rate", n.fp_rate},
          {"jitter_sigma", n.jitter_sigma},
          {"duplicate_rate", n.duplicate_rate},
          {"class_flip_rate", n.class_flip_rate},
          {"occlusion_iou", n.occlusion_iou},
          {"score_mean", n.score_mean},
          {"score_std", n.score_std},
          {"fp_score_mean", n.fp_score_mean},
          {"fp_score_std", n.fp_score_std},
          {"embedding_noise", n.embedding_noise}};
}

NoiseModel noise_from_json(const Json& j) {
  if (j.is_string()) return find_noise(j.get<std::string>());
  Fields f(j, "noise");
  NoiseModel n;
  std::string preset;
  f.text("preset", preset);
  if (!preset.empty()) n = find_noise(preset);
  f.number("miss_rate", n.miss_rate);
  f.number("fp_rate", n.fp_rate);
  f.number("jitter_sigma", n.jitter_sigma);
  f.number("duplicate_rate", n.duplicate_rate);
  f.number("class_flip_rate", n.class_flip_rate);
  f.number("occlusion_iou", n.occlusion_iou);
  f.number("score_mean", n.score_mean);
  f.number("score_std", n.score_std);
  f.number("fp_score_mean", n.fp_score_mean);
  f.number("fp_score_std", n.fp_score_std);
  f.number("embedding_noise", n.embedding_noise);
  f.finish();
  n.validate();
  return n;
}

Json to_json(const Scenario& s) {
  Json lanes = Json::array();
  for (const auto& lane : s.lanes) {
    Json path = Json::array();
    for (const auto& p : lane.path) path.push_back(point_json(p));
    Json jl{{"name", lane.name}, {"direction", std::string(to_string(lane.direction))}, {"path", path},
            {"width", lane.width}};
    if (lane.dwell) jl["dwell"] = {{"at", lane.dwell->at}, {"frames", lane.dwell->frames}};
    lanes.push_back(std::move(jl));
  }
  Json spawns = Json::array();
  for (const auto& sp : s.spawns) {
    Json js{{"frame", sp.frame},
            {"lane", s.lanes.at(sp.lane).name},
            {"class", std::string(to_string(sp.cls))},
            {"speed", sp.speed}};
    if (sp.box_width > 0.0 && sp.box_height > 0.0) js["size"] = Json::array({sp.box_width, sp.box_height});
    spawns.push_back(std::move(js));
  }
  Json sizes;
  for (VehicleClass c : kAllClasses)
    sizes[std::string(to_string(c))] = Json::array({s.size_of(c).width, s.size_of(c).height});
  return {{"name", s.name},         {"width", s.width},        {"height", s.height},
          {"fps", s.fps},           {"duration", s.duration},  {"class_sizes", sizes},
          {"truck_fraction", s.truck_fraction}, {"lanes", lanes}, {"spawns", spawns}};
}

Scenario scenario_from_json(const Json& j) {
  if (j.is_string()) return find_scenario(j.get<std::string>()).scenario;
  Fields f(j, "scenario");
  Scenario s;
  f.text("name", s.name);
  f.number("width", s.width);
  f.number("height", s.height);
  f.number("fps", s.fps);
  f.integer("duration", s.duration);
  f.number("truck_fraction", s.truck_fraction);
  if (const Json* sizes = f.raw("class_sizes")) {
    Fields fs(*sizes, "scenario class_sizes");
    for (VehicleClass c : kAllClasses) {
      const std::string key(to_string(c));
      if (const Json* v = fs.raw(key.c_str())) {
        const Point p = point_from(*v, "class size '" + key + "'");
        s.class_sizes[static_cast<std::size_t>(c)] = {p.x, p.y};
      }
    }
    fs.finish();
  }
  if (const Json* lanes = f.raw("lanes")) {
    if (!lanes->is_array()) throw ConfigError("scenario: 'lanes' must be an array");
    for (const auto& jl : *lanes) {
      Fields fl(jl, "lane");
      Lane lane;
      fl.text("name", lane.name);
      const std::string what = "lane '" + lane.name + "'";
      std::string dir;
      fl.text("direction", dir);
      try {
        lane.direction = parse_direction(dir);
      } catch (const ValidationError& e) {
        throw ConfigError(what + ": " + e.what());
      }
      const Json& path = fl.required("path");
      if (!path.is_array()) throw ConfigError(what + ": 'path' must be an array");
      for (const auto& p : path) lane.path.push_back(point_from(p, what));
      fl.number("width", lane.width);
      if (const Json* d = fl.raw("dwell")) {
        Fields fd(*d, what + " dwell");
        Dwell dwell;
        fd.number("at", dwell.at);
        fd.integer("frames", dwell.frames);
        fd.finish();
        lane.dwell = dwell;
      }
      fl.finish();
      s.lanes.push_back(std::move(lane));
    }
  }
  if (const Json* spawns = f.raw("spawns")) {
    if (!spawns->is_array()) throw ConfigError("scenario: 'spawns' must be an array");
    for (const auto& js : *spawns) {
      Fields fs(js, "spawn");
      Spawn sp;
      fs.integer("frame", sp.frame);
      std::string lane, cls = "car";
      fs.text("lane", lane);
      sp.lane = s.lane_index(lane);
      fs.text("class", cls);
      sp.cls = class_from(cls, "spawn");
      fs.number("speed", sp.speed);
      if (const Json* size = fs.raw("size")) {
        const Point p = point_from(*size, "spawn size");
        sp.box_width = p.x;
        sp.box_height = p.y;
      }
      fs.finish();
      s.spawns.push_back(sp);
    }
  }
  f.finish();
  s.validate();
  return s;
}

Json zones_to_json(const std::vector<Zone>& zones) {
  std::ostringstream out;
  write_zones(out, zones);
  return Json::parse(out.str())["zones"];
}

std::vector<Zone> zones_from_json(const Json& j) {
  Json doc = j.is_array() ? Json{{"zones", j}} : j;
  std::istringstream in(doc.dump());
  return read_zones(in);
}

Json defaults_document() {
  Json trackers = Json::array();
  for (TrackerKind k : {TrackerKind::Iou, TrackerKind::Kiou, TrackerKind::Sort, TrackerKind::DeepSort})
    trackers.push_back(to_json(default_params(k)));
  Json noise;
  for (const auto& [name, model] : noise_library()) noise[name] = to_json(model);
  Json scenarios = Json::array();
  for (const auto& preset : scenario_library())
    scenarios.push_back({{"name", preset.name},
                         {"description", preset.description},
                         {"noise", preset.noise},
                         {"scenario", to_json(preset.scenario)},
                         {"zones", zones_to_json(preset.zones)}});
  return {{"trackers", trackers},
          {"nms", to_json(TrackerOptions{})},
          {"counting", to_json(CountOptions{})},
          {"evaluation", {{"match_iou", kDefaultMatchIou}, {"heatmap_mode", "footprint"}, {"cell_size", 10.0}}},
          {"bench", {{"threshold_fps", 50000.0}, {"frames", 20000}, {"objects", 8}, {"tracker", "iou"}}},
          {"noise", noise},
          {"scenarios", scenarios}};
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_digest(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string config_hash(const Json& config) { return "fnv1a64:" + hex_digest(fnv1a64(config.dump())); }

}  // namespace vcount
