#include "vcount/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "vcount/config.hpp"
#include "vcount/error.hpp"
#include "vcount/evaluation.hpp"
#include "vcount/stream_io.hpp"

#ifndef VCOUNT_VERSION
#define VCOUNT_VERSION "0.0.0"
#endif

namespace vcount {
namespace {

namespace fs = std::filesystem;

constexpr int kManifestVersion = 1;
constexpr const char* kManifestFile = "manifest.json";

// Options shared by every subcommand.
struct Common {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string out;
  std::string config;
};

// Top-level sections accepted in a --config file.
const char* const kConfigSections[] = {"tracker", "trackers", "nms",   "counting", "evaluation",
                                       "bench",   "scenario", "zones", "noise"};

Json load_run_config(const std::string& path) {
  if (path.empty()) return Json::object();
  Json cfg = load_json_file(path);
  if (!cfg.is_object()) throw ConfigError("configuration file must hold a JSON object");
  for (const auto& item : cfg.items())
    if (std::find(std::begin(kConfigSections), std::end(kConfigSections), item.key()) == std::end(kConfigSections))
      throw ConfigError("configuration file: unknown section '" + item.key() + "'");
  return cfg;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path prepare_out(const std::string& out) {
  if (out.empty()) throw ConfigError("--out is required");
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + out + "'");
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream buf;
  fn(buf);
  write_text(path, buf.str());
}

class Manifest {
public:
  Manifest(std::string command, const Common& common) : command_(std::move(command)), seed_(common.seed) {}

  void input(const std::string& role, const fs::path& path) {
    inputs_.push_back({{"role", role}, {"path", path.generic_string()}, {"fnv1a64", hex_digest(fnv1a64(read_file(path)))}});
  }
  void output(const std::string& name) { outputs_.push_back(name); }
  void set_config(Json config) { config_ = std::move(config); }
  void set_measurement(Json m) { measurement_ = std::move(m); }

  void write(const fs::path& dir) const {
    Json m{{"manifest_version", kManifestVersion},
           {"engine", "vcount"},
           {"engine_version", VCOUNT_VERSION},
           {"command", command_},
           {"seed", seed_},
           {"config_hash", config_hash(config_)},
           {"config", config_},
           {"inputs", inputs_},
           {"outputs", outputs_}};
    if (!measurement_.is_null()) m["measurement"] = measurement_;
    write_text(dir / kManifestFile, m.dump(2) + "\n");
  }

private:
  std::string command_;
  std::uint64_t seed_;
  Json config_ = Json::object();
  Json inputs_ = Json::array();
  Json outputs_ = Json::array();
  Json measurement_;
};

TrackerOptions nms_from(const Json& cfg, bool nms_flag) {
  TrackerOptions opts = cfg.contains("nms") ? tracker_options_from_json(cfg["nms"]) : TrackerOptions{};
  if (nms_flag) opts.nms = true;
  return opts;
}

// A --tracker kind on the command line wins over the configuration's kind;
// the configured block applies only when the kinds agree.
TrackerParams tracker_from(const Json& cfg, const std::string& kind) {
  if (cfg.contains("tracker")) {
    TrackerParams p = tracker_params_from_json(cfg["tracker"]);
    if (kind.empty() || parse_tracker_kind(kind) == kind_of(p)) return p;
  }
  return default_params(parse_tracker_kind(kind.empty() ? "iou" : kind));
}

CountOptions counting_from(const Json& cfg, const std::string& anchor, bool include_predicted,
                           const std::string& mode, const std::string& class_source) {
  CountOptions o = cfg.contains("counting") ? count_options_from_json(cfg["counting"]) : CountOptions{};
  Json overrides = Json::object();
  if (!anchor.empty()) overrides["anchor"] = anchor;
  if (!mode.empty()) overrides["mode"] = mode;
  if (!class_source.empty()) overrides["class_source"] = class_source;
  if (include_predicted) overrides["include_predicted"] = true;
  return count_options_from_json(overrides, o);
}

std::vector<Frame> load_stream(const fs::path& path, std::ostream& err) {
  std::vector<std::string> warnings;
  auto frames = ingest_stream_file(path, &warnings);
  for (const auto& w : warnings) err << "warning: " << path.string() << ": " << w << "\n";
  return frames;
}

// Ground truth as frames: either a detection stream or a tracks file.
std::vector<Frame> tracks_to_frames(const std::vector<Track>& tracks) {
  std::map<std::int64_t, Frame> by_index;
  for (const auto& t : tracks)
    for (const auto& b : t.boxes) {
      if (b.predicted()) continue;
      Frame& f = by_index[b.frame];
      f.index = b.frame;
      f.detections.push_back({b.box, t.cls, 1.0, std::nullopt});
    }
  std::vector<Frame> frames;
  for (auto& [_, f] : by_index) frames.push_back(std::move(f));
  return frames;
}

struct Simulated {
  Scenario scenario;
  std::vector<Zone> zones;
  NoiseModel noise;
  GroundTruth gt;
  std::vector<Frame> detections;
};

// Scenario/zones/noise resolution shared by `simulate` and inline matrix
// streams. `request` may carry "scenario", "zones" and "noise".
Simulated simulate_from(const Json& request, const std::string& preset_override, const std::string& noise_override,
                        bool zero_noise, std::uint64_t seed) {
  Simulated s;
  std::optional<ScenarioPreset> preset;
  std::string noise_name;
  if (!preset_override.empty() || !request.contains("scenario") || request["scenario"].is_string()) {
    preset = find_scenario(!preset_override.empty()      ? preset_override
                           : request.contains("scenario") ? request["scenario"].get<std::string>()
                                                       : "straight_two_lane");
    s.scenario = preset->scenario;
    s.zones = preset->zones;
    noise_name = preset->noise;
  } else {
    s.scenario = scenario_from_json(request["scenario"]);
    noise_name = "zero";
  }
  if (request.contains("zones")) s.zones = zones_from_json(request["zones"]);
  else if (!preset) throw ConfigError("a custom scenario needs a 'zones' section");

  if (zero_noise) s.noise = find_noise("zero");
  else if (!noise_override.empty()) s.noise = find_noise(noise_override);
  else if (request.contains("noise")) s.noise = noise_from_json(request["noise"]);
  else s.noise = find_noise(noise_name);

  s.gt = generate(s.scenario, s.zones, seed);
  s.detections = corrupt(s.gt, s.noise, seed);
  return s;
}

Json simulation_config(const Simulated& s, std::uint64_t seed) {
  return {{"scenario", to_json(s.scenario)}, {"zones", zones_to_json(s.zones)}, {"noise", to_json(s.noise)},
          {"seed", seed}};
}

unsigned resolve_jobs(unsigned jobs) {
  if (jobs != 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------- commands

int cmd_simulate(const Common& c, const std::string& preset, const std::string& noise, bool zero_noise,
                 std::ostream& out) {
  const Json cfg = load_run_config(c.config);
  const Simulated s = simulate_from(cfg, preset, noise, zero_noise, c.seed);
  const fs::path dir = prepare_out(c.out);

  Manifest m("simulate", c);
  m.set_config(simulation_config(s, c.seed));
  write_stream_file(dir / "detections.jsonl", s.detections);
  write_tracks_file(dir / "gt_tracks.jsonl", s.gt.tracks());
  write_with(dir / "gt_counts.csv", [&](std::ostream& o) { write_counts_csv(o, s.gt.counts); });
  write_zones_file(dir / "zones.json", s.zones);
  for (const char* f : {"detections.jsonl", "gt_tracks.jsonl", "gt_counts.csv", "zones.json"}) m.output(f);
  m.write(dir);

  std::size_t dets = 0;
  for (const auto& f : s.detections) dets += f.detections.size();
  out << "simulated " << s.gt.identities.size() << " vehicles over " << s.detections.size() << " frames, " << dets
      << " detections; gt northbound " << s.gt.counts.total(Direction::Northbound) << ", southbound "
      << s.gt.counts.total(Direction::Southbound) << "\n";
  return kExitOk;
}

int cmd_track(const Common& c, const std::string& input, const std::string& kind, bool nms, std::ostream& out,
              std::ostream& err) {
  const Json cfg = load_run_config(c.config);
  const TrackerParams params = tracker_from(cfg, kind);
  const TrackerOptions options = nms_from(cfg, nms);
  const auto frames = load_stream(input, err);
  const fs::path dir = prepare_out(c.out);

  TrackerStats stats;
  const auto start = std::chrono::steady_clock::now();
  const auto tracks = run_tracker(params, frames, options, &stats);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Manifest m("track", c);
  m.set_config({{"tracker", to_json(params)}, {"nms", to_json(options)}});
  m.input("detections", input);
  write_tracks_file(dir / "tracks.jsonl", tracks);
  m.output("tracks.jsonl");
  m.write(dir);

  const double fps = seconds > 0.0 ? static_cast<double>(stats.frames) / seconds : 0.0;
  out << "tracker " << display_name(kind_of(params)) << ": frames " << stats.frames << ", tracks created "
      << stats.tracks_created << ", tracks finished " << stats.tracks_finished << ", wall time " << seconds
      << " s, frames/sec " << fps << "\n";
  return kExitOk;
}

int cmd_count(const Common& c, const std::string& tracks_path, const std::string& zones_path,
              const std::string& anchor, bool include_predicted, const std::string& mode,
              const std::string& class_source, std::ostream& out) {
  const Json cfg = load_run_config(c.config);
  const CountOptions options = counting_from(cfg, anchor, include_predicted, mode, class_source);
  const auto zones = read_zones_file(zones_path);
  const auto tracks = read_tracks_file(tracks_path);
  const fs::path dir = prepare_out(c.out);

  const CountReport report = count_tracks(tracks, zones, options);
  Manifest m("count", c);
  m.set_config({{"counting", to_json(options)}});
  m.input("tracks", tracks_path);
  m.input("zones", zones_path);
  write_with(dir / "counts.csv", [&](std::ostream& o) { write_counts_csv(o, report); });
  write_with(dir / "count_events.jsonl", [&](std::ostream& o) { write_count_events(o, report); });
  m.output("counts.csv");
  m.output("count_events.jsonl");
  m.write(dir);

  out << "counted " << tracks.size() << " tracks: northbound " << report.total(Direction::Northbound)
      << ", southbound " << report.total(Direction::Southbound) << "\n";
  return kExitOk;
}

int cmd_evaluate(const Common& c, const std::string& auto_path, const std::string& gt_path,
                 const std::string& condition, const std::string& combination, std::ostream& out) {
  const CountReport automatic = read_counts_file(auto_path);
  const CountReport gt = read_counts_file(gt_path);
  const fs::path dir = prepare_out(c.out);

  const auto rows = build_comparison({{condition,
                                       combination,
                                       {automatic.total(Direction::Northbound), automatic.total(Direction::Southbound)},
                                       {gt.total(Direction::Northbound), gt.total(Direction::Southbound)}}});
  Manifest m("evaluate", c);
  m.set_config({{"condition", condition}, {"combination", combination}});
  m.input("automatic_counts", auto_path);
  m.input("ground_truth_counts", gt_path);
  write_with(dir / "comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, rows); });
  m.output("comparison.csv");
  m.write(dir);

  for (const auto& r : rows) out << format_table_row(r) << "\n";
  return kExitOk;
}

int cmd_heatmap(const Common& c, const std::string& det_path, const std::string& gt_path,
                const std::string& gt_tracks_path, double image_w, double image_h, std::optional<double> cell,
                std::optional<double> match_iou, std::string mode, std::ostream& out, std::ostream& err) {
  const Json cfg = load_run_config(c.config);
  double cell_size = 10.0, threshold = kDefaultMatchIou;
  std::string cfg_mode = "footprint";
  if (cfg.contains("evaluation")) {
    const Json& e = cfg["evaluation"];
    for (const auto& item : e.items())
      if (item.key() != "match_iou" && item.key() != "heatmap_mode" && item.key() != "cell_size")
        throw ConfigError("evaluation: unknown key '" + item.key() + "'");
    if (e.contains("match_iou")) threshold = e["match_iou"].get<double>();
    if (e.contains("cell_size")) cell_size = e["cell_size"].get<double>();
    if (e.contains("heatmap_mode")) cfg_mode = e["heatmap_mode"].get<std::string>();
  }
  if (cell) cell_size = *cell;
  if (match_iou) threshold = *match_iou;
  if (mode.empty()) mode = cfg_mode;
  HeatmapMode hm;
  if (mode == "footprint") hm = HeatmapMode::Footprint;
  else if (mode == "center") hm = HeatmapMode::CenterPoint;
  else throw ConfigError("heatmap mode must be 'footprint' or 'center'");
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw ConfigError("cell size must be positive");
  if (!(image_w > 0.0) || !(image_h > 0.0)) throw ConfigError("image extent must be positive");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("match IoU must lie in (0, 1]");
  if (gt_path.empty() == gt_tracks_path.empty()) throw ConfigError("give exactly one of --gt or --gt-tracks");

  const auto dets = load_stream(det_path, err);
  const auto gt = gt_path.empty() ? tracks_to_frames(read_tracks_file(gt_tracks_path)) : load_stream(gt_path, err);
  const fs::path dir = prepare_out(c.out);

  const HeatmapGrid blank(static_cast<std::size_t>(std::ceil(image_w / cell_size)),
                          static_cast<std::size_t>(std::ceil(image_h / cell_size)), cell_size);
  const HeatmapSet set = build_heatmaps(dets, gt, blank, threshold, hm);

  Manifest m("heatmap", c);
  m.set_config({{"image_width", image_w},
                {"image_height", image_h},
                {"cell_size", cell_size},
                {"match_iou", threshold},
                {"heatmap_mode", mode}});
  m.input("detections", det_path);
  m.input(gt_path.empty() ? "ground_truth_tracks" : "ground_truth", gt_path.empty() ? gt_tracks_path : gt_path);
  const std::pair<const char*, const HeatmapGrid*> grids[] = {
      {"heatmap_fn", &set.false_negatives}, {"heatmap_fp", &set.false_positives}, {"heatmap_tp", &set.true_positives}};
  for (const auto& [name, grid] : grids) {
    const std::string base(name);
    write_with(dir / (base + ".csv"), [&](std::ostream& o) { write_grid_csv(o, *grid); });
    write_with(dir / (base + ".pgm"), [&](std::ostream& o) { write_pgm(o, *grid); });
    m.output(base + ".csv");
    m.output(base + ".pgm");
  }
  m.write(dir);

  out << "heat maps " << blank.width() << "x" << blank.height() << " cells: FN mass "
      << format_number(set.false_negatives.total()) << ", FP mass " << format_number(set.false_positives.total())
      << ", TP mass " << format_number(set.true_positives.total()) << "\n";
  return kExitOk;
}

std::vector<TrackerSpec> matrix_trackers(const Json& list, const TrackerOptions& options) {
  std::vector<TrackerSpec> specs;
  if (!list.is_array()) throw ConfigError("'trackers' must be an array");
  for (const auto& entry : list) {
    if (!entry.is_object()) throw ConfigError("tracker entries must be objects");
    Json body = entry;
    std::string label;
    if (body.contains("label")) {
      if (!body["label"].is_string()) throw ConfigError("tracker 'label' must be a string");
      label = body["label"].get<std::string>();
      body.erase("label");
    }
    TrackerOptions opts = options;
    if (body.contains("nms")) {
      opts = tracker_options_from_json(body["nms"], opts);
      body.erase("nms");
    }
    TrackerParams params = tracker_params_from_json(body);
    if (label.empty()) label = std::string(display_name(kind_of(params)));
    specs.push_back({label, params, opts});
  }
  return specs;
}

Json tracker_spec_json(const TrackerSpec& t) {
  Json j{{"label", t.label}};
  const Json params = to_json(t.params);
  for (const auto& [k, v] : params.items()) j[k] = v;
  j["nms"] = to_json(t.options);
  return j;
}

int cmd_matrix(const Common& c, const std::string& manifest_path, const std::string& zones_path, std::ostream& out) {
  const Json cfg = load_run_config(c.config);
  const Json doc = load_json_file(manifest_path);
  if (!doc.is_object() || !doc.contains("streams") || !doc["streams"].is_array())
    throw ConfigError("matrix manifest must be an object with a 'streams' array");
  for (const auto& item : doc.items())
    if (item.key() != "streams" && item.key() != "trackers" && item.key() != "zones")
      throw ConfigError("matrix manifest: unknown key '" + item.key() + "'");
  const fs::path base = fs::path(manifest_path).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  const TrackerOptions options = nms_from(cfg, false);
  std::vector<TrackerSpec> trackers;
  if (doc.contains("trackers")) trackers = matrix_trackers(doc["trackers"], options);
  else if (cfg.contains("trackers")) trackers = matrix_trackers(cfg["trackers"], options);
  else
    for (TrackerKind k : {TrackerKind::Iou, TrackerKind::Kiou, TrackerKind::Sort, TrackerKind::DeepSort})
      trackers.push_back({std::string(display_name(k)), default_params(k), options});
  if (trackers.empty()) throw ConfigError("matrix needs at least one tracker");
  const CountOptions count_options = counting_from(cfg, "", false, "", "");

  Manifest m("matrix", c);
  std::vector<Zone> zones;
  bool have_zones = false;
  if (!zones_path.empty()) {
    zones = read_zones_file(zones_path);
    m.input("zones", zones_path);
    have_zones = true;
  } else if (doc.contains("zones")) {
    if (!doc["zones"].is_string()) throw ConfigError("matrix manifest 'zones' must be a path");
    zones = read_zones_file(resolve(doc["zones"].get<std::string>()));
    m.input("zones", resolve(doc["zones"].get<std::string>()));
    have_zones = true;
  }

  std::vector<LabeledStream> streams;
  Json stream_cfg = Json::array();
  for (const auto& entry : doc["streams"]) {
    if (!entry.is_object()) throw ConfigError("matrix streams must be objects");
    for (const auto& item : entry.items())
      if (item.key() != "condition" && item.key() != "detector" && item.key() != "detections" &&
          item.key() != "gt_counts" && item.key() != "zones" && item.key() != "simulate")
        throw ConfigError("matrix stream: unknown key '" + item.key() + "'");
    if (!entry.contains("condition") || !entry["condition"].is_string())
      throw ConfigError("matrix stream needs a 'condition' label");
    LabeledStream s;
    s.condition = entry["condition"].get<std::string>();
    s.detector = entry.contains("detector") ? entry["detector"].get<std::string>() : "Synthetic";
    Json record{{"condition", s.condition}, {"detector", s.detector}};
    if (entry.contains("simulate")) {
      Json request = entry["simulate"];
      std::uint64_t seed = c.seed;
      if (request.contains("seed")) {
        if (!request["seed"].is_number_unsigned()) throw ConfigError("simulate 'seed' must be a non-negative integer");
        seed = request["seed"].get<std::uint64_t>();
        request.erase("seed");
      }
      for (const auto& item : request.items())
        if (item.key() != "scenario" && item.key() != "zones" && item.key() != "noise")
          throw ConfigError("matrix simulate: unknown key '" + item.key() + "'");
      Simulated sim = simulate_from(request, "", "", false, seed);
      s.frames = std::move(sim.detections);
      s.ground_truth = sim.gt.counts;
      s.zones = sim.zones;
      record["simulate"] = simulation_config(sim, seed);
    } else {
      if (!entry.contains("detections") || !entry.contains("gt_counts"))
        throw ConfigError("matrix stream '" + s.condition + "' needs 'detections' and 'gt_counts' or 'simulate'");
      const fs::path det = resolve(entry["detections"].get<std::string>());
      const fs::path gtc = resolve(entry["gt_counts"].get<std::string>());
      s.frames = ingest_stream_file(det);
      s.ground_truth = read_counts_file(gtc);
      m.input("detections", det);
      m.input("ground_truth_counts", gtc);
      if (entry.contains("zones")) {
        const fs::path zp = resolve(entry["zones"].get<std::string>());
        s.zones = read_zones_file(zp);
        m.input("zones", zp);
      } else if (!have_zones) {
        throw ConfigError("matrix stream '" + s.condition + "' has no zones (use --zones)");
      }
    }
    streams.push_back(std::move(s));
    stream_cfg.push_back(std::move(record));
  }

  const fs::path dir = prepare_out(c.out);
  const MatrixResult result = run_matrix(streams, trackers, zones, count_options, resolve_jobs(c.jobs));

  Json tracker_cfg = Json::array();
  for (const auto& t : trackers) tracker_cfg.push_back(tracker_spec_json(t));
  m.set_config({{"streams", stream_cfg}, {"trackers", tracker_cfg}, {"counting", to_json(count_options)}});

  write_with(dir / "comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, result.rows); });
  write_with(dir / "table.txt", [&](std::ostream& o) {
    o << "Condition | Combination | Northbound % | Southbound %\n";
    for (const auto& r : result.rows) o << format_table_row(r) << "\n";
  });
  write_with(dir / "runs.jsonl", [&](std::ostream& o) {
    for (const auto& run : result.runs) {
      const CountReport& gt = streams[run.stream].ground_truth;
      Json j{{"condition", run.condition},
             {"combination", run.combination},
             {"tracks", run.tracks.size()},
             {"tracks_created", run.stats.tracks_created},
             {"frames", run.stats.frames}};
      for (Direction d : kAllDirections) {
        Json counts;
        for (VehicleClass cls : kAllClasses) counts[std::string(to_string(cls))] = run.counts.count(d, cls);
        j[std::string(to_string(d))] = {{"automatic", counts}, {"ground_truth", gt.total(d)}};
      }
      o << j.dump() << "\n";
    }
  });
  for (const char* f : {"comparison.csv", "table.txt", "runs.jsonl"}) m.output(f);
  m.write(dir);

  for (const auto& r : result.rows) out << format_table_row(r) << "\n";
  return kExitOk;
}

int cmd_bench(const Common& c, const std::string& input, const std::string& kind, std::optional<std::size_t> frames_opt,
              std::optional<std::size_t> objects_opt, std::optional<double> threshold_opt, int repeat,
              std::ostream& out, std::ostream& err) {
  const Json cfg = load_run_config(c.config);
  std::size_t frames_n = 20000, objects = 8;
  double threshold = 50000.0;
  std::string tracker_kind = "iou";
  if (cfg.contains("bench")) {
    const Json& b = cfg["bench"];
    for (const auto& item : b.items())
      if (item.key() != "threshold_fps" && item.key() != "frames" && item.key() != "objects" && item.key() != "tracker")
        throw ConfigError("bench: unknown key '" + item.key() + "'");
    if (b.contains("threshold_fps")) threshold = b["threshold_fps"].get<double>();
    if (b.contains("frames")) frames_n = b["frames"].get<std::size_t>();
    if (b.contains("objects")) objects = b["objects"].get<std::size_t>();
    if (b.contains("tracker")) tracker_kind = b["tracker"].get<std::string>();
  }
  if (frames_opt) frames_n = *frames_opt;
  if (objects_opt) objects = *objects_opt;
  if (threshold_opt) threshold = *threshold_opt;
  if (!kind.empty()) tracker_kind = kind;
  if (repeat < 1) throw ConfigError("--repeat must be >= 1");
  if (!(threshold >= 0.0)) throw ConfigError("threshold must be >= 0");
  const TrackerParams params = tracker_from(cfg, tracker_kind);
  const TrackerOptions options = nms_from(cfg, false);

  Manifest m("bench", c);
  std::vector<Frame> frames;
  Json workload;
  if (!input.empty()) {
    frames = load_stream(input, err);
    m.input("detections", input);
    workload = {{"source", "file"}};
  } else {
    if (frames_n == 0) throw ConfigError("bench needs at least one frame");
    frames = bench_stream(frames_n, objects, c.seed);
    workload = {{"source", "synthetic"}, {"frames", frames_n}, {"objects", objects}};
  }
  std::size_t dets = 0;
  for (const auto& f : frames) dets += f.detections.size();
  const fs::path dir = prepare_out(c.out);

  // Best of `repeat` runs; tracking only, no I/O.
  double best = std::numeric_limits<double>::infinity();
  std::size_t tracks = 0;
  for (int r = 0; r < repeat; ++r) {
    const auto start = std::chrono::steady_clock::now();
    tracks = run_tracker(params, frames, options).size();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  const double fps = best > 0.0 ? static_cast<double>(frames.size()) / best : std::numeric_limits<double>::max();
  const double per_frame = frames.empty() ? 0.0 : static_cast<double>(dets) / static_cast<double>(frames.size());
  const bool passed = fps >= threshold;

  Json report{{"tracker", std::string(to_string(kind_of(params)))},
              {"frames", frames.size()},
              {"detections", dets},
              {"detections_per_frame", per_frame},
              {"tracks", tracks},
              {"repeat", repeat},
              {"seconds", best},
              {"frames_per_second", fps},
              {"threshold_fps", threshold},
              {"passed", passed}};
  m.set_config({{"tracker", to_json(params)}, {"nms", to_json(options)}, {"workload", workload},
                {"threshold_fps", threshold}, {"repeat", repeat}});
  m.set_measurement({{"seconds", best}, {"frames_per_second", fps}, {"passed", passed}});
  write_text(dir / "bench.json", report.dump(2) + "\n");
  m.output("bench.json");
  m.write(dir);

  out << "bench " << display_name(kind_of(params)) << ": " << frames.size() << " frames, " << per_frame
      << " detections/frame, " << fps << " frames/s (threshold " << threshold << "): "
      << (passed ? "PASS" : "FAIL") << "\n";
  return kExitOk;
}

int cmd_defaults(const Common& c, std::ostream& out) {
  const std::string text = defaults_document().dump(2) + "\n";
  out << text;
  if (!c.out.empty()) {
    const fs::path dir = prepare_out(c.out);
    write_text(dir / "defaults.json", text);
    Manifest m("defaults", c);
    m.output("defaults.json");
    m.write(dir);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vehicle tracking-by-detection and counting engine", "vcount"};
  app.require_subcommand(1);
  app.set_version_flag("--version", VCOUNT_VERSION);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Random seed")->capture_default_str();
    sub->add_option("--jobs", common.jobs, "Worker threads (0 = all cores)")->capture_default_str();
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--config", common.config, "JSON configuration file");
  };

  std::string preset, noise;
  bool zero_noise = false;
  auto* simulate = app.add_subcommand("simulate", "Generate ground truth and a noisy detection stream");
  add_common(simulate);
  simulate->add_option("--preset", preset, "Scenario preset");
  simulate->add_option("--noise", noise, "Noise preset (zero, daylight, night, rain)");
  simulate->add_flag("--zero-noise", zero_noise, "Emit ground-truth boxes unchanged");

  std::string input, tracker;
  bool nms = false;
  auto* track = app.add_subcommand("track", "Run a tracker over a detection stream");
  add_common(track);
  track->add_option("--input", input, "Detection stream (JSONL)")->required();
  track->add_option("--tracker", tracker, "iou, kiou, sort or deepsort");
  track->add_flag("--nms", nms, "Suppress near-duplicate detections first");

  std::string tracks_path, zones_path, anchor, mode, class_source;
  bool include_predicted = false;
  auto* count = app.add_subcommand("count", "Count tracks through direction zones");
  add_common(count);
  count->add_option("--tracks", tracks_path, "Tracks file (JSONL)")->required();
  count->add_option("--zones", zones_path, "Zones file (JSON)")->required();
  count->add_option("--anchor", anchor, "center or bottom_center");
  count->add_option("--mode", mode, "first_entry or entry_exit");
  count->add_option("--class-source", class_source, "majority or latest");
  count->add_flag("--include-predicted", include_predicted, "Use predicted boxes in trajectories");

  std::string auto_counts, gt_counts, condition, combination;
  auto* evaluate = app.add_subcommand("evaluate", "Compare automatic counts against ground truth");
  add_common(evaluate);
  evaluate->add_option("--auto", auto_counts, "Automatic counts CSV")->required();
  evaluate->add_option("--gt", gt_counts, "Ground-truth counts CSV")->required();
  evaluate->add_option("--condition", condition, "Condition label")->required();
  evaluate->add_option("--combination", combination, "Detector and tracker label")->required();

  std::string det_path, gt_stream, gt_tracks, heat_mode;
  double image_w = 1280.0, image_h = 720.0;
  std::optional<double> cell, match_iou;
  auto* heatmap = app.add_subcommand("heatmap", "FN/FP/TP heat maps of a stream against ground truth");
  add_common(heatmap);
  heatmap->add_option("--detections", det_path, "Detection stream (JSONL)")->required();
  heatmap->add_option("--gt", gt_stream, "Ground-truth detection stream (JSONL)");
  heatmap->add_option("--gt-tracks", gt_tracks, "Ground-truth tracks file (JSONL)");
  heatmap->add_option("--image-width", image_w)->capture_default_str();
  heatmap->add_option("--image-height", image_h)->capture_default_str();
  heatmap->add_option("--cell-size", cell, "Cell edge in pixels (default 10)");
  heatmap->add_option("--iou", match_iou, "Match threshold (default 0.5)");
  heatmap->add_option("--mode", heat_mode, "footprint or center");

  std::string manifest, matrix_zones;
  auto* matrix = app.add_subcommand("matrix", "Run every stream x tracker combination");
  add_common(matrix);
  matrix->add_option("--manifest", manifest, "Matrix manifest (JSON)")->required();
  matrix->add_option("--zones", matrix_zones, "Zones for streams given by path");

  std::string bench_input, bench_tracker;
  std::optional<std::size_t> bench_frames, bench_objects;
  std::optional<double> threshold;
  int repeat = 3;
  auto* bench = app.add_subcommand("bench", "Measure tracker throughput");
  add_common(bench);
  bench->add_option("--input", bench_input, "Detection stream; synthetic workload when omitted");
  bench->add_option("--tracker", bench_tracker, "Tracker kind (default iou)");
  bench->add_option("--frames", bench_frames, "Synthetic frames (default 20000)");
  bench->add_option("--objects", bench_objects, "Synthetic detections per frame (default 8)");
  bench->add_option("--threshold", threshold, "Frames/s gate (default 50000)");
  bench->add_option("--repeat", repeat, "Timed runs; the fastest counts")->capture_default_str();

  auto* defaults = app.add_subcommand("defaults", "Print every default parameter");
  add_common(defaults);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*simulate) return cmd_simulate(common, preset, noise, zero_noise, out);
    if (*track) return cmd_track(common, input, tracker, nms, out, err);
    if (*count)
      return cmd_count(common, tracks_path, zones_path, anchor, include_predicted, mode, class_source, out);
    if (*evaluate) return cmd_evaluate(common, auto_counts, gt_counts, condition, combination, out);
    if (*heatmap)
      return cmd_heatmap(common, det_path, gt_stream, gt_tracks, image_w, image_h, cell, match_iou, heat_mode, out,
                         err);
    if (*matrix) return cmd_matrix(common, manifest, matrix_zones, out);
    if (*bench)
      return cmd_bench(common, bench_input, bench_tracker, bench_frames, bench_objects, threshold, repeat, out, err);
    if (*defaults) return cmd_defaults(common, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: configuration: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "fault: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace vcount
