#include "vcount/stream_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include <json.hpp>

#include "vcount/error.hpp"

namespace vcount {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void expect_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                 std::size_t line, std::string_view what) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) throw StreamError(line, "unexpected key '" + item.key() + "' in " + std::string(what));
  }
}

double number_at(const json& value, std::size_t line, std::string_view what) {
  if (!value.is_number()) throw StreamError(line, std::string(what) + " must be a number");
  double v = value.get<double>();
  if (!std::isfinite(v)) throw StreamError(line, std::string(what) + " must be finite");
  return v;
}

std::int64_t integer_at(const json& value, std::size_t line, std::string_view what) {
  if (!value.is_number_integer()) throw StreamError(line, std::string(what) + " must be an integer");
  auto v = value.get<std::int64_t>();
  if (v < 0) throw StreamError(line, std::string(what) + " must be non-negative");
  return v;
}

BoundingBox box_at(const json& value, std::size_t line) {
  if (!value.is_array() || value.size() != 4)
    throw StreamError(line, "bbox must be an array of 4 numbers");
  BoundingBox box{number_at(value[0], line, "bbox[0]"), number_at(value[1], line, "bbox[1]"),
                  number_at(value[2], line, "bbox[2]"), number_at(value[3], line, "bbox[3]")};
  if (!is_valid(box)) throw StreamError(line, "bbox must satisfy x_min < x_max and y_min < y_max");
  return box;
}

VehicleClass class_at(const json& value, std::size_t line) {
  if (!value.is_string()) throw StreamError(line, "class must be a string");
  try {
    return parse_vehicle_class(value.get<std::string>());
  } catch (const ValidationError& e) {
    throw StreamError(line, e.what());
  }
}

Embedding embedding_at(const json& value, std::size_t line, std::vector<std::string>* warnings) {
  if (!value.is_array() || value.size() != kEmbeddingSize)
    throw StreamError(line, "emb must be an array of " + std::to_string(kEmbeddingSize) + " numbers");
  Embedding emb;
  emb.reserve(kEmbeddingSize);
  for (const auto& x : value) emb.push_back(number_at(x, line, "emb component"));
  double norm = l2_norm(emb);
  if (!(norm > 0.0)) throw StreamError(line, "emb has zero norm");
  if (std::abs(norm - 1.0) > kEmbeddingNormTolerance) {
    for (double& x : emb) x /= norm;
    if (warnings)
      warnings->push_back("line " + std::to_string(line) + ": embedding norm " +
                          std::to_string(norm) + " renormalized to 1");
  }
  return emb;
}

Frame parse_frame(const json& rec, std::size_t line, std::vector<std::string>* warnings) {
  if (!rec.is_object()) throw StreamError(line, "record must be a JSON object");
  expect_keys(rec, {"frame", "ts_ms", "dets"}, line, "frame record");
  if (!rec.contains("frame")) throw StreamError(line, "missing 'frame'");
  if (!rec.contains("dets")) throw StreamError(line, "missing 'dets'");

  Frame frame;
  frame.index = integer_at(rec["frame"], line, "frame");
  if (rec.contains("ts_ms")) frame.timestamp_ms = integer_at(rec["ts_ms"], line, "ts_ms");

  const auto& dets = rec["dets"];
  if (!dets.is_array()) throw StreamError(line, "dets must be an array");
  frame.detections.reserve(dets.size());
  for (const auto& d : dets) {
    if (!d.is_object()) throw StreamError(line, "detection must be an object");
    expect_keys(d, {"bbox", "class", "score", "emb"}, line, "detection");
    if (!d.contains("bbox") || !d.contains("class") || !d.contains("score"))
      throw StreamError(line, "detection requires bbox, class and score");
    Detection det;
    det.box = box_at(d["bbox"], line);
    det.cls = class_at(d["class"], line);
    det.score = number_at(d["score"], line, "score");
    if (det.score < 0.0 || det.score > 1.0) throw StreamError(line, "score must lie in [0, 1]");
    if (d.contains("emb")) det.embedding = embedding_at(d["emb"], line, warnings);
    frame.detections.push_back(std::move(det));
  }
  return frame;
}

ordered_json box_json(const BoundingBox& b) {
  return ordered_json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

template <typename F>
void for_each_record(std::istream& in, F&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      throw StreamError(line, std::string("malformed JSON: ") + e.what());
    }
    fn(rec, line);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::vector<Frame> ingest_stream(std::istream& in, std::vector<std::string>* warnings) {
  std::vector<Frame> frames;
  std::vector<std::string> local_warnings;
  for_each_record(in, [&](const json& rec, std::size_t line) {
    Frame frame = parse_frame(rec, line, &local_warnings);
    if (!frames.empty() && frame.index <= frames.back().index)
      throw StreamError(line, "non-monotone frame index " + std::to_string(frame.index) +
                                  " after " + std::to_string(frames.back().index));
    frames.push_back(std::move(frame));
  });
  if (warnings) warnings->insert(warnings->end(), local_warnings.begin(), local_warnings.end());
  return frames;
}

std::vector<Frame> ingest_stream_file(const std::filesystem::path& path,
                                      std::vector<std::string>* warnings) {
  auto in = open_input(path);
  return ingest_stream(in, warnings);
}

void write_stream(std::ostream& out, const std::vector<Frame>& frames) {
  for (const auto& frame : frames) {
    ordered_json rec;
    rec["frame"] = frame.index;
    if (frame.timestamp_ms) rec["ts_ms"] = *frame.timestamp_ms;
    auto dets = ordered_json::array();
    for (const auto& det : frame.detections) {
      ordered_json d;
      d["bbox"] = box_json(det.box);
      d["class"] = to_string(det.cls);
      d["score"] = det.score;
      if (det.embedding) d["emb"] = *det.embedding;
      dets.push_back(std::move(d));
    }
    rec["dets"] = std::move(dets);
    out << rec.dump() << '\n';
  }
}

void write_stream_file(const std::filesystem::path& path, const std::vector<Frame>& frames) {
  auto out = open_output(path);
  write_stream(out, frames);
}

std::vector<Track> read_tracks(std::istream& in) {
  std::vector<Track> tracks;
  std::set<std::int64_t> ids;
  for_each_record(in, [&](const json& rec, std::size_t line) {
    if (!rec.is_object()) throw StreamError(line, "track record must be a JSON object");
    expect_keys(rec, {"id", "class", "class_majority", "max_score", "boxes"}, line, "track record");
    for (const char* key : {"id", "class", "class_majority", "max_score", "boxes"})
      if (!rec.contains(key)) throw StreamError(line, std::string("missing '") + key + "'");
    Track t;
    t.id = integer_at(rec["id"], line, "id");
    if (t.id == 0) throw StreamError(line, "id must be positive");
    if (!ids.insert(t.id).second) throw StreamError(line, "duplicate track id " + std::to_string(t.id));
    t.cls = class_at(rec["class"], line);
    t.majority_class = class_at(rec["class_majority"], line);
    t.max_score = number_at(rec["max_score"], line, "max_score");
    if (t.max_score < 0.0 || t.max_score > 1.0) throw StreamError(line, "max_score must lie in [0, 1]");
    t.status = TrackStatus::Finished;
    const auto& boxes = rec["boxes"];
    if (!boxes.is_array()) throw StreamError(line, "boxes must be an array");
    for (const auto& b : boxes) {
      if (!b.is_object()) throw StreamError(line, "track box must be an object");
      expect_keys(b, {"frame", "bbox", "predicted"}, line, "track box");
      if (!b.contains("frame") || !b.contains("bbox"))
        throw StreamError(line, "track box requires frame and bbox");
      TrackBox tb;
      tb.frame = integer_at(b["frame"], line, "frame");
      tb.box = box_at(b["bbox"], line);
      if (b.contains("predicted")) {
        if (!b["predicted"].is_boolean()) throw StreamError(line, "predicted must be a boolean");
        tb.source = b["predicted"].get<bool>() ? BoxSource::Predicted : BoxSource::Measured;
      }
      if (!t.boxes.empty() && tb.frame <= t.boxes.back().frame)
        throw StreamError(line, "track box frames must strictly increase");
      t.boxes.push_back(tb);
    }
    tracks.push_back(std::move(t));
  });
  return tracks;
}

std::vector<Track> read_tracks_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_tracks(in);
}

void write_tracks(std::ostream& out, const std::vector<Track>& tracks) {
  for (const auto& t : tracks) {
    ordered_json rec;
    rec["id"] = t.id;
    rec["class"] = to_string(t.cls);
    rec["class_majority"] = to_string(t.majority_class);
    rec["max_score"] = t.max_score;
    auto boxes = ordered_json::array();
    for (const auto& b : t.boxes) {
      ordered_json jb;
      jb["frame"] = b.frame;
      jb["bbox"] = box_json(b.box);
      jb["predicted"] = b.predicted();
      boxes.push_back(std::move(jb));
    }
    rec["boxes"] = std::move(boxes);
    out << rec.dump() << '\n';
  }
}

void write_tracks_file(const std::filesystem::path& path, const std::vector<Track>& tracks) {
  auto out = open_output(path);
  write_tracks(out, tracks);
}

}  // namespace vcount
