#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vcount/core.hpp"

namespace vcount {

// Newline-delimited detection stream, one JSON record per frame:
//   {"frame":N,"ts_ms":T,"dets":[{"bbox":[x0,y0,x1,y1],"class":"car","score":s,"emb":[...]}]}
// Blank lines are ignored. Any violation throws StreamError carrying the
// 1-based line number; nothing is returned for a partially valid input.
// Embeddings whose norm is off by more than kEmbeddingNormTolerance are
// renormalized and a message is appended to `warnings` (when non-null).
std::vector<Frame> ingest_stream(std::istream& in, std::vector<std::string>* warnings = nullptr);
std::vector<Frame> ingest_stream_file(const std::filesystem::path& path,
                                      std::vector<std::string>* warnings = nullptr);

void write_stream(std::ostream& out, const std::vector<Frame>& frames);
void write_stream_file(const std::filesystem::path& path, const std::vector<Frame>& frames);

// Track file: {"id":…,"class":…,"class_majority":…,"max_score":…,
//              "boxes":[{"frame":…,"bbox":[…],"predicted":bool}]}
std::vector<Track> read_tracks(std::istream& in);
std::vector<Track> read_tracks_file(const std::filesystem::path& path);

void write_tracks(std::ostream& out, const std::vector<Track>& tracks);
void write_tracks_file(const std::filesystem::path& path, const std::vector<Track>& tracks);

}  // namespace vcount
