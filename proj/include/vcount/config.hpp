#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vcount/counting.hpp"
#include "vcount/kalman.hpp"
#include "vcount/synth.hpp"
#include "vcount/trackers.hpp"

namespace vcount {

// Every configuration file is JSON. Readers reject unknown keys and fill
// omitted keys from the defaults, so a partial block overrides only what
// it names.
using Json = nlohmann::ordered_json;

Json load_json_file(const std::filesystem::path& path);  // ConfigError on I/O or syntax errors

Json to_json(const KalmanConfig& cfg);
KalmanConfig kalman_from_json(const Json& j, KalmanConfig base = {});

// {"kind":"iou", ...fields of that kind}
Json to_json(const TrackerParams& params);
TrackerParams tracker_params_from_json(const Json& j);

Json to_json(const TrackerOptions& options);
TrackerOptions tracker_options_from_json(const Json& j, TrackerOptions base = {});

Json to_json(const CountOptions& options);
CountOptions count_options_from_json(const Json& j, CountOptions base = {});

Json to_json(const NoiseModel& noise);
// Either a preset name or an object, optionally {"preset": name, ...overrides}.
NoiseModel noise_from_json(const Json& j);

// Spawns reference lanes by name. A spawn without explicit size uses the
// class size table.
Json to_json(const Scenario& scenario);
Scenario scenario_from_json(const Json& j);

Json zones_to_json(const std::vector<Zone>& zones);
std::vector<Zone> zones_from_json(const Json& j);

// Every tunable default, grouped by module.
Json defaults_document();

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex_digest(std::uint64_t value);
// Hash of the compact serialization of `config`.
std::string config_hash(const Json& config);

}  // namespace vcount
