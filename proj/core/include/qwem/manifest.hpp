#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace qwem {

// One manifest per artifact-producing command: the effective configuration,
// checksummed inputs, and produced outputs, enough to re-run the command.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;  // flag -> value
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> checksum
  std::vector<std::string> outputs;                         // paths written
  std::uint64_t seed = 0;
  std::string version;      // tool version, filled by write path
  std::string started_at;   // UTC ISO-8601
  std::string finished_at;

  void add_config(const std::string& key, const std::string& value) {
    config.emplace_back(key, value);
  }
  // Records the input path together with its content checksum.
  void add_input(const std::string& path);
  void add_output(const std::string& path) { outputs.push_back(path); }
};

std::string utc_timestamp_now();

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

}  // namespace qwem
