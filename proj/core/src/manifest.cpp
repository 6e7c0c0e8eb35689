#include "qwem/manifest.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>

#include "qwem/error.hpp"
#include "qwem/text_io.hpp"
#include "qwem/version.hpp"

namespace qwem {

void RunManifest::add_input(const std::string& path) {
  inputs.emplace_back(path, file_checksum(path));
}

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

std::string manifest_to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::ordered_json in = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.inputs) in[k] = v;
  j["inputs"] = in;
  j["outputs"] = m.outputs;
  j["seed"] = m.seed;
  j["version"] = m.version.empty() ? kVersion : m.version;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid manifest JSON: ") + e.what());
  }
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    for (const auto& [k, v] : j.at("config").items())
      m.config.emplace_back(k, v.get<std::string>());
    for (const auto& [k, v] : j.at("inputs").items())
      m.inputs.emplace_back(k, v.get<std::string>());
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.at("version").get<std::string>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("manifest missing required field: ") + e.what());
  }
  return m;
}

void write_manifest(const RunManifest& m, const std::string& path) {
  write_text_file(path, manifest_to_json(m));
}

RunManifest read_manifest(const std::string& path) {
  return manifest_from_json(read_text_file(path));
}

}  // namespace qwem
