#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "homtest/detection.hpp"

namespace homtest {

// Configuration parse failure with the offending line attached.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Parse the sectioned key-value configuration format. Unknown sections or
// keys, malformed values, and entries missing a value are reported with their
// line number. Every parameter has an apparatus default, so an empty string
// yields the stock configuration.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical rendering of a configuration (stable key order); hashing this
// string identifies the configuration in manifests.
std::string render_config(const ExperimentConfig& config);

// FNV-1a over bytes, hex-encoded; stable across platforms.
std::string fnv1a_hex(const std::string& bytes);

struct RunManifest {
  std::string tool_version;
  std::string config_hash;
  uint64_t seed = 0;
  std::string created_utc;
  std::string config_text;
  std::vector<std::string> outputs;

  std::string hash() const;  // combined config+seed identity
  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

// Histogram files: '#' comment lines carrying the manifest hash and group
// metadata, one CSV header row, then tau_ps,repeat,coincidences,trials rows.
std::string histogram_to_csv(const CoincidenceHistogram& h,
                             const std::string& manifest_hash);
CoincidenceHistogram histogram_from_csv(const std::string& text);

CoincidenceHistogram load_histogram(const std::filesystem::path& path);

// Write-temp-then-rename so readers never observe partial files.
void atomic_write(const std::filesystem::path& path, const std::string& data);

}  // namespace homtest
