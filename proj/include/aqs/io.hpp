#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aqs/evolve.hpp"

namespace aqs {

enum class Backend { dense_oracle, mps };

// Flat key-value configuration: `key = value` lines, '#' comments. Parse and
// lookup errors always name the offending key.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_config_file(const std::string& path);
KeyValues parse_config_text(const std::string& text);

// "key=value" strings (CLI overrides) merged on top, later wins.
void apply_overrides(KeyValues& cfg, const std::vector<std::string>& overrides);

// Typed lookups: missing key falls back; malformed value throws with the key
// name in the message.
double get_real(const KeyValues& cfg, const std::string& key, double fallback);
long get_int(const KeyValues& cfg, const std::string& key, long fallback);
std::string get_str(const KeyValues& cfg, const std::string& key, const std::string& fallback);

struct RunManifest {
  KeyValues config;  // the exact configuration the run used
  std::uint64_t seed = 1;
  std::string version;
  Backend backend = Backend::dense_oracle;
  std::vector<std::string> outputs;  // files this run wrote
  double wall_seconds = 0.0;
  long evaluations = 0;

  bool operator==(const RunManifest&) const = default;
};

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest load_manifest(const std::string& path);

// CSV with a header row; numeric cells rendered with round-trip precision.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
void write_csv_text(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

void write_schedule_json(const Schedule& sched, const std::string& path);
Schedule load_schedule_json(const std::string& path);

}  // namespace aqs
