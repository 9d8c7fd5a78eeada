#include "aqs/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace aqs {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

void insert_pair(KeyValues& cfg, const std::string& line, const std::string& where) {
  const auto eq = line.find('=');
  if (eq == std::string::npos)
    throw std::runtime_error("config: missing '=' in \"" + line + "\" (" + where + ")");
  const std::string key = trim(line.substr(0, eq));
  if (key.empty()) throw std::runtime_error("config: empty key in \"" + line + "\" (" + where + ")");
  cfg[key] = trim(line.substr(eq + 1));
}

std::string render(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

KeyValues parse_config_text(const std::string& text) {
  KeyValues cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    insert_pair(cfg, line, "config line");
  }
  return cfg;
}

KeyValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot read file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void apply_overrides(KeyValues& cfg, const std::vector<std::string>& overrides) {
  for (const auto& kv : overrides) insert_pair(cfg, kv, "override");
}

double get_real(const KeyValues& cfg, const std::string& key, double fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  try {
    size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' is not a real number: \"" + it->second +
                             "\"");
  }
}

long get_int(const KeyValues& cfg, const std::string& key, long fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  long v = 0;
  const char* first = it->second.data();
  const char* last = first + it->second.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw std::runtime_error("config: key '" + key + "' is not an integer: \"" + it->second + "\"");
  return v;
}

std::string get_str(const KeyValues& cfg, const std::string& key, const std::string& fallback) {
  const auto it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

void write_manifest(const RunManifest& m, const std::string& path) {
  nlohmann::json j;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["backend"] = m.backend == Backend::dense_oracle ? "dense_oracle" : "mps";
  j["outputs"] = m.outputs;
  j["wall_seconds"] = m.wall_seconds;
  j["evaluations"] = m.evaluations;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("manifest: cannot write " + path);
  out << j.dump(2) << "\n";
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot read " + path);
  nlohmann::json j;
  in >> j;
  RunManifest m;
  m.config = j.at("config").get<KeyValues>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.version = j.at("version").get<std::string>();
  const std::string backend = j.at("backend").get<std::string>();
  if (backend == "dense_oracle")
    m.backend = Backend::dense_oracle;
  else if (backend == "mps")
    m.backend = Backend::mps;
  else
    throw std::runtime_error("manifest: unknown backend \"" + backend + "\"");
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.wall_seconds = j.at("wall_seconds").get<double>();
  m.evaluations = j.at("evaluations").get<long>();
  return m;
}

void write_csv_text(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write " + path);
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << csv_escape(header[i]);
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::runtime_error("csv: row width mismatch in " + path);
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
    out << "\n";
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::vector<std::vector<std::string>> text;
  text.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (double v : row) cells.push_back(render(v));
    text.push_back(std::move(cells));
  }
  write_csv_text(path, header, text);
}

void write_schedule_json(const Schedule& sched, const std::string& path) {
  nlohmann::json j;
  j["chunk_lengths"] = sched.chunk_lengths;
  j["chunk_times"] = sched.chunk_times;
  j["ramp"] = sched.ramp == RampKind::linear ? "linear" : "smooth";
  j["dt"] = sched.dt;
  j["trotter_substeps"] = sched.trotter_substeps;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("schedule: cannot write " + path);
  out << j.dump(2) << "\n";
}

Schedule load_schedule_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("schedule: cannot read " + path);
  nlohmann::json j;
  in >> j;
  Schedule s;
  s.chunk_lengths = j.at("chunk_lengths").get<std::vector<double>>();
  s.chunk_times = j.at("chunk_times").get<std::vector<double>>();
  const std::string ramp = j.at("ramp").get<std::string>();
  if (ramp == "linear")
    s.ramp = RampKind::linear;
  else if (ramp == "smooth")
    s.ramp = RampKind::smooth;
  else
    throw std::runtime_error("schedule: unknown ramp \"" + ramp + "\"");
  s.dt = j.at("dt").get<double>();
  s.trotter_substeps = j.at("trotter_substeps").get<int>();
  return s;
}

}  // namespace aqs
