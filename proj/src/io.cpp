#include "homtest/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "homtest/version.hpp"

namespace homtest {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& v, int line) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected a number, got '" + v + "'");
  }
}

int parse_int(const std::string& v, int line) {
  try {
    size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected an integer, got '" + v + "'");
  }
}

std::vector<std::string> split_ws(const std::string& v) {
  std::vector<std::string> out;
  std::istringstream in(v);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section = "experiment";
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "laser" &&
          section != "detector_c" && section != "detector_d" &&
          section != "tia" && section != "defect") {
        throw ConfigError(line_no, "unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(line_no, "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "missing key before '='");
    if (value.empty()) {
      throw ConfigError(line_no, "missing value for '" + key + "'");
    }

    auto unknown = [&]() -> ConfigError {
      return ConfigError(line_no,
                         "unknown key '" + key + "' in [" + section + "]");
    };

    if (section == "experiment") {
      if (key == "rep_period_ps") cfg.rep_period_ps = parse_double(value, line_no);
      else if (key == "bin_separation_ps") cfg.bin_separation_ps = parse_double(value, line_no);
      else if (key == "thinning_interval_ns") cfg.thinning_interval_ns = parse_double(value, line_no);
      else if (key == "mean_photons_per_pulse") cfg.mean_photons_per_pulse = parse_double(value, line_no);
      else if (key == "duration_per_point_s") cfg.duration_per_point_s = parse_double(value, line_no);
      else if (key == "repeats") cfg.repeats = parse_int(value, line_no);
      else if (key == "z_basis_window") cfg.z_basis_window = parse_int(value, line_no);
      else if (key == "spectral_filter_fwhm_ghz") cfg.spectral_filter_fwhm_ghz = parse_double(value, line_no);
      else if (key == "dip_center_ps") cfg.dip_center_ps = parse_double(value, line_no);
      else if (key == "arm_transmission") cfg.arm_transmission = parse_double(value, line_no);
      else if (key == "z_gate_ps") cfg.z_gate_ps = parse_double(value, line_no);
      else if (key == "delay_offsets_ps") {
        cfg.delay_offsets_ps.clear();
        for (const auto& tok : split_ws(value)) {
          cfg.delay_offsets_ps.push_back(parse_double(tok, line_no));
        }
      } else if (key == "state_pairs") {
        cfg.state_pairs.clear();
        for (const auto& tok : split_ws(value)) {
          const auto colon = tok.find(':');
          if (colon == std::string::npos) {
            throw ConfigError(line_no, "state pair must look like A:B");
          }
          try {
            cfg.state_pairs.emplace_back(
                bb84_from_string(tok.substr(0, colon)),
                bb84_from_string(tok.substr(colon + 1)));
          } catch (const std::invalid_argument& e) {
            throw ConfigError(line_no, e.what());
          }
        }
      } else {
        throw unknown();
      }
    } else if (section == "laser") {
      if (key == "pulse_duration_ps") cfg.laser.pulse_duration_ps = parse_double(value, line_no);
      else if (key == "chirp") cfg.laser.chirp = parse_double(value, line_no);
      else if (key == "timing_jitter_ps") cfg.laser.timing_jitter_ps = parse_double(value, line_no);
      else if (key == "intensity_variance") cfg.laser.intensity_variance = parse_double(value, line_no);
      else if (key == "center_frequency_thz") cfg.laser.center_frequency_thz = parse_double(value, line_no);
      else if (key == "center_freq_jitter_ghz") cfg.laser.center_freq_jitter_ghz = parse_double(value, line_no);
      else throw unknown();
    } else if (section == "detector_c" || section == "detector_d") {
      DetectorModel& det = section == "detector_c" ? cfg.detector_c : cfg.detector_d;
      if (key == "efficiency") det.efficiency = parse_double(value, line_no);
      else if (key == "dark_rate_hz") det.dark_rate_hz = parse_double(value, line_no);
      else if (key == "recovery_time_ns") det.recovery_time_ns = parse_double(value, line_no);
      else if (key == "jitter_sigma_ps") det.jitter_sigma_ps = parse_double(value, line_no);
      else throw unknown();
    } else if (section == "tia") {
      if (key == "resolution_ps") cfg.tia.resolution_ps = parse_double(value, line_no);
      else if (key == "jitter_ps") cfg.tia.jitter_ps = parse_double(value, line_no);
      else if (key == "coincidence_window_ps") cfg.tia.coincidence_window_ps = parse_double(value, line_no);
      else throw unknown();
    } else if (section == "defect") {
      if (key == "state") {
        try {
          cfg.defect_state = bb84_from_string(value);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(line_no, e.what());
        }
      } else if (key == "overlap_scale") {
        cfg.defect_overlap_scale = parse_double(value, line_no);
      } else {
        throw unknown();
      }
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(line_no, std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "[experiment]\n";
  o << "rep_period_ps = " << c.rep_period_ps << "\n";
  o << "bin_separation_ps = " << c.bin_separation_ps << "\n";
  o << "thinning_interval_ns = " << c.thinning_interval_ns << "\n";
  o << "mean_photons_per_pulse = " << c.mean_photons_per_pulse << "\n";
  o << "delay_offsets_ps =";
  for (double t : c.delay_offsets_ps) o << " " << t;
  o << "\n";
  o << "duration_per_point_s = " << c.duration_per_point_s << "\n";
  o << "repeats = " << c.repeats << "\n";
  o << "state_pairs =";
  for (const auto& [a, b] : c.state_pairs) {
    o << " " << to_string(a) << ":" << to_string(b);
  }
  o << "\n";
  o << "z_basis_window = " << c.z_basis_window << "\n";
  o << "spectral_filter_fwhm_ghz = " << c.spectral_filter_fwhm_ghz << "\n";
  o << "dip_center_ps = " << c.dip_center_ps << "\n";
  o << "arm_transmission = " << c.arm_transmission << "\n";
  o << "z_gate_ps = " << c.z_gate_ps << "\n";
  o << "[laser]\n";
  o << "pulse_duration_ps = " << c.laser.pulse_duration_ps << "\n";
  o << "chirp = " << c.laser.chirp << "\n";
  o << "timing_jitter_ps = " << c.laser.timing_jitter_ps << "\n";
  o << "intensity_variance = " << c.laser.intensity_variance << "\n";
  o << "center_frequency_thz = " << c.laser.center_frequency_thz << "\n";
  o << "center_freq_jitter_ghz = " << c.laser.center_freq_jitter_ghz << "\n";
  const auto det = [&](const char* name, const DetectorModel& d) {
    o << "[" << name << "]\n";
    o << "efficiency = " << d.efficiency << "\n";
    o << "dark_rate_hz = " << d.dark_rate_hz << "\n";
    o << "recovery_time_ns = " << d.recovery_time_ns << "\n";
    o << "jitter_sigma_ps = " << d.jitter_sigma_ps << "\n";
  };
  det("detector_c", c.detector_c);
  det("detector_d", c.detector_d);
  o << "[tia]\n";
  o << "resolution_ps = " << c.tia.resolution_ps << "\n";
  o << "jitter_ps = " << c.tia.jitter_ps << "\n";
  o << "coincidence_window_ps = " << c.tia.coincidence_window_ps << "\n";
  if (c.defect_state) {
    o << "[defect]\n";
    o << "state = " << to_string(*c.defect_state) << "\n";
    o << "overlap_scale = " << c.defect_overlap_scale << "\n";
  }
  return o.str();
}

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunManifest::hash() const {
  return fnv1a_hex(config_hash + ":" + std::to_string(seed));
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = "homtest";
  j["version"] = tool_version;
  j["config_hash"] = config_hash;
  j["manifest_hash"] = hash();
  j["seed"] = seed;
  j["created_utc"] = created_utc;
  j["config"] = config_text;
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  RunManifest m;
  m.tool_version = j.at("version").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.seed = j.at("seed").get<uint64_t>();
  m.created_utc = j.value("created_utc", "");
  m.config_text = j.value("config", "");
  m.outputs = j.value("outputs", std::vector<std::string>{});
  return m;
}

std::string histogram_to_csv(const CoincidenceHistogram& h,
                             const std::string& manifest_hash) {
  std::ostringstream o;
  o.precision(17);
  o << "# homtest coincidence histogram\n";
  o << "# manifest_hash = " << manifest_hash << "\n";
  o << "# group = " << h.group << "\n";
  o << "# state_a = " << to_string(h.state_a) << "\n";
  o << "# state_b = " << to_string(h.state_b) << "\n";
  o << "# tau_ref_ps = " << h.tau_ref_ps << "\n";
  o << "tau_ps,repeat,coincidences,trials\n";
  for (int i = 0; i < h.point_count(); ++i) {
    for (size_t r = 0; r < h.counts[i].size(); ++r) {
      o << h.tau_ps[i] << "," << r << "," << h.counts[i][r] << "," << h.trials
        << "\n";
    }
  }
  return o.str();
}

CoincidenceHistogram histogram_from_csv(const std::string& text) {
  CoincidenceHistogram h;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto eq = t.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(t.substr(1, eq - 1));
      const std::string value = trim(t.substr(eq + 1));
      if (key == "group") h.group = value;
      else if (key == "state_a") h.state_a = bb84_from_string(value);
      else if (key == "state_b") h.state_b = bb84_from_string(value);
      else if (key == "tau_ref_ps") h.tau_ref_ps = parse_double(value, line_no);
      continue;
    }
    if (!header_seen) {
      if (t != "tau_ps,repeat,coincidences,trials") {
        throw std::runtime_error("histogram line " + std::to_string(line_no) +
                                 ": unexpected header '" + t + "'");
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(t);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() != 4) {
      throw std::runtime_error("histogram line " + std::to_string(line_no) +
                               ": expected 4 columns");
    }
    const double tau = parse_double(cells[0], line_no);
    const int repeat = parse_int(cells[1], line_no);
    const auto count = static_cast<int64_t>(std::stoll(cells[2]));
    const auto trials = static_cast<int64_t>(std::stoll(cells[3]));
    if (count < 0) {
      throw std::runtime_error("histogram line " + std::to_string(line_no) +
                               ": negative count");
    }
    h.trials = trials;
    int idx = -1;
    for (int i = 0; i < h.point_count(); ++i) {
      if (h.tau_ps[i] == tau) {
        idx = i;
        break;
      }
    }
    if (idx < 0) {
      h.tau_ps.push_back(tau);
      h.counts.emplace_back();
      idx = h.point_count() - 1;
    }
    if (static_cast<int>(h.counts[idx].size()) != repeat) {
      throw std::runtime_error("histogram line " + std::to_string(line_no) +
                               ": repeats out of order for tau " + cells[0]);
    }
    h.counts[idx].push_back(count);
  }
  if (!header_seen || h.point_count() == 0) {
    throw std::runtime_error("histogram file has no data rows");
  }
  h.recompute_stats();
  return h;
}

CoincidenceHistogram load_histogram(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open histogram file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return histogram_from_csv(buf.str());
}

void atomic_write(const std::filesystem::path& path, const std::string& data) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << data;
    if (!out.good()) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace homtest
