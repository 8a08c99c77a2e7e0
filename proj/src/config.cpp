#include "csight/config.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "csight/io.hpp"

namespace csight {

QueryParams Config::query_params() const {
  QueryParams p;
  p.stages = {stage_tfidf, stage_ratio, stage_ransac, stage_island};
  p.ratio_threshold = ratio_threshold;
  p.ransac_iterations = ransac_iterations;
  p.ransac_inlier_px = ransac_inlier_px;
  p.ransac_seed = ransac_seed;
  p.top_v = top_v;
  p.island_gap = island_gap;
  return p;
}

FDParams Config::fd_params() const {
  FDParams p;
  p.query = query_params();
  p.top_y = top_y;
  return p;
}

PCParams Config::pc_params() const {
  PCParams p;
  p.max_keypoints = max_keypoints;
  p.detect_threshold = detect_threshold;
  p.splat_radius = splat_radius;
  return p;
}

DetectionParams Config::detection_params() const {
  DetectionParams p;
  p.coverage_min = coverage_min;
  p.strict_iou = strict_iou;
  return p;
}

std::vector<std::string> Config::template_sets() const {
  std::vector<std::string> sets;
  for (char c : templates) sets.emplace_back(1, c);
  return sets;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Key table shared by dump and parse; one row per config field.
struct KeyDef {
  const char* name;
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
};

int parse_int(const std::string& v) {
  std::size_t pos = 0;
  int r = std::stoi(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return r;
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  double r = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return r;
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw std::invalid_argument("expected a boolean");
}

const std::vector<KeyDef>& key_table() {
  auto int_key = [](const char* name, int Config::* field) {
    return KeyDef{name, [field](const Config& c) { return std::to_string(c.*field); },
                  [field](Config& c, const std::string& v) { c.*field = parse_int(v); }};
  };
  auto u32_key = [](const char* name, std::uint32_t Config::* field) {
    return KeyDef{name, [field](const Config& c) { return std::to_string(c.*field); },
                  [field](Config& c, const std::string& v) {
                    c.*field = static_cast<std::uint32_t>(std::stoul(v));
                  }};
  };
  auto dbl_key = [](const char* name, double Config::* field) {
    return KeyDef{name, [field](const Config& c) { return fmt_double(c.*field); },
                  [field](Config& c, const std::string& v) { c.*field = parse_double(v); }};
  };
  auto bool_key = [](const char* name, bool Config::* field) {
    return KeyDef{name, [field](const Config& c) { return std::string(c.*field ? "1" : "0"); },
                  [field](Config& c, const std::string& v) { c.*field = parse_bool(v); }};
  };
  static const std::vector<KeyDef> table = {
      int_key("vocab_radius", &Config::vocab_radius),
      int_key("max_keypoints", &Config::max_keypoints),
      int_key("detect_threshold", &Config::detect_threshold),
      dbl_key("ratio_threshold", &Config::ratio_threshold),
      int_key("ransac_iterations", &Config::ransac_iterations),
      dbl_key("ransac_inlier_px", &Config::ransac_inlier_px),
      u32_key("ransac_seed", &Config::ransac_seed),
      int_key("top_v", &Config::top_v),
      int_key("island_gap", &Config::island_gap),
      bool_key("stage_tfidf", &Config::stage_tfidf),
      bool_key("stage_ratio", &Config::stage_ratio),
      bool_key("stage_ransac", &Config::stage_ransac),
      bool_key("stage_island", &Config::stage_island),
      int_key("top_y", &Config::top_y),
      int_key("k_places", &Config::k_places),
      int_key("ad_components", &Config::ad_components),
      dbl_key("ad_c", &Config::ad_c),
      u32_key("cluster_seed", &Config::cluster_seed),
      int_key("cell_size", &Config::cell_size),
      int_key("splat_radius", &Config::splat_radius),
      dbl_key("coverage_min", &Config::coverage_min),
      bool_key("strict_iou", &Config::strict_iou),
      KeyDef{"templates", [](const Config& c) { return c.templates; },
             [](Config& c, const std::string& v) { c.templates = v; }},
  };
  return table;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::string Config::dump() const {
  std::string out;
  for (const KeyDef& k : key_table()) {
    out += k.name;
    out += '=';
    out += k.get(*this);
    out += '\n';
  }
  return out;
}

std::string Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump()) h = (h ^ c) * 0x100000001b3ull;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Config Config::from_text(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("malformed config line " + std::to_string(line_no) + " in " +
                               origin);
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    bool found = false;
    for (const KeyDef& k : key_table()) {
      if (key != k.name) continue;
      try {
        k.set(cfg, value);
      } catch (const std::exception&) {
        throw std::runtime_error("bad value for config key '" + key + "' in " + origin);
      }
      found = true;
      break;
    }
    if (!found) throw std::runtime_error("unknown config key '" + key + "' in " + origin);
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::vector<std::uint8_t> bytes = io::read_file(path);
  return from_text(std::string(bytes.begin(), bytes.end()), path);
}

}  // namespace csight
