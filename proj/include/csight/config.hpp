#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csight/eval.hpp"
#include "csight/fd.hpp"
#include "csight/index.hpp"
#include "csight/pairwise.hpp"

namespace csight {

// Every tunable of the pipeline as a flat key=value config. Defaults match
// the shipped behavior; from_file rejects unknown keys so typos fail loudly.
struct Config {
  int vocab_radius = 64;
  int max_keypoints = 500;
  int detect_threshold = 20;
  double ratio_threshold = 0.8;
  int ransac_iterations = 200;
  double ransac_inlier_px = 5.0;
  std::uint32_t ransac_seed = 7;
  int top_v = 20;
  int island_gap = 3;
  bool stage_tfidf = true;
  bool stage_ratio = true;
  bool stage_ransac = true;
  bool stage_island = true;
  int top_y = 10;
  int k_places = 10;
  int ad_components = 8;
  double ad_c = 0.8;
  std::uint32_t cluster_seed = 5;
  int cell_size = 10;
  int splat_radius = 8;
  double coverage_min = 0.5;
  bool strict_iou = false;
  std::string templates = "JBHVC";  // one letter per template set

  QueryParams query_params() const;
  FDParams fd_params() const;
  PCParams pc_params() const;
  DetectionParams detection_params() const;
  std::vector<std::string> template_sets() const;

  // Canonical key=value dump, one line per key in fixed order; parsing the
  // dump reproduces the config exactly.
  std::string dump() const;
  // FNV-1a hash of the dump, as fixed-width hex.
  std::string hash() const;

  static Config from_text(const std::string& text, const std::string& origin);
  static Config from_file(const std::string& path);
};

}  // namespace csight
