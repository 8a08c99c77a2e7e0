#pragma once

// Shared scaffolding for the test binaries: scratch directories, random
// raster generators, and a small dataset/artifacts bundle built once per
// process and reused by the cases that need real imagery.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "csight/config.hpp"
#include "csight/image.hpp"
#include "csight/pipeline.hpp"
#include "csight/synth.hpp"

namespace testutil {

// Fresh directory under the system temp root; wiped on every call.
inline std::string scratch_dir(const std::string& name) {
  namespace fs = std::filesystem;
  fs::path p = fs::temp_directory_path() / "csight_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

// Random rectangle composite with enough corners for the feature stack.
inline csight::Image textured_image(std::uint32_t seed, int w = 96, int h = 96) {
  std::mt19937 rng(seed);
  csight::Image img(w, h, static_cast<std::uint8_t>(60 + rng() % 120));
  for (int t = 0; t < 40; ++t) {
    int rw = 4 + static_cast<int>(rng() % static_cast<unsigned>(w / 3));
    int rh = 4 + static_cast<int>(rng() % static_cast<unsigned>(h / 3));
    int x = static_cast<int>(rng() % static_cast<unsigned>(w));
    int y = static_cast<int>(rng() % static_cast<unsigned>(h));
    auto v = static_cast<std::uint8_t>(20 + rng() % 215);
    for (int yy = y; yy < std::min(h, y + rh); ++yy)
      for (int xx = x; xx < std::min(w, x + rw); ++xx) img.at(xx, yy) = v;
  }
  return img;
}

// Two places, three views each, two queries; written to disk and indexed once.
struct MiniWorld {
  csight::SynthDataset ds;
  csight::Config cfg;
  std::string root;
  std::string dataset_dir;
  std::string artifacts_dir;
};

inline const MiniWorld& mini_world() {
  static const MiniWorld world = [] {
    MiniWorld w;
    csight::SynthSpec spec;
    spec.places = 2;
    spec.views_per_place = 3;
    spec.queries = 2;
    w.ds = csight::synth_dataset(spec, 5);
    w.root = scratch_dir("mini_world");
    w.dataset_dir = w.root + "/dataset";
    w.artifacts_dir = w.root + "/artifacts";
    csight::write_dataset(w.ds, w.dataset_dir);
    csight::build_artifacts(w.dataset_dir + "/map", w.artifacts_dir, w.cfg);
    return w;
  }();
  return world;
}

}  // namespace testutil
