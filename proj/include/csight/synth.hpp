#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csight/eval.hpp"
#include "csight/image.hpp"

namespace csight {

// Desk-scale synthetic dataset: `places` distinct textured scenes, each
// captured as `views_per_place` photometrically jittered map images; queries
// replay one view with a brightness shift, pixel noise, and planted change
// rectangles recorded as ground truth. Change interiors mix fresh texture
// with fragments copied from other places' map images so the retrieval
// stages see mapped-but-misplaced words rather than silence. Changes are
// planted below the masked top band so masking never removes ground truth.
struct SynthSpec {
  int width = 384;
  int height = 288;
  int places = 5;
  int views_per_place = 10;
  int queries = 30;
  int min_changes = 1;
  int max_changes = 3;
  double min_change_area = 0.08;  // fraction of the frame area
  double max_change_area = 0.16;
  int query_noise = 2;       // per-pixel amplitude on queries
  int query_brightness = 10; // max absolute shift on queries
  int texture_rects = 30;    // textured rectangles per place composite
  int dots = 220;            // micro-texture marks per place composite
  int mask_band = 12;        // top rows marked non-interesting
};

struct Proposal {
  Rect rect;
  double score = 0.0;
  std::string label;  // empty for class-agnostic boxes
};

struct SynthDataset {
  std::vector<Image> map_images;
  std::vector<std::string> map_names;   // "map_0000" ...
  std::vector<int> map_place;           // generator place label per map image

  std::vector<Image> queries;
  std::vector<std::string> query_names;  // "query_0000" ...
  std::vector<int> query_scene;          // index of the source map image
  std::vector<GroundTruth> gt;           // aligned with queries
  std::vector<Image> masks;              // aligned with queries
  std::vector<std::vector<Proposal>> proposals;  // aligned with queries
};

// Deterministic for a given (spec, seed). Throws on an infeasible spec
// (frame too small, an unplantable change size, or inverted ranges).
SynthDataset synth_dataset(const SynthSpec& spec, std::uint64_t seed);

}  // namespace csight
