#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "csight/anomaly.hpp"
#include "csight/config.hpp"
#include "csight/eval.hpp"
#include "csight/fd.hpp"
#include "csight/index.hpp"
#include "csight/pairwise.hpp"
#include "csight/synth.hpp"

namespace csight {

// The detection channels requested for a run.
struct ChannelSet {
  bool fd = false;
  bool ad = false;
  bool pc = false;

  // "FD", "fd+ad+pc", "FD,AD": case-insensitive, '+' or ',' separated.
  // Throws invalid_argument for unknown names or an empty set.
  static ChannelSet parse(const std::string& spec);
  std::string canonical() const;  // e.g. "FD+AD+PC"
  int count() const { return (fd ? 1 : 0) + (ad ? 1 : 0) + (pc ? 1 : 0); }
};

// Raised when a requested channel cannot run with the available artifacts
// (e.g. PC without map imagery on disk).
struct ChannelUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BuildResult {
  std::size_t image_count = 0;
  std::size_t vocab_size = 0;
  std::size_t doc_count = 0;
  std::size_t place_count = 0;
};

// Offline map building: reads map_dir images (*.png/*.pgm; ids follow sorted
// filename order), grows the vocabulary, indexes template-ROI documents,
// clusters places, and trains per-place models. Writes config.txt, vocab.bin,
// index.bin, models/place_NNN.bin, assignments.txt, and manifest.json into
// out_dir. Byte-identical for identical inputs and config.
BuildResult build_artifacts(const std::string& map_dir, const std::string& out_dir,
                            const Config& cfg);

// Artifact bundle. The AD models and the image-name manifest are loaded
// lazily by detect_query, so FD-only runs touch neither the map imagery nor
// any per-place files.
struct Artifacts {
  std::string dir;
  Config cfg;
  Vocabulary vocab;
  InvertedIndex index;
  std::vector<std::string> image_names;      // id order; filled on demand
  std::vector<PlaceModel> models;            // filled on demand
  std::map<std::uint32_t, int> assignments;  // filled on demand
};

Artifacts load_artifacts(const std::string& dir);

struct ChannelOutput {
  std::string name;  // "FD", "AD", "PC"
  LocMap loc;
  CellGrid cells;
};

struct DetectResult {
  RankedList strong;
  std::uint32_t localized_id = 0;
  std::vector<double> obb_ranks;             // 0 marks feature-less ROIs
  std::vector<ChannelOutput> channels;       // FD, AD, PC order, requested only
  CellGrid fused;
};

// Runs the requested channels on one query image. proposals_path and map_dir
// may be empty; mask may be null. PC without map_dir (or with the paired map
// image missing) throws ChannelUnavailable.
DetectResult detect_query(Artifacts& art, const Image& query, const std::string& query_name,
                          const ChannelSet& methods, const std::string& proposals_path,
                          const Image* mask, const std::string& map_dir);

// Writes per-channel rasters (NAME.loc + NAME.png), per-channel and fused
// cell grids (NAME_cells.json, fused_cells.json), and localization.json.
void write_detect_outputs(const DetectResult& res, const std::string& out_dir);

struct EvalOptions {
  std::vector<std::string> combos = {"FD", "AD", "PC", "FD+AD", "FD+PC", "FD+AD+PC"};
  std::vector<double> xs = {5, 10, 15, 20};
  std::string map_dir;  // defaults to <dataset>/map when empty
};

struct EvalResult {
  std::vector<double> xs;
  std::vector<std::string> combo_names;
  std::vector<std::vector<double>> accuracy;  // [combo][x], percent
  LeaderStats leaders;                        // over combos; empty for 1 combo
  std::size_t query_count = 0;
  std::size_t object_count = 0;
  double rank1_accuracy = -1.0;  // percent; -1 when no scene labels exist
};

// Evaluates every query under <dataset>/queries against gt.txt, running each
// channel once per query and fusing per combo.
EvalResult evaluate_dataset(const std::string& dataset_dir, const std::string& artifacts_dir,
                            const EvalOptions& opts = {});

// Aligned plain-text accuracy table (rows = methods, columns = X) plus
// leader columns.
std::string format_table(const EvalResult& r);
std::string to_json(const EvalResult& r);
std::string to_json(const DetectResult& r);

// On-disk dataset layout consumed by build/detect/evaluate: map/*.png,
// queries/*.png, masks/*.png, proposals/*.txt, gt.txt, and scenes.txt
// (query name -> source map name, the localization oracle).
void write_dataset(const SynthDataset& ds, const std::string& out_dir);

}  // namespace csight
