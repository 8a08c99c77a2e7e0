// csight: BoW-retrieval change detection over a mapped image sequence.
//
// Subcommands: synth (generate a synthetic dataset), build (index a map
// directory), detect (run change-detection channels on one query), evaluate
// (score a dataset against its ground truth).
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 unavailable channel.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "csight/config.hpp"
#include "csight/io.hpp"
#include "csight/pipeline.hpp"
#include "csight/synth.hpp"

namespace fs = std::filesystem;

namespace {

int run_synth(const csight::SynthSpec& spec, std::uint64_t seed, const std::string& out) {
  csight::SynthDataset ds = csight::synth_dataset(spec, seed);
  csight::write_dataset(ds, out);
  std::cout << "dataset written to " << out << ": " << ds.map_images.size() << " map images, "
            << ds.queries.size() << " queries\n";
  return 0;
}

int run_build(const std::string& map_dir, const std::string& out, const csight::Config& cfg) {
  std::cout << "effective config:\n" << cfg.dump();
  csight::BuildResult r = csight::build_artifacts(map_dir, out, cfg);
  std::cout << "indexed " << r.image_count << " images into " << r.doc_count << " documents, "
            << r.vocab_size << " words, " << r.place_count << " place models\n";
  return 0;
}

int run_detect(const std::string& artifacts, const std::string& query_path,
               const csight::ChannelSet& methods, const std::string& out,
               const std::string& proposals, const std::string& mask_path,
               const std::string& map_dir) {
  csight::Artifacts art = csight::load_artifacts(artifacts);
  csight::Image query = csight::load_image(query_path);
  csight::Image mask;
  if (!mask_path.empty()) mask = csight::load_image(mask_path);
  std::string stem = fs::path(query_path).stem().string();
  csight::DetectResult res = csight::detect_query(art, query, stem, methods, proposals,
                                                  mask_path.empty() ? nullptr : &mask, map_dir);
  csight::write_detect_outputs(res, out);
  std::cout << "localized map image: " << res.localized_id << "\n";
  std::size_t top = std::min<std::size_t>(5, res.strong.size());
  for (std::size_t i = 0; i < top; ++i)
    std::cout << "  rank " << (i + 1) << ": image " << res.strong.items()[i].id << " (score "
              << res.strong.items()[i].score << ")\n";
  std::cout << "channel outputs written to " << out << "\n";
  return 0;
}

int run_evaluate(const std::string& dataset, const std::string& artifacts,
                 const csight::EvalOptions& opts, const std::string& out) {
  csight::EvalResult r = csight::evaluate_dataset(dataset, artifacts, opts);
  std::string table = csight::format_table(r);
  std::cout << table;
  if (!out.empty()) {
    fs::create_directories(out);
    csight::io::write_file(out + "/report.txt",
                           std::vector<std::uint8_t>(table.begin(), table.end()));
    std::string json = csight::to_json(r);
    csight::io::write_file(out + "/report.json",
                           std::vector<std::uint8_t>(json.begin(), json.end()));
    std::cout << "report written to " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BoW-retrieval change detection for mapped image sequences"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  csight::SynthSpec spec;
  std::uint64_t synth_seed = 7;
  std::string synth_out;
  synth->add_option("--out", synth_out, "output dataset directory")->required();
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--width", spec.width, "frame width");
  synth->add_option("--height", spec.height, "frame height");
  synth->add_option("--places", spec.places, "distinct places");
  synth->add_option("--views", spec.views_per_place, "map views per place");
  synth->add_option("--queries", spec.queries, "query count");
  synth->add_option("--min-changes", spec.min_changes, "min planted changes per query");
  synth->add_option("--max-changes", spec.max_changes, "max planted changes per query");
  synth->add_option("--min-area", spec.min_change_area, "min change area fraction");
  synth->add_option("--max-area", spec.max_change_area, "max change area fraction");
  synth->add_option("--noise", spec.query_noise, "query pixel noise amplitude");
  synth->add_option("--brightness", spec.query_brightness, "max query brightness shift");
  synth->add_option("--mask-band", spec.mask_band, "masked top band height");

  auto* build = app.add_subcommand("build", "build map artifacts from an image directory");
  std::string build_map, build_out, build_config;
  build->add_option("--map", build_map, "map image directory")->required();
  build->add_option("--out", build_out, "artifacts output directory")->required();
  build->add_option("--config", build_config, "key=value config file");

  auto* detect = app.add_subcommand("detect", "run change detection on one query image");
  std::string det_art, det_query, det_methods = "FD", det_out, det_props, det_mask, det_map;
  detect->add_option("--artifacts", det_art, "artifacts directory")->required();
  detect->add_option("--query", det_query, "query image path")->required();
  detect->add_option("--methods", det_methods, "channels, e.g. FD or FD+AD+PC");
  detect->add_option("--out", det_out, "output directory")->required();
  detect->add_option("--proposals", det_props, "proposal boxes file");
  detect->add_option("--mask", det_mask, "non-interesting-region mask image");
  detect->add_option("--map", det_map, "map imagery directory (required for PC)");

  auto* evaluate = app.add_subcommand("evaluate", "score a dataset against its ground truth");
  std::string eval_dataset, eval_art, eval_out, eval_map;
  std::vector<std::string> eval_methods;
  std::vector<double> eval_xs;
  evaluate->add_option("--dataset", eval_dataset, "dataset directory")->required();
  evaluate->add_option("--artifacts", eval_art, "artifacts directory")->required();
  evaluate->add_option("--methods", eval_methods, "method combinations to score");
  evaluate->add_option("--x", eval_xs, "top-X percentages");
  evaluate->add_option("--out", eval_out, "report output directory");
  evaluate->add_option("--map", eval_map, "map imagery directory override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  // Usage-level validation, before any data is touched.
  csight::ChannelSet det_set;
  csight::EvalOptions eval_opts;
  try {
    if (detect->parsed()) det_set = csight::ChannelSet::parse(det_methods);
    if (evaluate->parsed()) {
      if (!eval_methods.empty()) eval_opts.combos = eval_methods;
      if (!eval_xs.empty()) eval_opts.xs = eval_xs;
      for (const std::string& m : eval_opts.combos) csight::ChannelSet::parse(m);
      for (double x : eval_opts.xs)
        if (!(x > 0.0) || x > 100.0) throw std::invalid_argument("X must lie in (0, 100]");
      eval_opts.map_dir = eval_map;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (synth->parsed()) return run_synth(spec, synth_seed, synth_out);
    if (build->parsed()) {
      csight::Config cfg;
      if (!build_config.empty()) cfg = csight::Config::from_file(build_config);
      return run_build(build_map, build_out, cfg);
    }
    if (detect->parsed())
      return run_detect(det_art, det_query, det_set, det_out, det_props, det_mask, det_map);
    if (evaluate->parsed()) return run_evaluate(eval_dataset, eval_art, eval_opts, eval_out);
  } catch (const csight::ChannelUnavailable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
