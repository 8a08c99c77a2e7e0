#include "csight/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "csight/io.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace csight {

ChannelSet ChannelSet::parse(const std::string& spec) {
  ChannelSet set;
  std::string token;
  auto flush = [&set, &token] {
    if (token.empty()) return;
    std::string t;
    for (char c : token) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (t == "FD")
      set.fd = true;
    else if (t == "AD")
      set.ad = true;
    else if (t == "PC")
      set.pc = true;
    else
      throw std::invalid_argument("unknown method: " + token);
    token.clear();
  };
  for (char c : spec) {
    if (c == '+' || c == ',' || c == ' ')
      flush();
    else
      token += c;
  }
  flush();
  if (set.count() == 0) throw std::invalid_argument("no methods requested");
  return set;
}

std::string ChannelSet::canonical() const {
  std::string s;
  for (const char* name : {fd ? "FD" : "", ad ? "AD" : "", pc ? "PC" : ""}) {
    if (!*name) continue;
    if (!s.empty()) s += '+';
    s += name;
  }
  return s;
}

namespace {

std::vector<std::string> list_images(const std::string& dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".pgm") names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string stem_of(const std::string& name) { return fs::path(name).stem().string(); }

void write_text(const std::string& path, const std::string& text) {
  io::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text(const std::string& path) {
  std::vector<std::uint8_t> bytes = io::read_file(path);
  return {bytes.begin(), bytes.end()};
}

ordered_json grid_json(const CellGrid& g) {
  ordered_json j;
  j["cell_size"] = g.cell_size;
  j["cols"] = g.cols;
  j["rows"] = g.rows;
  j["image_width"] = g.image_width;
  j["image_height"] = g.image_height;
  j["values"] = g.values;
  return j;
}

}  // namespace

BuildResult build_artifacts(const std::string& map_dir, const std::string& out_dir,
                            const Config& cfg) {
  if (!fs::is_directory(map_dir)) throw std::runtime_error("missing directory: " + map_dir);
  std::vector<std::string> names = list_images(map_dir);
  if (names.empty()) throw std::runtime_error("no images in " + map_dir);

  Vocabulary vocab(cfg.vocab_radius);
  InvertedIndex index;
  std::vector<Image> images;
  images.reserve(names.size());
  for (std::size_t id = 0; id < names.size(); ++id) {
    Image img = load_image(map_dir + "/" + names[id]);
    BoWImage bow =
        extract_bow(img, vocab, true, cfg.max_keypoints, static_cast<std::uint32_t>(id));
    std::vector<ROI> rois = template_rois(img.width, img.height, cfg.template_sets());
    index.add(static_cast<std::uint32_t>(id), rois, bow);
    images.push_back(std::move(img));
  }
  index.freeze();

  int k = std::min<int>(cfg.k_places, static_cast<int>(images.size()));
  std::vector<int> assign = cluster_places(images, k, cfg.cluster_seed);
  std::vector<PlaceModel> models;
  for (int p = 0; p < k; ++p) {
    std::vector<Image> cluster;
    for (std::size_t i = 0; i < images.size(); ++i)
      if (assign[i] == p) cluster.push_back(images[i]);
    int d = std::min<int>(cfg.ad_components, static_cast<int>(cluster.size()));
    models.push_back(train_place_model(cluster, d, p, cfg.ad_c));
  }

  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/models");
  write_text(out_dir + "/config.txt", cfg.dump());
  vocab.save(out_dir + "/vocab.bin");
  index.save(out_dir + "/index.bin");
  for (const PlaceModel& m : models) {
    char name[32];
    std::snprintf(name, sizeof name, "place_%03d.bin", m.place_id);
    m.save(out_dir + "/models/" + name);
  }
  std::string assignments;
  for (std::size_t i = 0; i < assign.size(); ++i)
    assignments += std::to_string(i) + " " + std::to_string(assign[i]) + "\n";
  write_text(out_dir + "/assignments.txt", assignments);

  ordered_json manifest;
  manifest["artifact"] = "csight-map";
  manifest["config_hash"] = cfg.hash();
  manifest["image_count"] = names.size();
  manifest["vocab_size"] = vocab.size();
  manifest["doc_count"] = index.doc_count();
  manifest["place_count"] = k;
  manifest["cluster_seed"] = cfg.cluster_seed;
  manifest["images"] = names;
  write_text(out_dir + "/manifest.json", manifest.dump(2) + "\n");

  return {names.size(), vocab.size(), index.doc_count(), static_cast<std::size_t>(k)};
}

Artifacts load_artifacts(const std::string& dir) {
  Artifacts art;
  art.dir = dir;
  art.cfg = Config::from_file(dir + "/config.txt");
  art.vocab = Vocabulary::load(dir + "/vocab.bin");
  art.index = InvertedIndex::load(dir + "/index.bin");
  return art;
}

namespace {

void ensure_models(Artifacts& art) {
  if (!art.models.empty()) return;
  std::string models_dir = art.dir + "/models";
  if (!fs::is_directory(models_dir))
    throw std::runtime_error("missing place models in " + art.dir);
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(models_dir))
    if (entry.path().extension() == ".bin") names.push_back(entry.path().string());
  std::sort(names.begin(), names.end());
  if (names.empty()) throw std::runtime_error("missing place models in " + art.dir);
  for (const std::string& n : names) art.models.push_back(PlaceModel::load(n));

  std::istringstream in(read_text(art.dir + "/assignments.txt"));
  std::uint32_t id;
  int place;
  while (in >> id >> place) art.assignments[id] = place;
  if (art.assignments.empty()) throw std::runtime_error("empty assignments in " + art.dir);
}

void ensure_manifest(Artifacts& art) {
  if (!art.image_names.empty()) return;
  ordered_json manifest = ordered_json::parse(read_text(art.dir + "/manifest.json"));
  for (const auto& name : manifest.at("images"))
    art.image_names.push_back(name.get<std::string>());
}

}  // namespace

DetectResult detect_query(Artifacts& art, const Image& query, const std::string& query_name,
                          const ChannelSet& methods, const std::string& proposals_path,
                          const Image* mask, const std::string& map_dir) {
  if (methods.count() == 0) throw std::invalid_argument("no methods requested");
  const Config& cfg = art.cfg;

  BoWImage bow = extract_bow(query, art.vocab, false, cfg.max_keypoints);
  std::vector<ROI> rois = template_rois(query.width, query.height, cfg.template_sets());
  if (!proposals_path.empty()) {
    std::vector<ROI> props = load_proposals(proposals_path, query_name, query.width, query.height);
    for (ROI& p : props) {
      p.roi_id = static_cast<int>(rois.size());
      rois.push_back(p);
    }
  }

  FDOutput fd = fd_loc_map(art.index, bow, rois, query.width, query.height, cfg.fd_params());
  DetectResult res;
  res.strong = fd.strong;
  res.localized_id = fd.strong.items().front().id;
  res.obb_ranks = fd.obb_ranks;

  auto add_channel = [&res, &cfg, mask](const char* name, LocMap loc) {
    if (mask) loc = apply_mask(loc, *mask);
    CellGrid cells = pool_cells(loc, cfg.cell_size);
    res.channels.push_back({name, std::move(loc), std::move(cells)});
  };

  if (methods.fd) add_channel("FD", std::move(fd.loc));
  if (methods.ad) {
    ensure_models(art);
    add_channel("AD", ad_loc_map(art.models, art.assignments, query, res.localized_id));
  }
  if (methods.pc) {
    if (map_dir.empty())
      throw ChannelUnavailable("PC unavailable: map imagery directory not provided");
    ensure_manifest(art);
    if (res.localized_id >= art.image_names.size())
      throw std::runtime_error("localized id missing from manifest");
    std::string path = map_dir + "/" + art.image_names[res.localized_id];
    if (!fs::exists(path)) throw ChannelUnavailable("PC unavailable: missing map image " + path);
    Image map_img = load_image(path);
    add_channel("PC", pc_loc_map(query, map_img, cfg.pc_params()));
  }

  std::vector<CellGrid> grids;
  grids.reserve(res.channels.size());
  for (const ChannelOutput& c : res.channels) grids.push_back(c.cells);
  res.fused = grids.size() == 1 ? grids.front() : fuse_channels(grids);
  return res;
}

std::string to_json(const DetectResult& r) {
  ordered_json j;
  j["localized"] = r.localized_id;
  ordered_json strong = ordered_json::array();
  for (const ScoredImage& s : r.strong.items()) strong.push_back({{"id", s.id}, {"score", s.score}});
  j["strong"] = strong;
  ordered_json names = ordered_json::array();
  for (const ChannelOutput& c : r.channels) names.push_back(c.name);
  j["channels"] = names;
  j["obb_ranks"] = r.obb_ranks;
  return j.dump(2) + "\n";
}

void write_detect_outputs(const DetectResult& res, const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (const ChannelOutput& c : res.channels) {
    std::string lower;
    for (char ch : c.name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    save_loc_map(c.loc, out_dir + "/" + lower + ".loc");
    save_loc_preview(c.loc, out_dir + "/" + lower + ".png");
    write_text(out_dir + "/" + lower + "_cells.json", grid_json(c.cells).dump(2) + "\n");
  }
  write_text(out_dir + "/fused_cells.json", grid_json(res.fused).dump(2) + "\n");
  write_text(out_dir + "/localization.json", to_json(res));
}

EvalResult evaluate_dataset(const std::string& dataset_dir, const std::string& artifacts_dir,
                            const EvalOptions& opts) {
  std::string gt_path = dataset_dir + "/gt.txt";
  if (!fs::exists(gt_path)) throw std::runtime_error("missing ground truth: " + gt_path);
  std::vector<GroundTruth> gt_entries = load_ground_truth(gt_path);

  std::vector<ChannelSet> combos;
  ChannelSet needed;
  for (const std::string& name : opts.combos) {
    ChannelSet set = ChannelSet::parse(name);
    needed.fd |= set.fd;
    needed.ad |= set.ad;
    needed.pc |= set.pc;
    combos.push_back(set);
  }
  if (combos.empty()) throw std::invalid_argument("no method combinations requested");

  std::string map_dir = opts.map_dir.empty() ? dataset_dir + "/map" : opts.map_dir;
  Artifacts art = load_artifacts(artifacts_dir);

  std::string queries_dir = dataset_dir + "/queries";
  if (!fs::is_directory(queries_dir))
    throw std::runtime_error("missing directory: " + queries_dir);
  std::vector<std::string> query_files = list_images(queries_dir);

  // scenes.txt (when present) carries the true source map image per query.
  std::map<std::string, std::string> truth;
  if (fs::exists(dataset_dir + "/scenes.txt")) {
    std::istringstream in(read_text(dataset_dir + "/scenes.txt"));
    std::string q, m;
    while (in >> q >> m) truth[q] = m;
  }

  EvalResult result;
  result.xs = opts.xs;
  for (const ChannelSet& c : combos) result.combo_names.push_back(c.canonical());

  std::vector<std::vector<CellGrid>> combo_grids(combos.size());
  std::vector<GroundTruth> aligned;
  std::vector<std::vector<int>> grades;
  std::size_t rank1_hits = 0, rank1_total = 0;
  const std::vector<double> buckets(std::begin(kGradeBuckets), std::end(kGradeBuckets));
  DetectionParams det = art.cfg.detection_params();

  for (const std::string& file : query_files) {
    std::string stem = stem_of(file);
    Image query = load_image(queries_dir + "/" + file);
    Image mask;
    bool has_mask = fs::exists(dataset_dir + "/masks/" + stem + ".png");
    if (has_mask) mask = load_image(dataset_dir + "/masks/" + stem + ".png");
    std::string proposals;
    if (fs::exists(dataset_dir + "/proposals/" + stem + ".txt"))
      proposals = dataset_dir + "/proposals/" + stem + ".txt";

    DetectResult dr = detect_query(art, query, stem, needed, proposals,
                                   has_mask ? &mask : nullptr, map_dir);

    if (!truth.empty()) {
      ++rank1_total;
      ensure_manifest(art);
      auto it = truth.find(stem);
      if (it != truth.end() && dr.localized_id < art.image_names.size() &&
          stem_of(art.image_names[dr.localized_id]) == it->second)
        ++rank1_hits;
    }

    GroundTruth gt{stem, {}};
    for (const GroundTruth& g : gt_entries)
      if (g.query_id == stem) gt = g;
    aligned.push_back(gt);
    result.object_count += gt.change_boxes.size();

    auto grid_of = [&dr](const char* name) -> const CellGrid& {
      for (const ChannelOutput& c : dr.channels)
        if (c.name == name) return c.cells;
      throw std::logic_error("channel missing from detection result");
    };
    std::vector<int> row;
    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
      std::vector<CellGrid> parts;
      if (combos[ci].fd) parts.push_back(grid_of("FD"));
      if (combos[ci].ad) parts.push_back(grid_of("AD"));
      if (combos[ci].pc) parts.push_back(grid_of("PC"));
      CellGrid fused = parts.size() == 1 ? parts.front() : fuse_channels(parts);
      row.push_back(detection_grade(fused, gt, buckets, det));
      combo_grids[ci].push_back(std::move(fused));
    }
    grades.push_back(std::move(row));
  }

  result.query_count = query_files.size();
  result.accuracy.assign(combos.size(), {});
  for (std::size_t ci = 0; ci < combos.size(); ++ci)
    for (double x : opts.xs)
      result.accuracy[ci].push_back(top_x_accuracy(combo_grids[ci], aligned, x, det));
  if (combos.size() >= 2 && !grades.empty()) result.leaders = leader_stats(grades);
  if (rank1_total > 0)
    result.rank1_accuracy = 100.0 * static_cast<double>(rank1_hits) / rank1_total;
  return result;
}

std::string format_table(const EvalResult& r) {
  std::ostringstream out;
  out << "queries: " << r.query_count << "  objects: " << r.object_count << "\n";
  if (r.rank1_accuracy >= 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "rank-1 localization: %.1f%%\n", r.rank1_accuracy);
    out << buf;
  }
  out << "\n";
  std::size_t name_w = 8;
  for (const std::string& n : r.combo_names) name_w = std::max(name_w, n.size());
  out << std::string(name_w + 2, ' ');
  char cell[64];
  for (double x : r.xs) {
    std::snprintf(cell, sizeof cell, "X=%-6g", x);
    out << cell;
  }
  if (!r.leaders.solo.empty()) out << "solo    co";
  out << "\n";
  for (std::size_t ci = 0; ci < r.combo_names.size(); ++ci) {
    out << r.combo_names[ci] << std::string(name_w + 2 - r.combo_names[ci].size(), ' ');
    for (double a : r.accuracy[ci]) {
      std::snprintf(cell, sizeof cell, "%-8.1f", a);
      out << cell;
    }
    if (!r.leaders.solo.empty()) {
      std::snprintf(cell, sizeof cell, "%-8.2f%.2f", r.leaders.solo[ci], r.leaders.co[ci]);
      out << cell;
    }
    out << "\n";
  }
  return out.str();
}

std::string to_json(const EvalResult& r) {
  ordered_json j;
  j["query_count"] = r.query_count;
  j["object_count"] = r.object_count;
  if (r.rank1_accuracy >= 0.0) j["rank1_accuracy"] = r.rank1_accuracy;
  j["xs"] = r.xs;
  ordered_json methods = ordered_json::array();
  for (std::size_t ci = 0; ci < r.combo_names.size(); ++ci) {
    ordered_json m;
    m["name"] = r.combo_names[ci];
    ordered_json acc;
    for (std::size_t xi = 0; xi < r.xs.size(); ++xi)
      acc[std::to_string(static_cast<long long>(r.xs[xi]))] = r.accuracy[ci][xi];
    m["accuracy"] = acc;
    if (!r.leaders.solo.empty()) {
      m["solo_leader"] = r.leaders.solo[ci];
      m["co_leader"] = r.leaders.co[ci];
    }
    methods.push_back(m);
  }
  j["methods"] = methods;
  return j.dump(2) + "\n";
}

void write_dataset(const SynthDataset& ds, const std::string& out_dir) {
  fs::create_directories(out_dir + "/map");
  fs::create_directories(out_dir + "/queries");
  fs::create_directories(out_dir + "/masks");
  fs::create_directories(out_dir + "/proposals");
  for (std::size_t i = 0; i < ds.map_images.size(); ++i)
    save_png(ds.map_images[i], out_dir + "/map/" + ds.map_names[i] + ".png");

  std::string gt_text, scene_text;
  for (std::size_t q = 0; q < ds.queries.size(); ++q) {
    const std::string& name = ds.query_names[q];
    save_png(ds.queries[q], out_dir + "/queries/" + name + ".png");
    save_png(ds.masks[q], out_dir + "/masks/" + name + ".png");
    std::string props;
    for (const Proposal& p : ds.proposals[q]) {
      char line[128];
      std::snprintf(line, sizeof line, "%s %d %d %d %d %.2f", name.c_str(), p.rect.x, p.rect.y,
                    p.rect.w, p.rect.h, p.score);
      props += line;
      if (!p.label.empty()) props += " " + p.label;
      props += "\n";
    }
    write_text(out_dir + "/proposals/" + name + ".txt", props);
    for (const Rect& box : ds.gt[q].change_boxes) {
      char line[128];
      std::snprintf(line, sizeof line, "%s %d %d %d %d\n", name.c_str(), box.x, box.y, box.w,
                    box.h);
      gt_text += line;
    }
    scene_text += name + " " + ds.map_names[ds.query_scene[q]] + "\n";
  }
  write_text(out_dir + "/gt.txt", gt_text);
  write_text(out_dir + "/scenes.txt", scene_text);
}

}  // namespace csight
