// Acceptance harness: five pass/fail gates covering oracle equivalence,
// algebraic invariants, end-to-end detection quality on a seeded synthetic
// dataset, the shape of the published accuracy table, and the no-extra-
// storage property of likelihood-only detection. Prints one verdict line per
// gate and exits with the number of failed gates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "csight/anomaly.hpp"
#include "csight/eval.hpp"
#include "csight/fd.hpp"
#include "csight/features.hpp"
#include "csight/image.hpp"
#include "csight/index.hpp"
#include "csight/io.hpp"
#include "csight/pairwise.hpp"
#include "csight/pipeline.hpp"
#include "csight/ranked_list.hpp"
#include "csight/roi.hpp"
#include "csight/synth.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace csight;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool fail(const char* what) {
  std::fprintf(stderr, "  failed sub-check: %s\n", what);
  return false;
}

ROI full_frame(int w, int h) { return ROI{Rect{0, 0, w, h}, RoiSource::Template, "J", 0}; }

ROI roi_at(Rect r, int id) { return ROI{r, RoiSource::Template, "J", id}; }

// ------------------------------------------------------------------- gate 1

bool tfidf_oracle_agrees(std::mt19937& rng) {
  const int n_images = 2 + static_cast<int>(rng() % 49);  // up to 50 documents
  const int vocab = 200;
  InvertedIndex idx;
  std::vector<oracle::TfidfDoc> docs;
  for (int i = 0; i < n_images; ++i) {
    BoWImage bow;
    bow.image_id = static_cast<std::uint32_t>(i);
    int n_entries = 5 + static_cast<int>(rng() % 36);
    oracle::TfidfDoc doc;
    doc.image_id = static_cast<std::uint32_t>(i);
    doc.n_entries = static_cast<std::uint32_t>(n_entries);
    for (int e = 0; e < n_entries; ++e) {
      BoWEntry entry;
      entry.word = rng() % vocab;
      entry.kp = {static_cast<int>(rng() % 96), static_cast<int>(rng() % 96), 1.0f};
      bow.entries.push_back(entry);
      ++doc.counts[entry.word];
    }
    idx.add(bow.image_id, {full_frame(96, 96)}, bow);
    docs.push_back(std::move(doc));
  }
  idx.freeze();

  BoWImage query;
  int n_query = 3 + static_cast<int>(rng() % 28);
  std::map<std::uint32_t, std::uint32_t> counts;
  for (int e = 0; e < n_query; ++e) {
    BoWEntry entry;
    entry.word = rng() % vocab;
    entry.kp = {static_cast<int>(rng() % 96), static_cast<int>(rng() % 96), 1.0f};
    query.entries.push_back(entry);
    ++counts[entry.word];
  }

  QueryParams params;
  params.stages = {true, false, false, false};
  RankedList got = idx.weak_query(query, params);
  auto want = oracle::tfidf_ranking(docs, counts, static_cast<double>(n_query));
  return oracle::same_ranking(got.items(), want, 1e-9);
}

bool gate1_oracle_equivalence() {
  Clock::time_point t0 = Clock::now();
  std::mt19937 rng(101);

  for (int t = 0; t < 30; ++t)
    if (!tfidf_oracle_agrees(rng)) return fail("tf-idf ranking vs dense cosine oracle");

  for (int t = 0; t < 20; ++t) {
    int w = 24 + static_cast<int>(rng() % 40);
    int h = 24 + static_cast<int>(rng() % 40);
    std::vector<ROI> rois;
    std::vector<double> ranks;
    int n = 1 + static_cast<int>(rng() % 6);
    for (int j = 0; j < n; ++j) {
      Rect r{static_cast<int>(rng() % (w + 10)) - 5, static_cast<int>(rng() % (h + 10)) - 5,
             1 + static_cast<int>(rng() % w), 1 + static_cast<int>(rng() % h)};
      rois.push_back(roi_at(r, j));
      ranks.push_back(1.0 + static_cast<double>(rng() % 50));
    }
    LocMap got = fuse_pixel_ranks(rois, ranks, w, h);
    LocMap want = oracle::harmonic_fusion(rois, ranks, w, h);
    if (got.values != want.values) return fail("pixel rank fusion vs double-loop oracle");
  }

  for (int t = 0; t < 50; ++t) {
    std::vector<RankedList> lists;
    int n = 1 + static_cast<int>(rng() % 5);
    for (int l = 0; l < n; ++l) {
      int m = static_cast<int>(rng() % 12);
      std::map<std::uint32_t, double> byid;
      for (int i = 0; i < m; ++i) byid[rng() % 30] = static_cast<double>(rng() % 100) / 7.0;
      std::vector<ScoredImage> items;
      for (const auto& [id, s] : byid) items.push_back({id, s});
      lists.push_back(RankedList::from_scores(items));
    }
    RankedList got = strong_query(lists);
    auto want = oracle::strong_fusion(lists);
    if (!oracle::same_ranking(got.items(), want, 1e-9))
      return fail("strong fusion vs exhaustive reciprocal-rank summation");
  }

  for (int t = 0; t < 10; ++t) {
    int w = 15 + static_cast<int>(rng() % 60);
    int h = 15 + static_cast<int>(rng() % 60);
    LocMap loc(w, h);
    for (auto& v : loc.values) v = static_cast<float>(rng() % 1000) / 16.0f;
    CellGrid got = pool_cells(loc, 10);
    CellGrid want = oracle::pool_max(loc, 10);
    if (got.values != want.values) return fail("cell max pooling vs double-loop oracle");
  }

  for (int t = 0; t < 5; ++t) {
    std::vector<GradDescriptor> queries(8), refs(25);
    for (auto& d : queries)
      for (auto& v : d.values) v = static_cast<float>(rng() % 1000) / 999.0f;
    for (auto& d : refs)
      for (auto& v : d.values) v = static_cast<float>(rng() % 1000) / 999.0f;
    std::vector<double> got = nn_distances(queries, refs);
    for (std::size_t i = 0; i < queries.size(); ++i)
      if (std::fabs(got[i] - oracle::nn_distance(queries[i], refs)) > 1e-9)
        return fail("nearest-neighbor distances vs exhaustive search");
  }

  double secs = seconds_since(t0);
  std::printf("  oracle suite finished in %.1f s (budget 60 s)\n", secs);
  return secs < 60.0;
}

// ------------------------------------------------------------------- gate 2

std::vector<int> cell_rank_order(const CellGrid& g) {
  std::vector<int> order(g.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return g.values[a] > g.values[b]; });
  return order;
}

bool gate2_invariants() {
  std::mt19937 rng(202);

  // Cropping a BoW image equals filtering its entries by the region.
  Vocabulary voc(64);
  for (int t = 0; t < 100; ++t) {
    Image img = testutil::textured_image(3000 + static_cast<std::uint32_t>(t));
    BoWImage bow = extract_bow(img, voc, true, 150, static_cast<std::uint32_t>(t));
    Rect r{static_cast<int>(rng() % 120) - 12, static_cast<int>(rng() % 120) - 12,
           1 + static_cast<int>(rng() % 110), 1 + static_cast<int>(rng() % 110)};
    BoWImage crop = crop_bow(bow, roi_at(r, 1));
    std::vector<BoWEntry> filtered;
    for (const BoWEntry& e : bow.entries)
      if (e.kp.x >= r.x && e.kp.x < r.x + r.w && e.kp.y >= r.y && e.kp.y < r.y + r.h)
        filtered.push_back(e);
    if (crop.entries.size() != filtered.size()) return fail("crop-filter size mismatch");
    for (std::size_t i = 0; i < filtered.size(); ++i) {
      const BoWEntry& a = crop.entries[i];
      const BoWEntry& b = filtered[i];
      if (a.word != b.word || !(a.kp == b.kp) || !(a.desc == b.desc))
        return fail("crop-filter entry mismatch");
    }
  }

  // Harmonic rank fusion: bounded by the covering ranks, exact on agreement,
  // and monotone when one region's rank worsens.
  for (int t = 0; t < 25; ++t) {
    int w = 20 + static_cast<int>(rng() % 40), h = 20 + static_cast<int>(rng() % 40);
    std::vector<ROI> rois;
    std::vector<double> ranks;
    int n = 2 + static_cast<int>(rng() % 5);
    for (int j = 0; j < n; ++j) {
      rois.push_back(roi_at({static_cast<int>(rng() % w), static_cast<int>(rng() % h),
                             1 + static_cast<int>(rng() % w), 1 + static_cast<int>(rng() % h)},
                            j));
      ranks.push_back(1.0 + static_cast<double>(rng() % 40));
    }
    LocMap fused = fuse_pixel_ranks(rois, ranks, w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double lo = 0.0, hi = 0.0;
        bool any = false;
        for (int j = 0; j < n; ++j) {
          const Rect& r = rois[static_cast<std::size_t>(j)].rect;
          if (x < r.x || x >= r.x + r.w || y < r.y || y >= r.y + r.h) continue;
          lo = any ? std::min(lo, ranks[static_cast<std::size_t>(j)]) : ranks[static_cast<std::size_t>(j)];
          hi = any ? std::max(hi, ranks[static_cast<std::size_t>(j)]) : ranks[static_cast<std::size_t>(j)];
          any = true;
        }
        float v = fused.at(x, y);
        if (!any && v != 0.0f) return fail("uncovered pixel not silent");
        if (any && (v < lo - 1e-4 || v > hi + 1e-4))
          return fail("harmonic fusion outside covering-rank bounds");
      }
    }
    std::vector<double> same(ranks.size(), 7.0);
    LocMap agree = fuse_pixel_ranks(rois, same, w, h);
    for (float v : agree.values)
      if (v != 0.0f && std::fabs(v - 7.0) > 1e-4) return fail("harmonic fusion not exact on ties");

    std::vector<double> worse = ranks;
    std::size_t bump = rng() % worse.size();
    worse[bump] += 5.0;
    LocMap after = fuse_pixel_ranks(rois, worse, w, h);
    for (std::size_t i = 0; i < after.values.size(); ++i)
      if (after.values[i] + 1e-6 < fused.values[i])
        return fail("worsening one rank lowered a pixel");
  }

  // Strong fusion is invariant to the order of its input lists, bitwise.
  {
    std::vector<RankedList> lists;
    for (int l = 0; l < 4; ++l) {
      std::vector<ScoredImage> items;
      std::map<std::uint32_t, double> byid;
      for (int i = 0; i < 8; ++i) byid[rng() % 20] = static_cast<double>(rng() % 90) / 11.0;
      for (const auto& [id, s] : byid) items.push_back({id, s});
      lists.push_back(RankedList::from_scores(items));
    }
    RankedList base = strong_query(lists);
    std::vector<int> perm = {0, 1, 2, 3};
    do {
      std::vector<RankedList> shuffled;
      for (int p : perm) shuffled.push_back(lists[static_cast<std::size_t>(p)]);
      RankedList other = strong_query(shuffled);
      if (other.items().size() != base.items().size())
        return fail("permutation changed fusion size");
      for (std::size_t i = 0; i < base.items().size(); ++i)
        if (base.items()[i].id != other.items()[i].id ||
            base.items()[i].score != other.items()[i].score)
          return fail("permutation changed fusion result");
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  // Rank-based channel fusion only sees the order, so any strictly monotone
  // per-channel rescaling leaves the fused grid bit-identical.
  for (int t = 0; t < 10; ++t) {
    std::vector<CellGrid> grids, affine, squared;
    for (int c = 0; c < 3; ++c) {
      CellGrid g = cells_of(60, 40, 10);
      for (auto& v : g.values) v = static_cast<float>(rng() % 400) / 4.0f;
      CellGrid a = g, s = g;
      for (auto& v : a.values) v = 3.0f * v + 7.0f;
      for (auto& v : s.values) v = v * v;
      grids.push_back(g);
      affine.push_back(a);
      squared.push_back(s);
    }
    CellGrid base = fuse_channels(grids);
    if (fuse_channels(affine).values != base.values)
      return fail("affine rescaling changed the fused grid");
    if (fuse_channels(squared).values != base.values)
      return fail("squaring changed the fused grid");
    if (cell_rank_order(fuse_channels(affine)) != cell_rank_order(base))
      return fail("affine rescaling changed the fused ordering");
  }

  // Top-X accuracy never decreases in X.
  {
    std::vector<CellGrid> grids;
    std::vector<GroundTruth> gts;
    for (int q = 0; q < 10; ++q) {
      CellGrid g = cells_of(100, 100, 10);
      for (auto& v : g.values) v = static_cast<float>(rng() % 60);
      grids.push_back(g);
      GroundTruth gt;
      gt.query_id = "q" + std::to_string(q);
      int n = 1 + static_cast<int>(rng() % 3);
      for (int b = 0; b < n; ++b)
        gt.change_boxes.push_back({static_cast<int>(rng() % 60), static_cast<int>(rng() % 60),
                                   10 + static_cast<int>(rng() % 30),
                                   10 + static_cast<int>(rng() % 30)});
      gts.push_back(gt);
    }
    double prev = -1.0;
    for (double x : {5.0, 10.0, 15.0, 20.0, 35.0, 60.0, 100.0}) {
      double acc = top_x_accuracy(grids, gts, x);
      if (acc + 1e-12 < prev) return fail("top-X accuracy decreased in X");
      prev = acc;
    }
  }

  // Anomaly model: projection is idempotent and training images reconstruct
  // to (near) zero error when the basis spans the whole cluster.
  {
    std::vector<Image> imgs;
    for (std::uint32_t s = 61; s <= 65; ++s) imgs.push_back(testutil::textured_image(s));
    PlaceModel model = train_place_model(imgs, 4);
    for (const Image& img : imgs) {
      LocMap re = re_map(model, resize_bilinear(img, kModelResolution, kModelResolution));
      for (float v : re.values)
        if (v > 1e-6f) return fail("training image reconstruction error above 1e-6");
    }
    Eigen::VectorXd v(kModelResolution * kModelResolution);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = static_cast<double>(rng() % 200) - 100.0;
    Eigen::VectorXd once = model.basis * (model.basis.transpose() * v);
    Eigen::VectorXd twice = model.basis * (model.basis.transpose() * once);
    if ((twice - once).cwiseAbs().maxCoeff() > 1e-6)
      return fail("projection not idempotent within 1e-6");
  }

  // Normalization arithmetic, exactly.
  {
    PlaceModel m;
    m.mu = 3.0;
    m.sigma = 2.0;
    m.c = 0.8;
    if (normalize_re(5.0, m) != 1.25) return fail("normalize arithmetic not exact");
  }

  return true;
}

// -------------------------------------------------------------- gates 3 + 4

struct EndToEnd {
  EvalResult result;
  std::string dataset_dir;
  std::string artifacts_dir;
  std::string map_dir;
  double seconds = 0.0;
  bool ok = false;
};

EndToEnd run_end_to_end() {
  EndToEnd e2e;
  Clock::time_point t0 = Clock::now();
  try {
    SynthSpec spec;  // 5 places x 10 views, 30 queries, 1-3 changes each
    SynthDataset ds = synth_dataset(spec, 12);
    std::string root = testutil::scratch_dir("acceptance_e2e");
    e2e.dataset_dir = root + "/dataset";
    e2e.artifacts_dir = root + "/artifacts";
    e2e.map_dir = e2e.dataset_dir + "/map";
    write_dataset(ds, e2e.dataset_dir);
    build_artifacts(e2e.map_dir, e2e.artifacts_dir, Config{});
    e2e.result = evaluate_dataset(e2e.dataset_dir, e2e.artifacts_dir);
    e2e.ok = true;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "  end-to-end run threw: %s\n", ex.what());
  }
  e2e.seconds = seconds_since(t0);
  return e2e;
}

double accuracy_at(const EvalResult& r, const std::string& combo, double x) {
  for (std::size_t m = 0; m < r.combo_names.size(); ++m) {
    if (r.combo_names[m] != combo) continue;
    for (std::size_t i = 0; i < r.xs.size(); ++i)
      if (r.xs[i] == x) return r.accuracy[m][i];
  }
  return -1.0;
}

bool gate3_end_to_end(const EndToEnd& e2e) {
  if (!e2e.ok) return false;
  const EvalResult& r = e2e.result;
  double fd20 = accuracy_at(r, "FD", 20.0);
  double fused20 = accuracy_at(r, "FD+AD+PC", 20.0);
  std::printf("  rank-1 %.1f%%, FD@20 %.1f%%, FD+AD+PC@20 %.1f%%, %zu queries, %.0f s\n",
              r.rank1_accuracy, fd20, fused20, r.query_count, e2e.seconds);
  bool ok = true;
  if (r.query_count != 30) ok = fail("expected 30 evaluated queries");
  if (r.rank1_accuracy < 90.0) ok = fail("rank-1 localization below 90%");
  if (fd20 < 70.0) ok = fail("FD top-20% accuracy below 70%");
  if (fused20 + 1e-9 < fd20) ok = fail("fused accuracy below FD alone at X=20");
  if (e2e.seconds >= 600.0) ok = fail("end-to-end run exceeded 10 minutes");
  return ok;
}

bool gate4_table_shape(const EndToEnd& e2e) {
  if (!e2e.ok) return false;
  const EvalResult& r = e2e.result;
  const std::vector<std::string> combos = {"FD", "AD", "PC", "FD+AD", "FD+PC", "FD+AD+PC"};
  const std::vector<double> xs = {5.0, 10.0, 15.0, 20.0};
  if (r.combo_names != combos) return fail("combo list differs from the published set");
  if (r.xs != xs) return fail("X grid differs from the published set");
  if (r.accuracy.size() != combos.size()) return fail("accuracy table row count");
  int populated = 0;
  for (const auto& row : r.accuracy) {
    if (row.size() != xs.size()) return fail("accuracy table column count");
    double prev = -1.0;
    for (double v : row) {
      if (!(v >= 0.0 && v <= 100.0)) return fail("accuracy entry out of range");
      if (v + 1e-12 < prev) return fail("accuracy not monotone in X");
      prev = v;
      ++populated;
    }
  }
  if (populated != 24) return fail("expected 24 populated entries");
  std::string table = format_table(r);
  for (const std::string& name : combos)
    if (table.find(name) == std::string::npos) return fail("method missing from the table");
  return true;
}

// ------------------------------------------------------------------- gate 5

bool gate5_storage(const EndToEnd& e2e) {
  if (!e2e.ok) return false;

  Artifacts art = load_artifacts(e2e.artifacts_dir);
  Image query = load_image(e2e.dataset_dir + "/queries/query_0000.png");
  std::string proposals = e2e.dataset_dir + "/proposals/query_0000.txt";

  io::reset_read_log();
  detect_query(art, query, "query_0000", ChannelSet::parse("FD"), proposals, nullptr, "");
  for (const std::string& path : io::read_log()) {
    bool raster = path.size() >= 4 && (path.compare(path.size() - 4, 4, ".png") == 0 ||
                                       path.compare(path.size() - 4, 4, ".pgm") == 0);
    if (raster) return fail("likelihood-only detection read a raster file");
    if (path.rfind(e2e.map_dir, 0) == 0) return fail("likelihood-only detection touched the map");
  }

  // Positive control: the instrumentation does see map raster reads when a
  // channel legitimately needs them.
  io::reset_read_log();
  Artifacts fresh = load_artifacts(e2e.artifacts_dir);
  io::reset_read_log();
  detect_query(fresh, query, "query_0000", ChannelSet::parse("FD+PC"), "", nullptr, e2e.map_dir);
  bool saw_map_raster = false;
  for (const std::string& path : io::read_log())
    saw_map_raster = saw_map_raster ||
                     (path.rfind(e2e.map_dir, 0) == 0 && path.size() >= 4 &&
                      path.compare(path.size() - 4, 4, ".png") == 0);
  io::reset_read_log();
  if (!saw_map_raster) return fail("instrumentation missed the paired map read");
  return true;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&failures](int n, bool ok, const char* what) {
    std::printf("%s [%d/5] %s\n", ok ? "PASS" : "FAIL", n, what);
    std::fflush(stdout);
    if (!ok) ++failures;
  };

  report(1, gate1_oracle_equivalence(),
         "retrieval, fusion, pooling, and matching agree with brute-force oracles");
  report(2, gate2_invariants(),
         "cropping, fusion, accuracy, and model invariants hold");

  EndToEnd e2e = run_end_to_end();
  report(3, gate3_end_to_end(e2e),
         "seeded synthetic run localizes and detects above the floors");
  report(4, gate4_table_shape(e2e),
         "evaluation emits the full 6x4 accuracy table, monotone in X");
  report(5, gate5_storage(e2e),
         "likelihood-only detection reads no map imagery");

  if (failures) std::printf("%d of 5 acceptance gates failed\n", failures);
  else std::printf("all 5 acceptance gates passed\n");
  return failures;
}
