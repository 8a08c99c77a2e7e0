#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "csight/features.hpp"
#include "csight/ranked_list.hpp"
#include "csight/roi.hpp"

namespace csight {

// Weak-query pipeline stages; each one is independently switchable so tests
// can pin down a single stage against an oracle.
struct QueryStages {
  bool tfidf = true;   // cosine similarity of TF-IDF vectors
  bool ratio = true;   // descriptor ratio-test pruning of query features
  bool ransac = true;  // similarity-transform verification of top candidates
  bool island = true;  // grouping of temporally adjacent map images
};

struct QueryParams {
  QueryStages stages;
  double ratio_threshold = 0.8;   // best/second-best Hamming
  int ransac_iterations = 200;
  double ransac_inlier_px = 5.0;
  std::uint32_t ransac_seed = 7;
  int top_v = 20;                 // candidates taken into geometric verification
  int island_gap = 3;             // max id difference within an island
};

// Inverted file over map BoW sub-images. One document per (map image, ROI);
// postings keep keypoint positions and descriptors for the ratio-test and
// geometric-verification stages. Construction requires exclusive access;
// after freeze() the index is immutable and queries may run in parallel.
class InvertedIndex {
 public:
  struct Doc {
    std::uint32_t image_id = 0;
    std::uint32_t roi_id = 0;
    std::uint32_t n_entries = 0;
    double norm = 0.0;  // TF-IDF vector length, filled by freeze()
  };
  struct Posting {
    std::uint32_t doc = 0;  // index into docs()
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    Descriptor desc;
  };

  // Registers one document per ROI. The BoW image must carry keypoints in the
  // full-image frame; entries are attributed to every ROI containing them.
  void add(std::uint32_t map_image_id, const std::vector<ROI>& rois, const BoWImage& bow);

  // Orders documents by (image id, roi id), sorts postings, and precomputes
  // document statistics. Must be called once before any query.
  void freeze();
  bool frozen() const { return frozen_; }

  std::size_t doc_count() const { return docs_.size(); }
  std::size_t image_count() const { return images_.size(); }
  std::size_t word_count() const { return postings_.size(); }
  const std::vector<Doc>& docs() const { return docs_; }
  const std::vector<std::vector<Posting>>& postings() const { return postings_; }
  const std::vector<std::uint32_t>& image_ids() const { return images_; }
  std::uint32_t doc_frequency(std::uint32_t word) const;

  // Ranked list over all indexed map images. Per-image score is the best of
  // its ROI documents. Throws "unlocalizable" for an empty query and errors
  // for an empty or unfrozen index.
  RankedList weak_query(const BoWImage& query_crop, const QueryParams& params = {}) const;

  void save(const std::string& path) const;
  static InvertedIndex load(const std::string& path);

 private:
  struct WordDocs {  // per word: aggregated (doc, occurrence count)
    std::vector<std::pair<std::uint32_t, std::uint32_t>> docs;
  };

  std::vector<Doc> docs_;
  std::vector<std::vector<Posting>> postings_;  // per word, sorted by doc
  std::vector<WordDocs> word_docs_;             // derived at freeze()
  std::vector<std::uint32_t> doc_freq_;         // distinct documents per word
  std::vector<std::uint32_t> images_;           // sorted unique map image ids
  std::vector<std::vector<std::uint32_t>> image_docs_;  // docs per image
  std::set<std::uint32_t> added_ids_;
  bool frozen_ = false;

  double idf(std::uint32_t word) const;
};

}  // namespace csight
