#include "csight/index.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <stdexcept>

#include "csight/io.hpp"

namespace csight {

void InvertedIndex::add(std::uint32_t map_image_id, const std::vector<ROI>& rois,
                        const BoWImage& bow) {
  if (frozen_) throw std::logic_error("cannot add to a frozen index");
  if (!added_ids_.insert(map_image_id).second)
    throw std::invalid_argument("map image id already indexed: " + std::to_string(map_image_id));
  for (const ROI& roi : rois) {
    BoWImage crop = crop_bow(bow, roi);
    Doc doc;
    doc.image_id = map_image_id;
    doc.roi_id = static_cast<std::uint32_t>(roi.roi_id);
    doc.n_entries = static_cast<std::uint32_t>(crop.entries.size());
    auto doc_idx = static_cast<std::uint32_t>(docs_.size());
    docs_.push_back(doc);
    for (const auto& e : crop.entries) {
      if (e.word >= postings_.size()) postings_.resize(e.word + 1);
      postings_[e.word].push_back({doc_idx, static_cast<std::uint16_t>(e.kp.x),
                                   static_cast<std::uint16_t>(e.kp.y), e.desc});
    }
  }
}

double InvertedIndex::idf(std::uint32_t word) const {
  std::uint32_t df = word < doc_freq_.size() ? doc_freq_[word] : 0;
  if (df == 0) return 0.0;
  return std::log(static_cast<double>(docs_.size()) / df);
}

std::uint32_t InvertedIndex::doc_frequency(std::uint32_t word) const {
  return word < doc_freq_.size() ? doc_freq_[word] : 0;
}

void InvertedIndex::freeze() {
  if (frozen_) return;

  // Reorder documents by (image id, roi id) and remap posting doc indices.
  std::vector<std::uint32_t> order(docs_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [this](std::uint32_t a, std::uint32_t b) {
    if (docs_[a].image_id != docs_[b].image_id) return docs_[a].image_id < docs_[b].image_id;
    return docs_[a].roi_id < docs_[b].roi_id;
  });
  std::vector<std::uint32_t> new_pos(docs_.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) new_pos[order[i]] = i;
  std::vector<Doc> sorted_docs(docs_.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) sorted_docs[i] = docs_[order[i]];
  docs_ = std::move(sorted_docs);
  for (auto& plist : postings_) {
    for (auto& p : plist) p.doc = new_pos[p.doc];
    std::stable_sort(plist.begin(), plist.end(),
                     [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
  }

  // Word statistics and per-document norms.
  doc_freq_.assign(postings_.size(), 0);
  word_docs_.assign(postings_.size(), {});
  for (std::uint32_t w = 0; w < postings_.size(); ++w) {
    const auto& plist = postings_[w];
    for (std::size_t i = 0; i < plist.size();) {
      std::size_t j = i;
      while (j < plist.size() && plist[j].doc == plist[i].doc) ++j;
      word_docs_[w].docs.push_back({plist[i].doc, static_cast<std::uint32_t>(j - i)});
      i = j;
    }
    doc_freq_[w] = static_cast<std::uint32_t>(word_docs_[w].docs.size());
  }
  std::vector<double> norm2(docs_.size(), 0.0);
  for (std::uint32_t w = 0; w < postings_.size(); ++w) {
    double f = idf(w);
    if (f == 0.0) continue;
    for (const auto& [doc, count] : word_docs_[w].docs) {
      double tf = static_cast<double>(count) / docs_[doc].n_entries;
      norm2[doc] += (tf * f) * (tf * f);
    }
  }
  for (std::uint32_t d = 0; d < docs_.size(); ++d) docs_[d].norm = std::sqrt(norm2[d]);

  images_.assign(added_ids_.begin(), added_ids_.end());
  image_docs_.assign(images_.size(), {});
  for (std::uint32_t d = 0; d < docs_.size(); ++d) {
    auto it = std::lower_bound(images_.begin(), images_.end(), docs_[d].image_id);
    image_docs_[static_cast<std::size_t>(it - images_.begin())].push_back(d);
  }
  frozen_ = true;
}

namespace {

struct Match {  // one accepted query-feature correspondence inside a document
  double qx, qy;
  double mx, my;
};

int ransac_inliers(const std::vector<Match>& matches, int iterations, double inlier_px,
                   std::mt19937& rng) {
  const int m = static_cast<int>(matches.size());
  if (m < 3) return 0;
  int best = 0;
  const double r2 = inlier_px * inlier_px;
  for (int it = 0; it < iterations; ++it) {
    int ia = static_cast<int>(rng() % m);
    int ib = static_cast<int>(rng() % (m - 1));
    if (ib >= ia) ++ib;
    std::complex<double> a1(matches[ia].qx, matches[ia].qy), b1(matches[ia].mx, matches[ia].my);
    std::complex<double> a2(matches[ib].qx, matches[ib].qy), b2(matches[ib].mx, matches[ib].my);
    std::complex<double> da = a2 - a1;
    if (std::norm(da) < 1e-9) continue;
    std::complex<double> s = (b2 - b1) / da;  // scale + rotation
    std::complex<double> t = b1 - s * a1;
    int inl = 0;
    for (const auto& match : matches) {
      std::complex<double> pred = s * std::complex<double>(match.qx, match.qy) + t;
      double dx = pred.real() - match.mx, dy = pred.imag() - match.my;
      if (dx * dx + dy * dy <= r2) ++inl;
    }
    best = std::max(best, inl);
  }
  // A sampled pair always explains itself; demand real consensus.
  return best >= 3 ? best : 0;
}

}  // namespace

RankedList InvertedIndex::weak_query(const BoWImage& query_crop, const QueryParams& params) const {
  if (!frozen_) throw std::logic_error("index not frozen");
  if (docs_.empty()) throw std::runtime_error("empty index");
  if (query_crop.entries.empty()) throw std::runtime_error("unlocalizable: empty query BoW");

  // Stage: ratio test. Keep query features whose best match is clearly better
  // than the best match from any other map image.
  std::vector<const BoWEntry*> accepted;
  accepted.reserve(query_crop.entries.size());
  for (const auto& e : query_crop.entries) {
    if (!params.stages.ratio) {
      accepted.push_back(&e);
      continue;
    }
    if (e.word >= postings_.size() || postings_[e.word].empty()) continue;
    const auto& plist = postings_[e.word];
    int best = Descriptor::kBits + 1;
    std::uint32_t best_image = 0;
    for (const auto& p : plist) {
      int d = hamming(p.desc, e.desc);
      if (d < best) {
        best = d;
        best_image = docs_[p.doc].image_id;
      }
    }
    int second = Descriptor::kBits + 1;
    bool has_second = false;
    for (const auto& p : plist) {
      if (docs_[p.doc].image_id == best_image) continue;
      int d = hamming(p.desc, e.desc);
      if (d < second) {
        second = d;
        has_second = true;
      }
    }
    if (!has_second || best < params.ratio_threshold * second) accepted.push_back(&e);
  }

  // Stage: TF-IDF cosine over documents, accumulated through the postings.
  // An image enters the candidate list only if it shares at least one
  // accepted word with the query; everything else is absent, not scored 0.
  std::vector<double> doc_score(docs_.size(), 0.0);
  std::vector<char> doc_hit(docs_.size(), 0);
  if (!accepted.empty()) {
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const auto* e : accepted) ++counts[e->word];
    double total = static_cast<double>(accepted.size());
    double qnorm2 = 0.0;
    std::vector<double> accum(docs_.size(), 0.0);
    for (const auto& [w, c] : counts) {
      if (w >= word_docs_.size()) continue;
      for (const auto& [doc, dc] : word_docs_[w].docs) doc_hit[doc] = 1;
      if (!params.stages.tfidf) continue;
      double f = idf(w);
      if (f == 0.0) continue;
      double qw = (c / total) * f;
      qnorm2 += qw * qw;
      for (const auto& [doc, dc] : word_docs_[w].docs) {
        double tf = static_cast<double>(dc) / docs_[doc].n_entries;
        accum[doc] += qw * tf * f;
      }
    }
    double qnorm = std::sqrt(qnorm2);
    if (qnorm > 0.0)
      for (std::uint32_t d = 0; d < docs_.size(); ++d)
        if (docs_[d].norm > 0.0) doc_score[d] = accum[d] / (qnorm * docs_[d].norm);
  }

  // Per-image score: the best of its ROI documents. With scoring enabled a
  // candidate must score above zero; idf-0 words match everything and carry
  // no evidence, so images sharing only those drop out here too.
  std::vector<ScoredImage> items;
  items.reserve(images_.size());
  std::vector<std::uint32_t> best_doc(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) {
    double best = -1.0;
    bool hit = false;
    std::uint32_t bd = image_docs_[i].front();
    for (std::uint32_t d : image_docs_[i]) {
      hit = hit || doc_hit[d] != 0;
      if (doc_score[d] > best) {
        best = doc_score[d];
        bd = d;
      }
    }
    if (params.stages.tfidf ? best <= 0.0 : !hit) continue;
    best_doc[i] = bd;
    items.push_back({images_[i], best});
  }
  std::sort(items.begin(), items.end(), [](const ScoredImage& a, const ScoredImage& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });

  // Stage: RANSAC similarity-transform verification of the top candidates,
  // re-scored by inlier count with the TF-IDF score as tiebreak.
  if (params.stages.ransac) {
    int v = std::min<int>(params.top_v, static_cast<int>(items.size()));
    for (int i = 0; i < v; ++i) {
      std::uint32_t image_id = items[i].id;
      std::size_t image_idx =
          std::lower_bound(images_.begin(), images_.end(), image_id) - images_.begin();
      std::uint32_t doc = best_doc[image_idx];
      std::vector<Match> matches;
      for (const auto* e : accepted) {
        if (e->word >= postings_.size()) continue;
        const auto& plist = postings_[e->word];
        auto lo = std::lower_bound(plist.begin(), plist.end(), doc,
                                   [](const Posting& p, std::uint32_t d) { return p.doc < d; });
        const Posting* best_p = nullptr;
        int best_d = Descriptor::kBits + 1;
        for (auto it = lo; it != plist.end() && it->doc == doc; ++it) {
          int d = hamming(it->desc, e->desc);
          if (d < best_d) {
            best_d = d;
            best_p = &*it;
          }
        }
        if (best_p)
          matches.push_back({static_cast<double>(e->kp.x), static_cast<double>(e->kp.y),
                             static_cast<double>(best_p->x), static_cast<double>(best_p->y)});
      }
      std::mt19937 rng(params.ransac_seed ^ (0x9e3779b9u * (image_id + 1)));
      int inliers = ransac_inliers(matches, params.ransac_iterations, params.ransac_inlier_px, rng);
      // Inliers dominate, cosine in [0,1] breaks ties; verified scores stay
      // above the unverified tail because each keeps at least its own cosine.
      items[i].score = 2.0 * inliers + items[i].score;
    }
    std::sort(items.begin(), items.begin() + v, [](const ScoredImage& a, const ScoredImage& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.id < b.id;
    });
  }

  // Stage: island clustering. Map images whose ids differ by at most the gap
  // form an island scored by the sum of member scores; islands are ranked,
  // then members within each island. Output scores are the island scores.
  if (params.stages.island) {
    std::vector<ScoredImage> by_id = items;
    std::sort(by_id.begin(), by_id.end(),
              [](const ScoredImage& a, const ScoredImage& b) { return a.id < b.id; });
    struct Island {
      double score = 0.0;
      std::uint32_t min_id = 0;
      std::vector<ScoredImage> members;
    };
    std::vector<Island> islands;
    for (const auto& item : by_id) {
      if (islands.empty() ||
          item.id - islands.back().members.back().id > static_cast<std::uint32_t>(params.island_gap)) {
        islands.push_back({0.0, item.id, {}});
      }
      islands.back().score += item.score;
      islands.back().members.push_back(item);
    }
    std::sort(islands.begin(), islands.end(), [](const Island& a, const Island& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.min_id < b.min_id;
    });
    items.clear();
    for (auto& island : islands) {
      std::sort(island.members.begin(), island.members.end(),
                [](const ScoredImage& a, const ScoredImage& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.id < b.id;
                });
      for (const auto& member : island.members) items.push_back({member.id, island.score});
    }
  }

  return RankedList(std::move(items));
}

void InvertedIndex::save(const std::string& path) const {
  if (!frozen_) throw std::logic_error("freeze the index before saving");
  io::Writer w;
  w.magic("CSIDX1");
  w.u32(static_cast<std::uint32_t>(docs_.size()));
  for (const auto& doc : docs_) {
    w.u32(doc.image_id);
    w.u32(doc.roi_id);
    w.u32(doc.n_entries);
  }
  w.u32(static_cast<std::uint32_t>(postings_.size()));
  for (const auto& plist : postings_) {
    w.varint(static_cast<std::uint32_t>(plist.size()));
    std::uint32_t prev = 0;
    for (const auto& p : plist) {
      w.varint(p.doc - prev);  // postings are sorted by doc
      prev = p.doc;
      w.u16(p.x);
      w.u16(p.y);
      for (std::uint64_t chunk : p.desc.bits) w.u64(chunk);
    }
  }
  w.save(path);
}

InvertedIndex InvertedIndex::load(const std::string& path) {
  io::Reader r = io::Reader::from_file(path);
  r.expect_magic("CSIDX1");
  InvertedIndex idx;
  std::uint32_t n_docs = r.u32();
  idx.docs_.resize(n_docs);
  for (auto& doc : idx.docs_) {
    doc.image_id = r.u32();
    doc.roi_id = r.u32();
    doc.n_entries = r.u32();
    idx.added_ids_.insert(doc.image_id);
  }
  std::uint32_t n_words = r.u32();
  idx.postings_.resize(n_words);
  for (auto& plist : idx.postings_) {
    std::uint32_t count = r.varint();
    plist.resize(count);
    std::uint32_t prev = 0;
    for (auto& p : plist) {
      prev += r.varint();
      p.doc = prev;
      if (p.doc >= n_docs) throw std::runtime_error("unreadable index: bad posting");
      p.x = r.u16();
      p.y = r.u16();
      for (auto& chunk : p.desc.bits) chunk = r.u64();
    }
  }
  idx.freeze();
  return idx;
}

}  // namespace csight
