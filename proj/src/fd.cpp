#include "csight/fd.hpp"

#include <algorithm>
#include <stdexcept>

namespace csight {

double obb_inconsistency(const RankedList& strong, const RankedList& weak_j, int top_y) {
  if (top_y < 1) throw std::invalid_argument("Y must be >= 1");
  if (strong.empty()) throw std::invalid_argument("strong list must not be empty");
  std::size_t y = std::min<std::size_t>(static_cast<std::size_t>(top_y), strong.size());
  int best = static_cast<int>(weak_j.size()) + 1;
  for (std::size_t i = 0; i < y; ++i)
    best = std::min(best, weak_j.rank_or_missing(strong.items()[i].id));
  return static_cast<double>(best);
}

LocMap fuse_pixel_ranks(const std::vector<ROI>& rois, const std::vector<double>& ranks,
                        int width, int height) {
  if (rois.size() != ranks.size())
    throw std::invalid_argument("rois and ranks must have the same length");
  for (double r : ranks)
    if (r < 1.0) throw std::invalid_argument("ranks must be >= 1");
  LocMap loc(width, height);
  std::vector<double> inv_sum(loc.values.size(), 0.0);
  std::vector<int> cover(loc.values.size(), 0);
  for (std::size_t j = 0; j < rois.size(); ++j) {
    const Rect& r = rois[j].rect;
    int x0 = std::max(r.x, 0), y0 = std::max(r.y, 0);
    int x1 = std::min(r.x + r.w, width), y1 = std::min(r.y + r.h, height);
    double inv = 1.0 / ranks[j];
    for (int y = y0; y < y1; ++y) {
      std::size_t row = static_cast<std::size_t>(y) * width;
      for (int x = x0; x < x1; ++x) {
        inv_sum[row + x] += inv;
        ++cover[row + x];
      }
    }
  }
  for (std::size_t i = 0; i < loc.values.size(); ++i)
    if (cover[i] > 0) loc.values[i] = static_cast<float>(cover[i] / inv_sum[i]);
  return loc;
}

FDOutput fd_loc_map(const InvertedIndex& idx, const BoWImage& query_bow,
                    const std::vector<ROI>& rois, int width, int height,
                    const FDParams& params) {
  if (rois.empty()) throw std::invalid_argument("at least one ROI required");
  if (params.top_y < 1) throw std::invalid_argument("Y must be >= 1");

  std::vector<RankedList> lists;
  std::vector<std::size_t> live;  // ROI indices with a non-empty crop
  lists.reserve(rois.size());
  for (std::size_t i = 0; i < rois.size(); ++i) {
    BoWImage crop = crop_bow(query_bow, rois[i]);
    if (crop.entries.empty()) continue;
    lists.push_back(idx.weak_query(crop, params.query));
    live.push_back(i);
  }
  if (lists.empty()) throw std::runtime_error("unlocalizable: no features in any ROI");

  FDOutput out;
  out.strong = strong_query(lists);
  out.obb_ranks.assign(rois.size(), 0.0);
  std::vector<ROI> live_rois;
  std::vector<double> live_ranks;
  live_rois.reserve(live.size());
  for (std::size_t k = 0; k < live.size(); ++k) {
    double r = obb_inconsistency(out.strong, lists[k], params.top_y);
    out.obb_ranks[live[k]] = r;
    live_rois.push_back(rois[live[k]]);
    live_ranks.push_back(r);
  }
  out.loc = fuse_pixel_ranks(live_rois, live_ranks, width, height);
  return out;
}

}  // namespace csight
