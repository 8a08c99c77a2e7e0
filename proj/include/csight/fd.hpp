#pragma once

#include <vector>

#include "csight/image.hpp"
#include "csight/index.hpp"
#include "csight/ranked_list.hpp"
#include "csight/roi.hpp"

namespace csight {

struct FDParams {
  QueryParams query;
  int top_y = 10;  // strong hypotheses entering the min pooling
};

// Inconsistency rank of one OBB: the minimum over the top-Y strong candidates
// of their rank in this OBB's weak list. Ids absent from the weak list take
// rank (weak length + 1); Y is clamped to the strong list length.
double obb_inconsistency(const RankedList& strong, const RankedList& weak_j, int top_y);

// Per-pixel fusion of OBB ranks: each covered pixel gets the harmonic mean of
// the ranks of all ROIs containing it, |J|*(sum of 1/r_j)^-1; uncovered
// pixels get 0. All ranks must be >= 1.
LocMap fuse_pixel_ranks(const std::vector<ROI>& rois, const std::vector<double>& ranks,
                        int width, int height);

struct FDOutput {
  LocMap loc;
  RankedList strong;
  // Aligned with the input ROI list; 0 marks ROIs whose crop had no features
  // (they are excluded from both the strong fusion and the pixel fusion).
  std::vector<double> obb_ranks;
};

// The full inconsistency channel: weak query per ROI crop, reciprocal-rank
// strong fusion across them, per-OBB min pooling against the strong top-Y,
// then per-pixel harmonic fusion.
FDOutput fd_loc_map(const InvertedIndex& idx, const BoWImage& query_bow,
                    const std::vector<ROI>& rois, int width, int height,
                    const FDParams& params = {});

}  // namespace csight
