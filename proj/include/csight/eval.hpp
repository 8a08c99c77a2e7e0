#pragma once

#include <string>
#include <vector>

#include "csight/image.hpp"

namespace csight {

struct GroundTruth {
  std::string query_id;
  std::vector<Rect> change_boxes;
};

// Parses UTF-8 lines "query_id x y w h", one change box per line, grouped by
// query id in first-appearance order. Blank lines are ignored.
std::vector<GroundTruth> load_ground_truth(const std::string& path);

// Per-cell max pooling of the pixel scores. Border cells may be partial.
CellGrid pool_cells(const LocMap& loc, int cell_size = 10);

// Mask pixel > 0 marks a non-interesting position; masked positions are
// reset to 0. Dimensions must match.
LocMap apply_mask(const LocMap& loc, const Image& mask);
// Cell variant: a cell is reset when any of its pixels is masked, so pooling
// and masking commute for cell-aligned masks.
CellGrid apply_mask(const CellGrid& grid, const Image& mask);

// Reciprocal-rank fusion across channels: per channel, cells are ranked
// descending by score (rank 1 = most changed, ties by cell index) and the
// fused cell score is the sum of 1/rank over channels.
CellGrid fuse_channels(const std::vector<CellGrid>& grids);

struct DetectionParams {
  double coverage_min = 0.5;
  // Score |selected cells ∩ box| / |selected cells ∪ box| instead of the
  // default box-coverage ratio |selected cells ∩ box| / |box|.
  bool strict_iou = false;
};

// Indices of the top X-percent cells by score, ties by cell index; never
// fewer than one cell. X must lie in (0, 100].
std::vector<int> top_cells(const CellGrid& grid, double x_percent);

bool object_detected(const CellGrid& grid, const std::vector<int>& selected, const Rect& box,
                     const DetectionParams& params = {});

// Percentage in [0,100] of ground-truth objects detected by the top-X% cells
// of their query's grid; grids[i] pairs with gts[i].
double top_x_accuracy(const std::vector<CellGrid>& grids, const std::vector<GroundTruth>& gts,
                      double x_percent, const DetectionParams& params = {});

inline constexpr double kGradeBuckets[4] = {5.0, 10.0, 15.0, 20.0};

// Five-grade evaluation: index of the smallest bucket whose top-X% cells
// detect every object of the query, or buckets.size() when none does
// (the "otherwise" grade). A query without objects grades 0.
int detection_grade(const CellGrid& grid, const GroundTruth& gt,
                    const std::vector<double>& buckets, const DetectionParams& params = {});

struct LeaderStats {
  std::vector<double> solo;  // per method: fraction of queries led alone
  std::vector<double> co;    // per method: fraction of queries tied for the lead
};

// grades[q][m] = grade of method m on query q, lower is better. A method is
// the solo leader of a query when its grade is strictly best; methods sharing
// a non-unique best grade are co-leaders.
LeaderStats leader_stats(const std::vector<std::vector<int>>& grades);

}  // namespace csight
