#include "csight/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "csight/io.hpp"

namespace csight {

std::vector<GroundTruth> load_ground_truth(const std::string& path) {
  std::vector<std::uint8_t> bytes = io::read_file(path);
  std::string text(bytes.begin(), bytes.end());
  std::istringstream in(text);
  std::vector<GroundTruth> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string id;
    Rect r;
    if (!(ls >> id >> r.x >> r.y >> r.w >> r.h) || r.w <= 0 || r.h <= 0)
      throw std::runtime_error("malformed ground truth line " + std::to_string(line_no) + " in " +
                               path);
    auto it = std::find_if(out.begin(), out.end(),
                           [&id](const GroundTruth& g) { return g.query_id == id; });
    if (it == out.end()) {
      out.push_back({id, {r}});
    } else {
      it->change_boxes.push_back(r);
    }
  }
  return out;
}

CellGrid pool_cells(const LocMap& loc, int cell_size) {
  CellGrid grid = cells_of(loc.width, loc.height, cell_size);
  for (int cy = 0; cy < grid.rows; ++cy)
    for (int cx = 0; cx < grid.cols; ++cx) {
      Rect r = grid.cell_rect(cx, cy);
      float best = loc.at(r.x, r.y);
      for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x) best = std::max(best, loc.at(x, y));
      grid.at(cx, cy) = best;
    }
  return grid;
}

LocMap apply_mask(const LocMap& loc, const Image& mask) {
  if (mask.width != loc.width || mask.height != loc.height)
    throw std::invalid_argument("mask dimensions mismatch");
  LocMap out = loc;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (mask.pixels[i] > 0) out.values[i] = 0.0f;
  return out;
}

CellGrid apply_mask(const CellGrid& grid, const Image& mask) {
  if (mask.width != grid.image_width || mask.height != grid.image_height)
    throw std::invalid_argument("mask dimensions mismatch");
  CellGrid out = grid;
  for (int cy = 0; cy < grid.rows; ++cy)
    for (int cx = 0; cx < grid.cols; ++cx) {
      Rect r = grid.cell_rect(cx, cy);
      for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x)
          if (mask.at(x, y) > 0) {
            out.at(cx, cy) = 0.0f;
            y = r.y + r.h;
            break;
          }
    }
  return out;
}

namespace {

// Cell indices in rank order: descending score, ties by ascending index.
std::vector<int> rank_order(const CellGrid& grid) {
  std::vector<int> order(grid.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&grid](int a, int b) {
    if (grid.values[a] != grid.values[b]) return grid.values[a] > grid.values[b];
    return a < b;
  });
  return order;
}

}  // namespace

CellGrid fuse_channels(const std::vector<CellGrid>& grids) {
  if (grids.empty()) throw std::invalid_argument("no channels to fuse");
  const CellGrid& first = grids.front();
  for (const CellGrid& g : grids)
    if (g.cols != first.cols || g.rows != first.rows || g.cell_size != first.cell_size ||
        g.image_width != first.image_width || g.image_height != first.image_height)
      throw std::invalid_argument("channel grid shapes differ");
  std::vector<double> fused(first.values.size(), 0.0);
  for (const CellGrid& g : grids) {
    std::vector<int> order = rank_order(g);
    for (std::size_t pos = 0; pos < order.size(); ++pos)
      fused[order[pos]] += 1.0 / static_cast<double>(pos + 1);
  }
  CellGrid out = first;
  for (std::size_t i = 0; i < fused.size(); ++i) out.values[i] = static_cast<float>(fused[i]);
  return out;
}

std::vector<int> top_cells(const CellGrid& grid, double x_percent) {
  if (!(x_percent > 0.0) || x_percent > 100.0)
    throw std::invalid_argument("X must lie in (0, 100]");
  std::vector<int> order = rank_order(grid);
  std::size_t n = static_cast<std::size_t>(
      std::floor(x_percent * static_cast<double>(order.size()) / 100.0 + 1e-9));
  n = std::clamp<std::size_t>(n, 1, order.size());
  order.resize(n);
  return order;
}

bool object_detected(const CellGrid& grid, const std::vector<int>& selected, const Rect& box,
                     const DetectionParams& params) {
  if (box.area() <= 0) return false;
  long long inter = 0, cells_area = 0;
  for (int idx : selected) {
    Rect cell = grid.cell_rect(idx % grid.cols, idx / grid.cols);
    inter += intersect_area(cell, box);
    cells_area += cell.area();
  }
  double denom = params.strict_iou
                     ? static_cast<double>(cells_area + box.area() - inter)
                     : static_cast<double>(box.area());
  return static_cast<double>(inter) / denom >= params.coverage_min;
}

double top_x_accuracy(const std::vector<CellGrid>& grids, const std::vector<GroundTruth>& gts,
                      double x_percent, const DetectionParams& params) {
  if (grids.size() != gts.size())
    throw std::invalid_argument("one grid per ground-truth query required");
  long long total = 0, detected = 0;
  for (std::size_t q = 0; q < grids.size(); ++q) {
    if (gts[q].change_boxes.empty()) continue;
    std::vector<int> selected = top_cells(grids[q], x_percent);
    for (const Rect& box : gts[q].change_boxes) {
      ++total;
      if (object_detected(grids[q], selected, box, params)) ++detected;
    }
  }
  if (total == 0) throw std::runtime_error("no ground truth objects");
  return 100.0 * static_cast<double>(detected) / static_cast<double>(total);
}

int detection_grade(const CellGrid& grid, const GroundTruth& gt,
                    const std::vector<double>& buckets, const DetectionParams& params) {
  for (std::size_t b = 0; b < buckets.size(); ++b) {
    std::vector<int> selected = top_cells(grid, buckets[b]);
    bool all = true;
    for (const Rect& box : gt.change_boxes)
      if (!object_detected(grid, selected, box, params)) {
        all = false;
        break;
      }
    if (all) return static_cast<int>(b);
  }
  return static_cast<int>(buckets.size());
}

LeaderStats leader_stats(const std::vector<std::vector<int>>& grades) {
  if (grades.empty()) throw std::invalid_argument("at least one query required");
  std::size_t m = grades.front().size();
  if (m < 2) throw std::invalid_argument("at least two methods required");
  LeaderStats stats;
  stats.solo.assign(m, 0.0);
  stats.co.assign(m, 0.0);
  for (const auto& row : grades) {
    if (row.size() != m) throw std::invalid_argument("ragged grade table");
    int best = *std::min_element(row.begin(), row.end());
    std::size_t holders = static_cast<std::size_t>(std::count(row.begin(), row.end(), best));
    for (std::size_t i = 0; i < m; ++i) {
      if (row[i] != best) continue;
      if (holders == 1)
        stats.solo[i] += 1.0;
      else
        stats.co[i] += 1.0;
    }
  }
  for (double& v : stats.solo) v /= static_cast<double>(grades.size());
  for (double& v : stats.co) v /= static_cast<double>(grades.size());
  return stats;
}

}  // namespace csight
