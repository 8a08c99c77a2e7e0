#include "csight/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csight {

namespace {

// Orientation octant by cross-product sector tests. The boundary directions
// are closed under 90-degree rotation, so octant(rot90(g)) = octant(g)+2 mod 8
// holds exactly in integer arithmetic, boundaries included.
int octant(int gx, int gy) {
  static constexpr int bx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr int by[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  for (int o = 0; o < 8; ++o) {
    int n = (o + 1) & 7;
    long long lower = static_cast<long long>(bx[o]) * gy - static_cast<long long>(by[o]) * gx;
    long long upper = static_cast<long long>(gx) * by[n] - static_cast<long long>(gy) * bx[n];
    if (lower >= 0 && upper > 0) return o;
  }
  return 0;  // unreachable for nonzero gradients
}

// Offset -8..-1 maps to cells 0..1, +1..+8 to cells 2..3.
int spatial_cell(int d) { return d < 0 ? (d + 8) / 4 : 2 + (d - 1) / 4; }

}  // namespace

std::vector<GradDescriptor> grad_descriptors(const Image& img,
                                             const std::vector<Keypoint>& kps) {
  std::vector<GradDescriptor> out;
  out.reserve(kps.size());
  for (const Keypoint& kp : kps) {
    if (kp.x < 9 || kp.y < 9 || kp.x + 9 >= img.width || kp.y + 9 >= img.height)
      throw std::invalid_argument("descriptor patch out of bounds");
    double acc[GradDescriptor::kDims] = {};
    for (int dy = -8; dy <= 8; ++dy) {
      if (dy == 0) continue;
      for (int dx = -8; dx <= 8; ++dx) {
        if (dx == 0) continue;
        int x = kp.x + dx, y = kp.y + dy;
        int gx = img.at(x + 1, y) - img.at(x - 1, y);
        int gy = img.at(x, y + 1) - img.at(x, y - 1);
        if (gx == 0 && gy == 0) continue;
        int bin = (spatial_cell(dy) * 4 + spatial_cell(dx)) * 8 + octant(gx, gy);
        acc[bin] += std::sqrt(static_cast<double>(gx) * gx + static_cast<double>(gy) * gy);
      }
    }
    double norm2 = 0.0;
    for (double v : acc) norm2 += v * v;
    GradDescriptor d;
    if (norm2 > 0.0) {
      double inv = 1.0 / std::sqrt(norm2);
      for (int i = 0; i < GradDescriptor::kDims; ++i)
        d.values[i] = static_cast<float>(acc[i] * inv);
    }
    out.push_back(d);
  }
  return out;
}

namespace {

double l2(const GradDescriptor& a, const GradDescriptor& b) {
  double s = 0.0;
  for (int i = 0; i < GradDescriptor::kDims; ++i) {
    double d = static_cast<double>(a.values[i]) - b.values[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

std::vector<double> nn_distances(const std::vector<GradDescriptor>& queries,
                                 const std::vector<GradDescriptor>& refs) {
  if (refs.empty()) throw std::runtime_error("no reference features");
  std::vector<double> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    double best = l2(q, refs[0]);
    for (std::size_t j = 1; j < refs.size(); ++j) best = std::min(best, l2(q, refs[j]));
    out.push_back(best);
  }
  return out;
}

LocMap pc_loc_map(const Image& query, const Image& map_img, const PCParams& params) {
  std::vector<Keypoint> qk = detect_keypoints(query, params.max_keypoints, params.detect_threshold);
  std::vector<Keypoint> mk =
      detect_keypoints(map_img, params.max_keypoints, params.detect_threshold);
  if (mk.empty()) throw std::runtime_error("no reference features");

  std::vector<GradDescriptor> qd = grad_descriptors(query, qk);
  std::vector<GradDescriptor> md = grad_descriptors(map_img, mk);
  std::vector<double> dist = nn_distances(qd, md);

  LocMap loc(query.width, query.height);
  const int r = params.splat_radius;
  for (std::size_t i = 0; i < qk.size(); ++i) {
    float v = static_cast<float>(dist[i]);
    for (int dy = -r; dy <= r; ++dy) {
      int y = qk[i].y + dy;
      if (y < 0 || y >= loc.height) continue;
      for (int dx = -r; dx <= r; ++dx) {
        int x = qk[i].x + dx;
        if (x < 0 || x >= loc.width || dx * dx + dy * dy > r * r) continue;
        loc.at(x, y) = std::max(loc.at(x, y), v);
      }
    }
  }
  return loc;
}

}  // namespace csight
