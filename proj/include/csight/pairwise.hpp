#pragma once

#include <vector>

#include "csight/features.hpp"
#include "csight/image.hpp"

namespace csight {

struct PCParams {
  int max_keypoints = 500;
  int detect_threshold = kFastThreshold;
  int splat_radius = 8;
};

// 128-dim gradient-orientation histogram per keypoint: 4x4 spatial cells of 8
// orientation octants over a 16x16 offset patch (offsets -8..-1 and 1..8 per
// axis, a set closed under 90-degree rotation), votes weighted by gradient
// magnitude from central differences, L2-normalized. Flat patches yield the
// all-zero descriptor. Throws when the patch (plus the 1px gradient border)
// leaves the image.
std::vector<GradDescriptor> grad_descriptors(const Image& img, const std::vector<Keypoint>& kps);

// Exact nearest-neighbor L2 distance from each query descriptor to the
// reference set. Throws "no reference features" when refs is empty.
std::vector<double> nn_distances(const std::vector<GradDescriptor>& queries,
                                 const std::vector<GradDescriptor>& refs);

// Pairwise-comparison channel: per query keypoint, the L2 distance to the
// nearest map descriptor, splatted into the map as a filled disk combined by
// max; uncovered pixels stay 0.
LocMap pc_loc_map(const Image& query, const Image& map_img, const PCParams& params = {});

}  // namespace csight
