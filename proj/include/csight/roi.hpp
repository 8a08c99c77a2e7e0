#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csight/features.hpp"
#include "csight/image.hpp"

namespace csight {

enum class RoiSource : std::uint8_t { Template, Yolo, Bing };

// An object bounding box: either a member of a fixed template set or an
// ingested external proposal.
struct ROI {
  Rect rect;
  RoiSource source = RoiSource::Template;
  std::string template_name;  // set name for template ROIs, empty otherwise
  int roi_id = 0;
};

// Fixed template sets over a 4x4 cell grid of the frame:
//   J = full frame, B = 2x2 quadrants, H = left/right halves,
//   V = top/bottom halves, C = centered half-size rectangle.
// The returned list is deterministic; roi_id is dense over the list.
std::vector<ROI> template_rois(int image_w, int image_h,
                               const std::vector<std::string>& set_names);

// Proposal files: UTF-8 lines "image_id x y w h score label", label optional
// (class-agnostic boxes). Boxes overhanging the frame are clamped; boxes
// entirely outside the frame are dropped.
std::vector<ROI> load_proposals(const std::string& path, const std::string& image_id,
                                int image_w, int image_h);

// Keeps the entries whose keypoint lies inside the ROI. Keypoints stay in
// full-image coordinates and word ids are untouched, so cropping a BoW image
// equals re-extracting features restricted to the region.
BoWImage crop_bow(const BoWImage& b, const ROI& r);

}  // namespace csight
