#include "csight/roi.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "csight/io.hpp"

namespace csight {

namespace {

// 4x4 grid boundary, exact partition arithmetic for any frame size.
int grid_line(int dim, int i) { return static_cast<int>((static_cast<long long>(dim) * i) / 4); }

Rect grid_rect(int w, int h, int c0, int r0, int c1, int r1) {
  Rect r;
  r.x = grid_line(w, c0);
  r.y = grid_line(h, r0);
  r.w = grid_line(w, c1) - r.x;
  r.h = grid_line(h, r1) - r.y;
  return r;
}

void append_set(const std::string& name, int w, int h, std::vector<ROI>& out) {
  auto add = [&](const Rect& r) { out.push_back({r, RoiSource::Template, name, 0}); };
  if (name == "J") {
    add({0, 0, w, h});
  } else if (name == "B") {
    add(grid_rect(w, h, 0, 0, 2, 2));
    add(grid_rect(w, h, 2, 0, 4, 2));
    add(grid_rect(w, h, 0, 2, 2, 4));
    add(grid_rect(w, h, 2, 2, 4, 4));
  } else if (name == "H") {
    add(grid_rect(w, h, 0, 0, 2, 4));
    add(grid_rect(w, h, 2, 0, 4, 4));
  } else if (name == "V") {
    add(grid_rect(w, h, 0, 0, 4, 2));
    add(grid_rect(w, h, 0, 2, 4, 4));
  } else if (name == "C") {
    add(grid_rect(w, h, 1, 1, 3, 3));
  } else {
    throw std::invalid_argument("unknown template set: " + name);
  }
}

}  // namespace

std::vector<ROI> template_rois(int image_w, int image_h,
                               const std::vector<std::string>& set_names) {
  if (image_w < 4 || image_h < 4) throw std::invalid_argument("image too small for templates");
  std::vector<ROI> rois;
  for (const auto& name : set_names) append_set(name, image_w, image_h, rois);
  for (std::size_t i = 0; i < rois.size(); ++i) rois[i].roi_id = static_cast<int>(i);
  return rois;
}

std::vector<ROI> load_proposals(const std::string& path, const std::string& image_id,
                                int image_w, int image_h) {
  std::vector<std::uint8_t> bytes = io::read_file(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::vector<ROI> rois;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string id, label;
    long x, y, w, h;
    double score;
    if (!(ls >> id >> x >> y >> w >> h >> score))
      throw std::runtime_error("malformed proposal line " + std::to_string(line_no) + " in " + path);
    bool has_label = static_cast<bool>(ls >> label);
    if (w <= 0 || h <= 0)
      throw std::runtime_error("malformed proposal (non-positive extent) line " +
                               std::to_string(line_no) + " in " + path);
    if (id != image_id) continue;
    long x0 = std::max(x, 0L);
    long y0 = std::max(y, 0L);
    long x1 = std::min(x + w, static_cast<long>(image_w));
    long y1 = std::min(y + h, static_cast<long>(image_h));
    if (x1 <= x0 || y1 <= y0) continue;  // entirely outside the frame
    ROI roi;
    roi.rect = {static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1 - x0),
                static_cast<int>(y1 - y0)};
    roi.source = has_label ? RoiSource::Yolo : RoiSource::Bing;
    roi.roi_id = static_cast<int>(rois.size());
    rois.push_back(roi);
  }
  return rois;
}

BoWImage crop_bow(const BoWImage& b, const ROI& r) {
  BoWImage out;
  out.image_id = b.image_id;
  for (const auto& e : b.entries)
    if (r.rect.contains(e.kp.x, e.kp.y)) out.entries.push_back(e);
  return out;
}

}  // namespace csight
