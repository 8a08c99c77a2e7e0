#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace csight {

// 8-bit grayscale raster, row-major, origin at the top-left pixel.
// Immutable by convention once constructed; cheap to share across workers.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0);

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool contains(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  bool operator==(const Image&) const = default;
};

// Axis-aligned rectangle in pixel units, half-open: covers [x, x+w) x [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
  bool inside(int image_w, int image_h) const {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= image_w && y + h <= image_h;
  }
  bool operator==(const Rect&) const = default;
};

long long intersect_area(const Rect& a, const Rect& b);

// Per-cell score grid imposed on an image; border cells may cover fewer pixels.
struct CellGrid {
  int cell_size = 10;
  int cols = 0;
  int rows = 0;
  int image_width = 0;
  int image_height = 0;
  std::vector<float> values;  // row-major, cols * rows

  float at(int cx, int cy) const { return values[static_cast<std::size_t>(cy) * cols + cx]; }
  float& at(int cx, int cy) { return values[static_cast<std::size_t>(cy) * cols + cx]; }
  int cell_count() const { return cols * rows; }
  // The pixel region of a cell, clipped at the image border.
  Rect cell_rect(int cx, int cy) const;
  int cell_index_of_pixel(int px, int py) const {
    return (py / cell_size) * cols + (px / cell_size);
  }
};

CellGrid cells_of(int image_width, int image_height, int cell_size = 10);

// Per-pixel likelihood-of-change raster; higher means more likely changed.
// Values are finite and non-negative.
struct LocMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // row-major

  LocMap() = default;
  LocMap(int w, int h, float fill = 0.0f);

  float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

void save_loc_map(const LocMap& map, const std::string& path);
LocMap load_loc_map(const std::string& path);
// 8-bit inspection rendering, min..max affinely stretched to 0..255.
// A constant map renders black.
void save_loc_preview(const LocMap& map, const std::string& path);

// Loads a PGM (binary P5) or PNG file as grayscale. Color input is converted
// by the unweighted channel mean.
Image load_image(const std::string& path);

void save_pgm(const Image& img, const std::string& path);
void save_png(const Image& img, const std::string& path);

Image resize_bilinear(const Image& img, int new_w, int new_h);
LocMap resize_bilinear(const LocMap& map, int new_w, int new_h);

}  // namespace csight
