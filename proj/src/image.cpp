#include "csight/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "csight/io.hpp"

namespace csight {

Image::Image(int w, int h, std::uint8_t fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("image dimensions must be positive");
  pixels.assign(static_cast<std::size_t>(w) * h, fill);
}

long long intersect_area(const Rect& a, const Rect& b) {
  int x0 = std::max(a.x, b.x);
  int y0 = std::max(a.y, b.y);
  int x1 = std::min(a.x + a.w, b.x + b.w);
  int y1 = std::min(a.y + a.h, b.y + b.h);
  if (x1 <= x0 || y1 <= y0) return 0;
  return static_cast<long long>(x1 - x0) * (y1 - y0);
}

Rect CellGrid::cell_rect(int cx, int cy) const {
  Rect r;
  r.x = cx * cell_size;
  r.y = cy * cell_size;
  r.w = std::min(cell_size, image_width - r.x);
  r.h = std::min(cell_size, image_height - r.y);
  return r;
}

CellGrid cells_of(int image_width, int image_height, int cell_size) {
  if (cell_size < 1) throw std::invalid_argument("cell_size must be >= 1");
  if (image_width <= 0 || image_height <= 0)
    throw std::invalid_argument("image dimensions must be positive");
  CellGrid g;
  g.cell_size = cell_size;
  g.cols = (image_width + cell_size - 1) / cell_size;
  g.rows = (image_height + cell_size - 1) / cell_size;
  g.image_width = image_width;
  g.image_height = image_height;
  g.values.assign(static_cast<std::size_t>(g.cols) * g.rows, 0.0f);
  return g;
}

namespace {

bool has_suffix(const std::string& s, const char* suffix) {
  std::size_t n = std::strlen(suffix);
  if (s.size() < n) return false;
  std::string tail = s.substr(s.size() - n);
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return tail == suffix;
}

// P5 header parsing: whitespace-separated tokens, '#' comments allowed.
int next_pgm_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (std::isspace(bytes[pos])) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || !std::isdigit(bytes[pos]))
    throw std::runtime_error("unreadable PGM: bad header");
  long v = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    v = v * 10 + (bytes[pos] - '0');
    if (v > 1 << 30) throw std::runtime_error("unreadable PGM: bad header");
    ++pos;
  }
  return static_cast<int>(v);
}

Image load_pgm(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw std::runtime_error("unreadable PGM (not binary P5): " + path);
  std::size_t pos = 2;
  int w = next_pgm_token(bytes, pos);
  int h = next_pgm_token(bytes, pos);
  int maxval = next_pgm_token(bytes, pos);
  if (w <= 0 || h <= 0) throw std::runtime_error("unreadable PGM (zero dimension): " + path);
  if (maxval <= 0 || maxval > 255)
    throw std::runtime_error("unreadable PGM (unsupported maxval): " + path);
  ++pos;  // single whitespace byte after maxval
  std::size_t need = static_cast<std::size_t>(w) * h;
  if (pos + need > bytes.size()) throw std::runtime_error("unreadable PGM (truncated): " + path);
  Image img(w, h);
  std::memcpy(img.pixels.data(), bytes.data() + pos, need);
  return img;
}

Image load_png(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
    throw std::runtime_error("unreadable PNG: " + path);
  // Always decode to RGB and average the channels ourselves; libpng's own
  // grayscale conversion uses luma weights.
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, rgb.data(), 0, nullptr)) {
    png_image_free(&png);
    throw std::runtime_error("unreadable PNG: " + path);
  }
  int w = static_cast<int>(png.width);
  int h = static_cast<int>(png.height);
  if (w <= 0 || h <= 0) throw std::runtime_error("unreadable PNG (zero dimension): " + path);
  Image img(w, h);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    int r = rgb[3 * i], g = rgb[3 * i + 1], b = rgb[3 * i + 2];
    img.pixels[i] = static_cast<std::uint8_t>(std::lround((r + g + b) / 3.0));
  }
  return img;
}

}  // namespace

Image load_image(const std::string& path) {
  std::vector<std::uint8_t> bytes = io::read_file(path);
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G')
    return load_png(path, bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return load_pgm(path, bytes);
  if (has_suffix(path, ".png")) return load_png(path, bytes);
  if (has_suffix(path, ".pgm")) return load_pgm(path, bytes);
  throw std::runtime_error("unreadable image (unsupported format): " + path);
}

void save_pgm(const Image& img, const std::string& path) {
  std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), img.pixels.begin(), img.pixels.end());
  io::write_file(path, bytes);
}

void save_png(const Image& img, const std::string& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, img.pixels.data(), img.width, nullptr))
    throw std::runtime_error("cannot encode PNG: " + path);
  std::vector<std::uint8_t> bytes(size);
  if (!png_image_write_to_memory(&png, bytes.data(), &size, 0, img.pixels.data(), img.width, nullptr))
    throw std::runtime_error("cannot encode PNG: " + path);
  bytes.resize(size);
  io::write_file(path, bytes);
}

LocMap::LocMap(int w, int h, float fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("map dimensions must be positive");
  values.assign(static_cast<std::size_t>(w) * h, fill);
}

void save_loc_map(const LocMap& map, const std::string& path) {
  io::Writer w;
  w.magic("CSLOC1");
  w.u32(static_cast<std::uint32_t>(map.width));
  w.u32(static_cast<std::uint32_t>(map.height));
  for (float v : map.values) w.f32(v);
  w.save(path);
}

LocMap load_loc_map(const std::string& path) {
  io::Reader r = io::Reader::from_file(path);
  r.expect_magic("CSLOC1");
  int w = static_cast<int>(r.u32());
  int h = static_cast<int>(r.u32());
  if (w <= 0 || h <= 0) throw std::runtime_error("unreadable map (zero dimension): " + path);
  LocMap map(w, h);
  for (float& v : map.values) v = r.f32();
  return map;
}

void save_loc_preview(const LocMap& map, const std::string& path) {
  float lo = map.values.empty() ? 0.0f : *std::min_element(map.values.begin(), map.values.end());
  float hi = map.values.empty() ? 0.0f : *std::max_element(map.values.begin(), map.values.end());
  Image img(map.width, map.height);
  float span = hi - lo;
  if (span > 0.0f)
    for (std::size_t i = 0; i < map.values.size(); ++i)
      img.pixels[i] = static_cast<std::uint8_t>(std::lround((map.values[i] - lo) / span * 255.0f));
  save_png(img, path);
}

Image resize_bilinear(const Image& img, int new_w, int new_h) {
  if (new_w <= 0 || new_h <= 0) throw std::invalid_argument("resize target must be positive");
  Image out(new_w, new_h);
  double sx = static_cast<double>(img.width) / new_w;
  double sy = static_cast<double>(img.height) / new_h;
  for (int y = 0; y < new_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int ya = std::clamp(y0, 0, img.height - 1);
    int yb = std::clamp(y0 + 1, 0, img.height - 1);
    for (int x = 0; x < new_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int xa = std::clamp(x0, 0, img.width - 1);
      int xb = std::clamp(x0 + 1, 0, img.width - 1);
      double top = img.at(xa, ya) * (1.0 - wx) + img.at(xb, ya) * wx;
      double bot = img.at(xa, yb) * (1.0 - wx) + img.at(xb, yb) * wx;
      out.at(x, y) = static_cast<std::uint8_t>(std::lround(std::clamp(top * (1.0 - wy) + bot * wy, 0.0, 255.0)));
    }
  }
  return out;
}

LocMap resize_bilinear(const LocMap& map, int new_w, int new_h) {
  if (new_w <= 0 || new_h <= 0) throw std::invalid_argument("resize target must be positive");
  LocMap out(new_w, new_h);
  double sx = static_cast<double>(map.width) / new_w;
  double sy = static_cast<double>(map.height) / new_h;
  for (int y = 0; y < new_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int ya = std::clamp(y0, 0, map.height - 1);
    int yb = std::clamp(y0 + 1, 0, map.height - 1);
    for (int x = 0; x < new_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int xa = std::clamp(x0, 0, map.width - 1);
      int xb = std::clamp(x0 + 1, 0, map.width - 1);
      double top = map.at(xa, ya) * (1.0 - wx) + map.at(xb, ya) * wx;
      double bot = map.at(xa, yb) * (1.0 - wx) + map.at(xb, yb) * wx;
      out.at(x, y) = static_cast<float>(top * (1.0 - wy) + bot * wy);
    }
  }
  return out;
}

}  // namespace csight
