#include "csight/features.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <stdexcept>

#include "csight/io.hpp"

namespace csight {

int hamming(const Descriptor& a, const Descriptor& b) {
  int d = 0;
  for (int i = 0; i < 4; ++i) d += std::popcount(a.bits[i] ^ b.bits[i]);
  return d;
}

namespace {

// 16-pixel circle of radius 3, clockwise from the top.
constexpr int kCircle[16][2] = {{0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0},  {3, 1},
                                {2, 2},  {1, 3},  {0, 3},  {-1, 3}, {-2, 2}, {-3, 1},
                                {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}};
constexpr int kArc = 9;

// Corner test: some arc of >= 9 contiguous circle pixels all brighter than
// center + t or all darker than center - t. Response is the total absolute
// center difference over the circle, zero for non-corners.
float fast_response(const Image& img, int x, int y, int threshold) {
  int c = img.at(x, y);
  int state[16];
  int sum_abs = 0;
  for (int i = 0; i < 16; ++i) {
    int v = img.at(x + kCircle[i][0], y + kCircle[i][1]);
    sum_abs += std::abs(v - c);
    state[i] = v >= c + threshold ? 1 : (v <= c - threshold ? -1 : 0);
  }
  for (int want : {1, -1}) {
    int run = 0;
    for (int i = 0; i < 32; ++i) {
      if (state[i & 15] == want) {
        if (++run >= kArc) return static_cast<float>(sum_abs);
      } else {
        run = 0;
      }
    }
  }
  return 0.0f;
}

constexpr int kPatchRadius = 15;   // descriptor samples in [-15, 15]
constexpr int kSmoothRadius = 2;   // 5x5 box smoothing around each sample

// Fixed pseudo-random comparison pattern; the seed is a build-time constant so
// descriptors are identical across runs and machines.
struct BriefPattern {
  std::array<std::array<int8_t, 4>, Descriptor::kBits> pairs;  // px, py, qx, qy
  BriefPattern() {
    std::mt19937 rng(0x51f7c0deu);
    auto coord = [&rng]() {
      return static_cast<int8_t>(static_cast<int>(rng() % (2 * kPatchRadius + 1)) - kPatchRadius);
    };
    for (auto& p : pairs) {
      p[0] = coord();
      p[1] = coord();
      do {
        p[2] = coord();
        p[3] = coord();
      } while (p[2] == p[0] && p[3] == p[1]);
    }
  }
};

const BriefPattern& brief_pattern() {
  static const BriefPattern pattern;
  return pattern;
}

// Sum over the 5x5 box centered at (x, y); comparing sums is equivalent to
// comparing box-smoothed means and stays in exact integer arithmetic.
int box_sum(const Image& img, int x, int y) {
  int s = 0;
  for (int dy = -kSmoothRadius; dy <= kSmoothRadius; ++dy)
    for (int dx = -kSmoothRadius; dx <= kSmoothRadius; ++dx) s += img.at(x + dx, y + dy);
  return s;
}

}  // namespace

std::vector<Keypoint> detect_keypoints(const Image& img, int max_n, int threshold) {
  if (img.width < 16 || img.height < 16) throw std::invalid_argument("image too small");
  if (max_n < 0) throw std::invalid_argument("max_n must be >= 0");

  const int margin = kDetectMargin;
  std::vector<float> resp(static_cast<std::size_t>(img.width) * img.height, 0.0f);
  for (int y = margin; y < img.height - margin; ++y)
    for (int x = margin; x < img.width - margin; ++x)
      resp[static_cast<std::size_t>(y) * img.width + x] = fast_response(img, x, y, threshold);

  std::vector<Keypoint> kps;
  auto r = [&](int x, int y) { return resp[static_cast<std::size_t>(y) * img.width + x]; };
  for (int y = margin; y < img.height - margin; ++y) {
    for (int x = margin; x < img.width - margin; ++x) {
      float v = r(x, y);
      if (v <= 0.0f) continue;
      // 3x3 non-maximum suppression; plateau ties resolved by raster order.
      bool keep = true;
      for (int dy = -1; dy <= 1 && keep; ++dy) {
        for (int dx = -1; dx <= 1 && keep; ++dx) {
          if (dx == 0 && dy == 0) continue;
          float n = r(x + dx, y + dy);
          if (n > v || (n == v && (dy < 0 || (dy == 0 && dx < 0)))) keep = false;
        }
      }
      if (keep) kps.push_back({x, y, v});
    }
  }
  std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  if (static_cast<int>(kps.size()) > max_n) kps.resize(max_n);
  return kps;
}

const std::array<std::array<std::int8_t, 4>, Descriptor::kBits>& descriptor_pattern() {
  return brief_pattern().pairs;
}

Descriptor compute_descriptor(const Image& img, const Keypoint& kp) {
  const int need = kPatchRadius + kSmoothRadius;
  if (kp.x - need < 0 || kp.y - need < 0 || kp.x + need >= img.width || kp.y + need >= img.height)
    throw std::invalid_argument("descriptor patch out of bounds");
  const auto& pat = brief_pattern();
  Descriptor d;
  for (int i = 0; i < Descriptor::kBits; ++i) {
    const auto& p = pat.pairs[i];
    int a = box_sum(img, kp.x + p[0], kp.y + p[1]);
    int b = box_sum(img, kp.x + p[2], kp.y + p[3]);
    if (a < b) d.set(i);
  }
  return d;
}

Vocabulary::Vocabulary(int radius) : radius_(radius) {
  if (radius < 0 || radius > Descriptor::kBits) throw std::invalid_argument("bad vocabulary radius");
}

std::uint32_t Vocabulary::quantize(const Descriptor& d, bool grow) {
  int best = Descriptor::kBits + 1;
  std::uint32_t best_id = kUnmappedWord;
  for (std::uint32_t i = 0; i < words_.size(); ++i) {
    int dist = hamming(words_[i], d);
    if (dist < best) {  // ties keep the lowest word id
      best = dist;
      best_id = i;
    }
  }
  if (best_id != kUnmappedWord && best <= radius_) return best_id;
  if (!grow) return kUnmappedWord;
  words_.push_back(d);
  return static_cast<std::uint32_t>(words_.size() - 1);
}

void Vocabulary::save(const std::string& path) const {
  io::Writer w;
  w.magic("CSVOC1");
  w.u32(static_cast<std::uint32_t>(words_.size()));
  w.u32(static_cast<std::uint32_t>(radius_));
  for (const auto& word : words_)
    for (std::uint64_t chunk : word.bits) w.u64(chunk);
  w.save(path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  io::Reader r = io::Reader::from_file(path);
  r.expect_magic("CSVOC1");
  std::uint32_t count = r.u32();
  Vocabulary voc(static_cast<int>(r.u32()));
  voc.words_.resize(count);
  for (auto& word : voc.words_)
    for (auto& chunk : word.bits) chunk = r.u64();
  return voc;
}

BoWImage extract_bow(const Image& img, Vocabulary& voc, bool grow, int max_keypoints,
                     std::uint32_t image_id) {
  BoWImage bow;
  bow.image_id = image_id;
  for (const Keypoint& kp : detect_keypoints(img, max_keypoints)) {
    Descriptor d = compute_descriptor(img, kp);
    std::uint32_t word = voc.quantize(d, grow);
    if (word == kUnmappedWord) continue;
    bow.entries.push_back({word, kp, d});
  }
  return bow;
}

}  // namespace csight
