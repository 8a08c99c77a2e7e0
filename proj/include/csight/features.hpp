#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "csight/image.hpp"

namespace csight {

struct Keypoint {
  int x = 0;
  int y = 0;
  float response = 0.0f;
  bool operator==(const Keypoint&) const = default;
};

// 256-bit binary descriptor, compared by Hamming distance.
struct Descriptor {
  static constexpr int kBits = 256;
  std::array<std::uint64_t, 4> bits{};

  void set(int i) { bits[i >> 6] |= std::uint64_t{1} << (i & 63); }
  bool test(int i) const { return (bits[i >> 6] >> (i & 63)) & 1; }
  bool operator==(const Descriptor&) const = default;
};

int hamming(const Descriptor& a, const Descriptor& b);

// 128-dim gradient-orientation histogram, L2-normalized (all-zero for flat
// patches). Used by the pairwise-comparison channel.
struct GradDescriptor {
  static constexpr int kDims = 128;
  std::array<float, kDims> values{};
};

inline constexpr std::uint32_t kUnmappedWord = 0xffffffffu;

// Incrementally grown visual vocabulary. A descriptor is assigned to the
// nearest word when within `radius` Hamming bits; with grow enabled an
// unassignable descriptor becomes a new word. Word ids are dense and a word,
// once created, is never reassigned.
class Vocabulary {
 public:
  explicit Vocabulary(int radius = 64);

  std::uint32_t quantize(const Descriptor& d, bool grow);
  std::size_t size() const { return words_.size(); }
  int radius() const { return radius_; }
  const Descriptor& word(std::uint32_t id) const { return words_.at(id); }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<Descriptor> words_;
  int radius_;
};

struct BoWEntry {
  std::uint32_t word = 0;
  Keypoint kp;
  Descriptor desc;
};

// An image as a set of (visual word, keypoint) pairs. Keypoints stay in the
// full-image frame so the representation can be reorganized by cropping.
struct BoWImage {
  std::uint32_t image_id = 0;
  std::vector<BoWEntry> entries;
};

// Margin inside which keypoints are detected; guarantees the descriptor's
// 31x31 sampling patch plus its 5x5 smoothing window fit in the image.
inline constexpr int kDetectMargin = 17;
inline constexpr int kFastThreshold = 20;

std::vector<Keypoint> detect_keypoints(const Image& img, int max_n,
                                       int threshold = kFastThreshold);
Descriptor compute_descriptor(const Image& img, const Keypoint& kp);
// The fixed comparison pattern behind compute_descriptor: per bit, the two
// patch offsets (px, py, qx, qy) whose box-smoothed intensities are compared.
const std::array<std::array<std::int8_t, 4>, Descriptor::kBits>& descriptor_pattern();
BoWImage extract_bow(const Image& img, Vocabulary& voc, bool grow, int max_keypoints,
                     std::uint32_t image_id = 0);

}  // namespace csight
