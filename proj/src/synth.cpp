#include "csight/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace csight {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t n) {
  return splitmix64(seed ^ splitmix64(stream * 0x100000001b3ull + n));
}

int rnd(std::mt19937_64& rng, int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); }

std::uint8_t clamp_px(int v) { return static_cast<std::uint8_t>(std::clamp(v, 5, 250)); }

void paint_rect(Image& img, const Rect& r, int fill) {
  int x0 = std::max(r.x, 0), y0 = std::max(r.y, 0);
  int x1 = std::min(r.x + r.w, img.width), y1 = std::min(r.y + r.h, img.height);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) img.at(x, y) = clamp_px(fill);
}

// Micro-texture marks: each mark is a small cluster of thin bars at random
// offsets, sizes, and polarities. A single dark or light square quantizes to
// one shared blob word across the whole map; the joint geometry of a bar
// cluster inside a descriptor window varies enough that marks land in many
// different words, keeping posting lists local to a place.
void paint_dots_in(Image& img, std::mt19937_64& rng, int count, const Rect& area) {
  for (int i = 0; i < count; ++i) {
    if (area.w <= 14 || area.h <= 14) break;
    int cx = area.x + rnd(rng, area.w - 14);
    int cy = area.y + rnd(rng, area.h - 14);
    int bars = 2 + rnd(rng, 3);
    for (int b = 0; b < bars; ++b) {
      int bw, bh;
      if (rnd(rng, 2)) {
        bw = 4 + rnd(rng, 6);
        bh = 2 + rnd(rng, 3);
      } else {
        bw = 2 + rnd(rng, 3);
        bh = 4 + rnd(rng, 6);
      }
      int x = cx + rnd(rng, std::max(1, 13 - bw));
      int y = cy + rnd(rng, std::max(1, 13 - bh));
      int v = img.at(x, y);
      int c = 60 + rnd(rng, 70);
      int sign = rnd(rng, 2) ? 1 : -1;
      if (v + sign * c < 5 || v + sign * c > 250) sign = -sign;
      paint_rect(img, {x, y, bw, bh}, v + sign * c);
    }
  }
}

void paint_dots(Image& img, std::mt19937_64& rng, int count) {
  paint_dots_in(img, rng, count, {0, 0, img.width, img.height});
}

Image render_place(const SynthSpec& spec, std::mt19937_64& rng) {
  Image img(spec.width, spec.height, static_cast<std::uint8_t>(50 + rnd(rng, 101)));
  for (int t = 0; t < spec.texture_rects; ++t) {
    Rect r{rnd(rng, spec.width), rnd(rng, spec.height), 8 + rnd(rng, std::max(1, spec.width / 3)),
           8 + rnd(rng, std::max(1, spec.height / 3))};
    paint_rect(img, r, 30 + rnd(rng, 191));
  }
  paint_dots(img, rng, spec.dots);
  return img;
}

Image render_view(const SynthSpec& spec, const Image& place, std::mt19937_64& rng) {
  Image img = place;
  for (int t = 0; t < 6; ++t) {
    Rect r{rnd(rng, spec.width), rnd(rng, spec.height), 6 + rnd(rng, std::max(1, spec.width / 6)),
           6 + rnd(rng, std::max(1, spec.height / 6))};
    paint_rect(img, r, 30 + rnd(rng, 191));
  }
  paint_dots(img, rng, 28);
  int shift = rnd(rng, 13) - 6;
  for (auto& p : img.pixels) p = clamp_px(p + shift + rnd(rng, 11) - 5);
  return img;
}

void paste_fragment(Image& img, const Image& donor, const Rect& box, std::mt19937_64& rng) {
  int side = 38 + rnd(rng, 11);
  int fw = std::min(side, box.w), fh = std::min(side, box.h);
  int dx = box.x + rnd(rng, box.w - fw + 1);
  int dy = box.y + rnd(rng, box.h - fh + 1);
  int sx = rnd(rng, donor.width - fw + 1);
  int sy = rnd(rng, donor.height - fh + 1);
  for (int y = 0; y < fh; ++y)
    for (int x = 0; x < fw; ++x) img.at(dx + x, dy + y) = donor.at(sx + x, sy + y);
}

// Plants one change rectangle: contrasting fill, then sub-rectangles, dot
// texture, and fragments copied out of other places' map views, all confined
// to an interior core. The flat margin stops corners from forming near the
// border, so no descriptor window mixes planted and unchanged content; the
// fragments give the region visual words the index knows but attributes
// elsewhere.
Rect plant_change(Image& img, const SynthSpec& spec, const std::vector<const Image*>& donors,
                  std::mt19937_64& rng) {
  double frame = static_cast<double>(spec.width) * spec.height;
  double a = spec.min_change_area +
             (rng() % 1000) / 999.0 * (spec.max_change_area - spec.min_change_area);
  double aspect = 0.6 + (rng() % 1000) / 999.0;
  int cw = std::max(6, static_cast<int>(std::lround(std::sqrt(a * frame * aspect))));
  int ch = std::max(6, static_cast<int>(std::lround(a * frame / cw)));
  if (cw > spec.width || ch > spec.height - spec.mask_band)
    throw std::invalid_argument("infeasible spec: change larger than image");
  Rect box{rnd(rng, spec.width - cw + 1),
           spec.mask_band + rnd(rng, spec.height - spec.mask_band - ch + 1), cw, ch};

  long long sum = 0;
  for (int y = box.y; y < box.y + box.h; ++y)
    for (int x = box.x; x < box.x + box.w; ++x) sum += img.at(x, y);
  int mean = static_cast<int>(sum / box.area());
  int fill = mean > 127 ? mean - (60 + rnd(rng, 50)) : mean + (60 + rnd(rng, 50));
  paint_rect(img, box, fill);

  const int margin = 17;
  Rect core{box.x + margin, box.y + margin, box.w - 2 * margin, box.h - 2 * margin};
  if (core.w < 16 || core.h < 16) return box;
  int subs = 2 + rnd(rng, 2);
  for (int s = 0; s < subs; ++s) {
    int sw = std::min(core.w, std::max(4, box.w / 4));
    int sh = std::min(core.h, std::max(4, box.h / 4));
    Rect sub{core.x + rnd(rng, std::max(1, core.w - sw + 1)),
             core.y + rnd(rng, std::max(1, core.h - sh + 1)), sw, sh};
    paint_rect(img, sub, fill + (rnd(rng, 2) ? 30 : -30) + rnd(rng, 21) - 10);
  }
  paint_dots_in(img, rng, std::max(6, static_cast<int>(core.area() / 300)), core);
  if (!donors.empty()) {
    std::size_t n_frag =
        std::clamp<std::size_t>(static_cast<std::size_t>(core.area() / 2200), 2, donors.size());
    for (std::size_t f = 0; f < n_frag; ++f) paste_fragment(img, *donors[f], core, rng);
  }
  return box;
}

}  // namespace

SynthDataset synth_dataset(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.width < 32 || spec.height < 32)
    throw std::invalid_argument("infeasible spec: frame too small");
  if (spec.places < 1 || spec.views_per_place < 1 || spec.queries < 0)
    throw std::invalid_argument("infeasible spec: counts must be positive");
  if (spec.min_changes < 0 || spec.max_changes < spec.min_changes)
    throw std::invalid_argument("infeasible spec: inverted change count range");
  if (spec.min_change_area <= 0.0 || spec.max_change_area < spec.min_change_area)
    throw std::invalid_argument("infeasible spec: inverted change area range");
  if (spec.mask_band < 0 || spec.mask_band >= spec.height)
    throw std::invalid_argument("infeasible spec: mask band too tall");
  // The largest requested change must be plantable below the mask band.
  double frame = static_cast<double>(spec.width) * spec.height;
  if (spec.max_changes > 0 &&
      (std::sqrt(spec.max_change_area * frame * 1.6) > spec.width ||
       std::sqrt(spec.max_change_area * frame / 0.6) > spec.height - spec.mask_band))
    throw std::invalid_argument("infeasible spec: change larger than image");

  SynthDataset ds;
  const int scenes = spec.places * spec.views_per_place;
  ds.map_images.reserve(scenes);
  for (int p = 0; p < spec.places; ++p) {
    std::mt19937_64 prng(derive(seed, 1, p));
    Image place = render_place(spec, prng);
    for (int v = 0; v < spec.views_per_place; ++v) {
      std::mt19937_64 vrng(derive(seed, 2, p * 1000 + v));
      ds.map_images.push_back(render_view(spec, place, vrng));
      ds.map_place.push_back(p);
      char name[32];
      std::snprintf(name, sizeof name, "map_%04d", p * spec.views_per_place + v);
      ds.map_names.emplace_back(name);
    }
  }

  for (int q = 0; q < spec.queries; ++q) {
    std::mt19937_64 rng(derive(seed, 3, q));
    int scene = rnd(rng, scenes);
    Image img = ds.map_images[scene];
    int shift = rnd(rng, 2 * spec.query_brightness + 1) - spec.query_brightness;
    for (auto& px : img.pixels) px = clamp_px(px + shift);

    // Donor views for change fragments: one per foreign place, drawn without
    // replacement inside each place, so no view and no place piles up
    // retrieval mass from the planted content.
    std::vector<std::vector<int>> pools;
    for (int p = 0; p < spec.places; ++p) {
      if (p == ds.map_place[scene]) continue;
      std::vector<int> pool;
      for (int s = 0; s < scenes; ++s)
        if (ds.map_place[s] == p) pool.push_back(s);
      for (std::size_t i = pool.size(); i > 1; --i)
        std::swap(pool[i - 1], pool[rnd(rng, static_cast<int>(i))]);
      pools.push_back(std::move(pool));
    }
    std::vector<std::size_t> cursors(pools.size(), 0);

    char name[32];
    std::snprintf(name, sizeof name, "query_%04d", q);
    GroundTruth gt{name, {}};
    int n_changes = spec.min_changes + rnd(rng, spec.max_changes - spec.min_changes + 1);
    std::size_t group_rot = pools.empty() ? 0 : rnd(rng, static_cast<int>(pools.size()));
    for (int cI = 0; cI < n_changes; ++cI) {
      std::vector<const Image*> donors;
      int n_frag = pools.empty() ? 0 : 6 + rnd(rng, 3);
      for (int f = 0; f < n_frag; ++f) {
        std::size_t g = (group_rot++) % pools.size();
        donors.push_back(&ds.map_images[pools[g][cursors[g]++ % pools[g].size()]]);
      }
      gt.change_boxes.push_back(plant_change(img, spec, donors, rng));
    }

    if (spec.query_noise > 0)
      for (auto& px : img.pixels)
        px = clamp_px(px + rnd(rng, 2 * spec.query_noise + 1) - spec.query_noise);

    std::vector<Proposal> props;
    for (const Rect& box : gt.change_boxes) {
      props.push_back({box, 0.9, "obj"});
      // A detector rarely fires exactly once per object: add a sloppy twin
      // hanging off one side and an inner part box. The nesting also grades
      // the fused map so each object surfaces its core cells before any
      // object's rim.
      int off = std::max(8, static_cast<int>(box.w * 0.4)) * (rnd(rng, 2) ? 1 : -1);
      Rect twin{box.x + off, box.y + rnd(rng, 7) - 3, box.w - 2 + rnd(rng, 5),
                box.h - 2 + rnd(rng, 5)};
      twin.x = std::clamp(twin.x, 0, spec.width - 8);
      twin.y = std::clamp(twin.y, 0, spec.height - 8);
      twin.w = std::min(twin.w, spec.width - twin.x);
      twin.h = std::min(twin.h, spec.height - twin.y);
      props.push_back({twin, 0.7, ""});
      Rect part{box.x + static_cast<int>(box.w * 0.11), box.y + static_cast<int>(box.h * 0.11),
                std::max(8, static_cast<int>(box.w * 0.78)),
                std::max(8, static_cast<int>(box.h * 0.78))};
      props.push_back({part, 0.6, ""});
    }
    // A generous spread of class-agnostic boxes mimics a proposal generator
    // and anchors the strong query in unchanged context; boxes centered on a
    // planted change would duplicate the detector boxes above, so those are
    // re-rolled.
    for (int dIdx = 0; dIdx < 64; ++dIdx) {
      Rect r;
      for (int attempt = 0; attempt < 16; ++attempt) {
        r = Rect{rnd(rng, spec.width), rnd(rng, spec.height),
                 48 + rnd(rng, std::max(1, spec.width / 5)),
                 48 + rnd(rng, std::max(1, spec.height / 5))};
        r.w = std::min(r.w, spec.width - r.x);
        r.h = std::min(r.h, spec.height - r.y);
        int cx = r.x + r.w / 2, cy = r.y + r.h / 2;
        bool inside = false;
        for (const Rect& box : gt.change_boxes)
          inside = inside || (cx >= box.x && cx < box.x + box.w && cy >= box.y &&
                              cy < box.y + box.h);
        if (!inside) break;
      }
      props.push_back({r, 0.5, ""});
    }

    Image mask(spec.width, spec.height, 0);
    for (int y = 0; y < spec.mask_band; ++y)
      for (int x = 0; x < spec.width; ++x) mask.at(x, y) = 255;

    ds.queries.push_back(std::move(img));
    ds.query_names.emplace_back(name);
    ds.query_scene.push_back(scene);
    ds.gt.push_back(std::move(gt));
    ds.masks.push_back(std::move(mask));
    ds.proposals.push_back(std::move(props));
  }
  return ds;
}

}  // namespace csight
