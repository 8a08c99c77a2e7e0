#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "csight/synth.hpp"
#include "doctest.h"

using namespace csight;

namespace {

SynthSpec small_spec() {
  SynthSpec spec;
  spec.width = 160;
  spec.height = 120;
  spec.places = 3;
  spec.views_per_place = 4;
  spec.queries = 5;
  return spec;
}

bool inside_frame(const Rect& r, const SynthSpec& spec) {
  return r.x >= 0 && r.y >= 0 && r.w >= 1 && r.h >= 1 && r.x + r.w <= spec.width &&
         r.y + r.h <= spec.height;
}

}  // namespace

TEST_CASE("the generator is deterministic for a fixed seed") {
  SynthSpec spec = small_spec();
  SynthDataset a = synth_dataset(spec, 42);
  SynthDataset b = synth_dataset(spec, 42);
  CHECK(a.map_images == b.map_images);
  CHECK(a.map_names == b.map_names);
  CHECK(a.queries == b.queries);
  CHECK(a.query_scene == b.query_scene);
  CHECK(a.masks == b.masks);
  REQUIRE(a.gt.size() == b.gt.size());
  for (std::size_t i = 0; i < a.gt.size(); ++i) {
    CHECK(a.gt[i].query_id == b.gt[i].query_id);
    CHECK(a.gt[i].change_boxes == b.gt[i].change_boxes);
  }
  REQUIRE(a.proposals.size() == b.proposals.size());
  for (std::size_t i = 0; i < a.proposals.size(); ++i) {
    REQUIRE(a.proposals[i].size() == b.proposals[i].size());
    for (std::size_t j = 0; j < a.proposals[i].size(); ++j) {
      CHECK(a.proposals[i][j].rect == b.proposals[i][j].rect);
      CHECK(a.proposals[i][j].score == b.proposals[i][j].score);
      CHECK(a.proposals[i][j].label == b.proposals[i][j].label);
    }
  }

  SynthDataset c = synth_dataset(spec, 43);
  CHECK(a.map_images != c.map_images);
}

TEST_CASE("the dataset carries the requested shapes and names") {
  SynthSpec spec = small_spec();
  SynthDataset ds = synth_dataset(spec, 7);
  REQUIRE(ds.map_images.size() == 12);
  CHECK(ds.map_names.size() == 12);
  CHECK(ds.map_place.size() == 12);
  CHECK(ds.map_names[0] == "map_0000");
  CHECK(ds.map_names[11] == "map_0011");
  REQUIRE(ds.queries.size() == 5);
  CHECK(ds.query_names[0] == "query_0000");
  CHECK(ds.query_names[4] == "query_0004");
  CHECK(ds.gt.size() == 5);
  CHECK(ds.masks.size() == 5);
  CHECK(ds.proposals.size() == 5);

  for (const Image& img : ds.map_images) {
    CHECK(img.width == spec.width);
    CHECK(img.height == spec.height);
  }
  for (int p : ds.map_place) {
    CHECK(p >= 0);
    CHECK(p < spec.places);
  }
  // Views are grouped by place in name order.
  CHECK(ds.map_place[0] == 0);
  CHECK(ds.map_place[3] == 0);
  CHECK(ds.map_place[4] == 1);
  CHECK(ds.map_place[11] == 2);

  for (std::size_t q = 0; q < ds.queries.size(); ++q) {
    CHECK(ds.queries[q].width == spec.width);
    CHECK(ds.queries[q].height == spec.height);
    CHECK(ds.query_scene[q] >= 0);
    CHECK(ds.query_scene[q] < 12);
    CHECK(ds.gt[q].query_id == ds.query_names[q]);
  }
}

TEST_CASE("every pixel respects the generator's dynamic range") {
  SynthDataset ds = synth_dataset(small_spec(), 11);
  auto in_range = [](const Image& img) {
    for (auto p : img.pixels)
      if (p < 5 || p > 250) return false;
    return true;
  };
  for (const Image& img : ds.map_images) CHECK(in_range(img));
  for (const Image& img : ds.queries) CHECK(in_range(img));
}

TEST_CASE("ground truth boxes stay in frame and below the mask band") {
  SynthSpec spec = small_spec();
  SynthDataset ds = synth_dataset(spec, 13);
  for (const GroundTruth& gt : ds.gt) {
    CHECK(gt.change_boxes.size() >= static_cast<std::size_t>(spec.min_changes));
    CHECK(gt.change_boxes.size() <= static_cast<std::size_t>(spec.max_changes));
    for (const Rect& box : gt.change_boxes) {
      CHECK(inside_frame(box, spec));
      CHECK(box.y >= spec.mask_band);
    }
  }
}

TEST_CASE("masks flag exactly the top band") {
  SynthSpec spec = small_spec();
  SynthDataset ds = synth_dataset(spec, 17);
  for (const Image& mask : ds.masks) {
    REQUIRE(mask.width == spec.width);
    REQUIRE(mask.height == spec.height);
    for (int y = 0; y < mask.height; ++y)
      for (int x = 0; x < mask.width; ++x)
        CHECK(mask.at(x, y) == (y < spec.mask_band ? 255 : 0));
  }
}

TEST_CASE("silent capture replays the source view outside the changes") {
  SynthSpec spec = small_spec();
  spec.query_noise = 0;
  spec.query_brightness = 0;
  SynthDataset ds = synth_dataset(spec, 19);
  for (std::size_t q = 0; q < ds.queries.size(); ++q) {
    const Image& src = ds.map_images[static_cast<std::size_t>(ds.query_scene[q])];
    const Image& img = ds.queries[q];
    int diff_outside = 0;
    bool diff_inside = false;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        bool in_change = false;
        for (const Rect& box : ds.gt[q].change_boxes)
          in_change = in_change || (x >= box.x && x < box.x + box.w && y >= box.y &&
                                    y < box.y + box.h);
        if (in_change) {
          diff_inside = diff_inside || img.at(x, y) != src.at(x, y);
        } else if (img.at(x, y) != src.at(x, y)) {
          ++diff_outside;
        }
      }
    }
    CHECK(diff_outside == 0);
    CHECK(diff_inside);
  }
}

TEST_CASE("each change box comes with an aligned detector proposal") {
  SynthSpec spec = small_spec();
  SynthDataset ds = synth_dataset(spec, 23);
  for (std::size_t q = 0; q < ds.queries.size(); ++q) {
    const auto& props = ds.proposals[q];
    CHECK(props.size() == ds.gt[q].change_boxes.size() * 3 + 64);
    for (const Rect& box : ds.gt[q].change_boxes) {
      bool aligned = false;
      for (const Proposal& p : props)
        aligned = aligned || (p.rect == box && p.score == 0.9 && p.label == "obj");
      CHECK(aligned);
    }
    for (const Proposal& p : props) {
      CHECK(p.rect.w >= 1);
      CHECK(p.rect.h >= 1);
      if (p.score == 0.5) CHECK(inside_frame(p.rect, spec));
    }
  }
}

TEST_CASE("zero queries is a valid request") {
  SynthSpec spec = small_spec();
  spec.queries = 0;
  SynthDataset ds = synth_dataset(spec, 29);
  CHECK(ds.map_images.size() == 12);
  CHECK(ds.queries.empty());
  CHECK(ds.gt.empty());
  CHECK(ds.proposals.empty());
}

TEST_CASE("a single place works without donor material") {
  SynthSpec spec = small_spec();
  spec.places = 1;
  spec.queries = 2;
  SynthDataset ds = synth_dataset(spec, 31);
  CHECK(ds.map_images.size() == 4);
  CHECK(ds.queries.size() == 2);
  for (const GroundTruth& gt : ds.gt) CHECK(!gt.change_boxes.empty());
}

TEST_CASE("infeasible requests are rejected with a reason") {
  auto expect = [](SynthSpec spec, const char* what) {
    CHECK_THROWS_WITH_AS(synth_dataset(spec, 1), doctest::Contains(what),
                         std::invalid_argument);
  };
  SynthSpec tiny = small_spec();
  tiny.width = 20;
  expect(tiny, "infeasible spec: frame too small");

  SynthSpec none = small_spec();
  none.places = 0;
  expect(none, "infeasible spec: counts must be positive");

  SynthSpec counts = small_spec();
  counts.min_changes = 3;
  counts.max_changes = 2;
  expect(counts, "infeasible spec: inverted change count range");

  SynthSpec areas = small_spec();
  areas.min_change_area = 0.2;
  areas.max_change_area = 0.1;
  expect(areas, "infeasible spec: inverted change area range");

  SynthSpec band = small_spec();
  band.mask_band = band.height;
  expect(band, "infeasible spec: mask band too tall");

  SynthSpec cramped = small_spec();
  cramped.mask_band = 100;  // leaves 20 rows for a ~40px-tall change
  expect(cramped, "infeasible spec: change larger than image");
}
