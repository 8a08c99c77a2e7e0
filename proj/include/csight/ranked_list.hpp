#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace csight {

struct ScoredImage {
  std::uint32_t id = 0;
  double score = 0.0;
};

// Map-image candidates in descending score order with 1-based rank lookup.
// Scores must be non-increasing and ids unique; rank_of is a bijection
// between the ids and 1..size().
class RankedList {
 public:
  RankedList() = default;
  // Takes items already in final order; validates the invariants.
  explicit RankedList(std::vector<ScoredImage> items);
  // Sorts by (score desc, id asc) first.
  static RankedList from_scores(std::vector<ScoredImage> items);

  const std::vector<ScoredImage>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  // 1-based rank; 0 when the id is absent.
  int rank_of(std::uint32_t id) const;
  // Absent ids take the worst rank plus one.
  int rank_or_missing(std::uint32_t id) const;

 private:
  std::vector<ScoredImage> items_;
  std::unordered_map<std::uint32_t, int> rank_;
};

// Reciprocal-rank fusion of weak ranked lists: score(id) = sum over lists of
// 1/rank(id), absent ids taking rank (list length + 1). Invariant to the
// order of the input lists.
RankedList strong_query(const std::vector<RankedList>& lists);

}  // namespace csight
