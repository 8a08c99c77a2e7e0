#include "csight/ranked_list.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace csight {

RankedList::RankedList(std::vector<ScoredImage> items) : items_(std::move(items)) {
  rank_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (i > 0 && items_[i].score > items_[i - 1].score)
      throw std::logic_error("ranked list scores must be non-increasing");
    if (!rank_.emplace(items_[i].id, static_cast<int>(i) + 1).second)
      throw std::logic_error("ranked list ids must be unique");
  }
}

RankedList RankedList::from_scores(std::vector<ScoredImage> items) {
  std::sort(items.begin(), items.end(), [](const ScoredImage& a, const ScoredImage& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return RankedList(std::move(items));
}

int RankedList::rank_of(std::uint32_t id) const {
  auto it = rank_.find(id);
  return it == rank_.end() ? 0 : it->second;
}

int RankedList::rank_or_missing(std::uint32_t id) const {
  int r = rank_of(id);
  return r ? r : static_cast<int>(items_.size()) + 1;
}

RankedList strong_query(const std::vector<RankedList>& lists) {
  if (lists.empty()) throw std::invalid_argument("strong_query needs at least one ranked list");
  std::map<std::uint32_t, std::vector<int>> ranks;
  for (const auto& list : lists)
    for (const auto& item : list.items()) ranks[item.id];  // collect the id universe
  for (auto& [id, rs] : ranks) {
    rs.reserve(lists.size());
    for (const auto& list : lists) rs.push_back(list.rank_or_missing(id));
    // Summing in sorted rank order makes the result bitwise invariant to any
    // permutation of the input list collection.
    std::sort(rs.begin(), rs.end());
  }
  std::vector<ScoredImage> scored;
  scored.reserve(ranks.size());
  for (const auto& [id, rs] : ranks) {
    double s = 0.0;
    for (int r : rs) s += 1.0 / r;
    scored.push_back({id, s});
  }
  return RankedList::from_scores(std::move(scored));
}

}  // namespace csight
