#include "ndv/nermask/score.hpp"

#include <algorithm>
#include <tuple>
#include <vector>

namespace ndv::ner {

PRF score_spans(std::span<const EntitySpan> gold, std::span<const EntitySpan> pred,
                bool class_agnostic) {
  using Key = std::tuple<std::size_t, std::size_t, int>;
  const auto keys = [&](std::span<const EntitySpan> spans) {
    std::vector<Key> out;
    out.reserve(spans.size());
    for (const auto& s : spans) out.emplace_back(s.start, s.end, class_agnostic ? 0 : int(s.cls) + 1);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  const auto g = keys(gold);
  const auto p = keys(pred);
  std::vector<Key> common;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(common));
  return prf_from_counts(common.size(), pred.size(), gold.size());
}

}  // namespace ndv::ner
