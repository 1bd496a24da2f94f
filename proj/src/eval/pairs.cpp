#include "ndv/eval/pairs.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <utility>

#include "ndv/common/error.hpp"

namespace ndv::eval {

namespace {

bool shares_any(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  for (const auto& x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  }
  return false;
}

}  // namespace

std::vector<PairExample> assemble_positive_pairs(std::span<const StoryGroup> groups, Split split) {
  std::vector<PairExample> pairs;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& group : groups) {
    const auto& m = group.members;
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = i + 1; j < m.size(); ++j) {
        if (m[i] == m[j]) continue;
        auto key = std::minmax(m[i], m[j]);
        if (!seen.emplace(key.first, key.second).second) continue;
        pairs.push_back({m[i], m[j], Label::positive, split});
      }
    }
  }
  return pairs;
}

NegativePool::NegativePool(std::size_t dim, std::vector<float> vectors,
                           std::vector<std::string> ids, std::vector<PoolMember> members)
    : dim_(dim), vectors_(std::move(vectors)), ids_(std::move(ids)), members_(std::move(members)) {
  if (dim_ == 0 || vectors_.size() != dim_ * ids_.size() || members_.size() != ids_.size()) {
    throw ShapeError("negative pool needs dim >= 1 and one vector and metadata entry per id");
  }
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!by_id_.emplace(ids_[i], i).second) {
      throw DuplicateIdError("pool id '" + ids_[i] + "' appears more than once");
    }
  }
}

NegativePool::NegativePool(const embed::EmbeddingStore& store,
                           const std::unordered_map<std::string, PoolMember>& members)
    : NegativePool(store.dim(), std::vector<float>(store.matrix().begin(), store.matrix().end()),
                   store.ids(), [&] {
                     std::vector<PoolMember> aligned;
                     aligned.reserve(store.count());
                     for (const auto& id : store.ids()) {
                       const auto it = members.find(id);
                       if (it == members.end()) {
                         throw UnknownId("no pool metadata for '" + id + "'");
                       }
                       aligned.push_back(it->second);
                     }
                     return aligned;
                   }()) {}

std::size_t NegativePool::index_of(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) throw UnknownId("'" + std::string(id) + "' is not in the pool");
  return it->second;
}

MinedNegative mine_hard_negative(std::string_view anchor_id, const NegativePool& pool) {
  const std::size_t anchor = pool.index_of(anchor_id);
  const PoolMember& a = pool.member(anchor);
  const auto anchor_vec = pool.vector(anchor);

  std::optional<std::size_t> same_source, other_source;
  double same_best = 0.0, other_best = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (i == anchor) continue;
    const PoolMember& c = pool.member(i);
    if (shares_any(a.story_ids, c.story_ids) || shares_any(a.page_ids, c.page_ids)) continue;
    const double sim = embed::cosine(anchor_vec, pool.vector(i));
    if (c.source == a.source) {
      if (!same_source || sim > same_best) {
        same_source = i;
        same_best = sim;
      }
    } else if (!other_source || sim > other_best) {
      other_source = i;
      other_best = sim;
    }
  }
  if (same_source) return {pool.id(*same_source), same_best, false};
  if (other_source) return {pool.id(*other_source), other_best, true};
  throw NoNegativeAvailable("no article in the pool qualifies as a negative for '" +
                            std::string(anchor_id) + "'");
}

std::size_t SplitCounts::total(Label l) const noexcept {
  std::size_t sum = 0;
  for (const auto& row : cells) sum += row[std::size_t(l)];
  return sum;
}

SplitCounts split_counts(std::span<const PairExample> pairs) {
  SplitCounts counts;
  for (const auto& p : pairs) ++counts.cells[std::size_t(p.split)][std::size_t(p.label)];
  return counts;
}

std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

std::string_view to_string(Label l) noexcept {
  return l == Label::positive ? "positive" : "negative";
}

}  // namespace ndv::eval
