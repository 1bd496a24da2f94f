#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ndv/embed/store.hpp"
#include "ndv/eval/metrics.hpp"

namespace ndv::eval {

enum class Split : std::uint8_t { train, val, test };

struct PairExample {
  std::string a_id;
  std::string b_id;
  Label label = Label::positive;
  Split split = Split::train;

  friend bool operator==(const PairExample&, const PairExample&) = default;
};

// Articles grouped by an aggregator as covering the same story.
struct StoryGroup {
  std::string story_id;
  std::vector<std::string> members;
  std::vector<std::string> sources;  // aligned with members
  std::vector<std::string> topic_page_ids;
};

// Every unordered pair of distinct members within each group, once. Pairs
// that recur across groups are kept only the first time.
std::vector<PairExample> assemble_positive_pairs(std::span<const StoryGroup> groups,
                                                 Split split = Split::train);

// Metadata the hard-negative search needs for each pool article.
struct PoolMember {
  std::string source;
  std::vector<std::string> story_ids;  // story groups the article belongs to
  std::vector<std::string> page_ids;   // topic and story pages it appears on
};

// Vectors plus metadata. Vectors need not be normalized; similarity is the
// cosine.
class NegativePool {
 public:
  NegativePool(std::size_t dim, std::vector<float> vectors, std::vector<std::string> ids,
               std::vector<PoolMember> members);
  // Throws UnknownId when an id of the store has no metadata.
  NegativePool(const embed::EmbeddingStore& store,
               const std::unordered_map<std::string, PoolMember>& members);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const float> vector(std::size_t i) const noexcept {
    return {vectors_.data() + i * dim_, dim_};
  }
  const std::string& id(std::size_t i) const noexcept { return ids_[i]; }
  const PoolMember& member(std::size_t i) const noexcept { return members_[i]; }
  std::size_t index_of(std::string_view id) const;  // UnknownId when absent

 private:
  std::size_t dim_;
  std::vector<float> vectors_;
  std::vector<std::string> ids_;
  std::vector<PoolMember> members_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct MinedNegative {
  std::string id;
  double cosine = 0.0;
  bool cross_source = false;  // true when the fallback rule was used
};

// The most similar pool article that comes from the anchor's source and
// shares none of its story groups or pages. When no same-source article
// qualifies, the most similar qualifying article from another source.
// Never the anchor itself. Ties go to the earlier pool row. Throws
// NoNegativeAvailable when nothing qualifies.
MinedNegative mine_hard_negative(std::string_view anchor_id, const NegativePool& pool);

struct SplitCounts {
  // cells[split][label]
  std::array<std::array<std::size_t, 2>, 3> cells{};

  std::size_t at(Split s, Label l) const noexcept { return cells[std::size_t(s)][std::size_t(l)]; }
  std::size_t total(Label l) const noexcept;
  std::size_t total() const noexcept { return total(Label::positive) + total(Label::negative); }
};

SplitCounts split_counts(std::span<const PairExample> pairs);

std::string_view to_string(Split s) noexcept;
std::string_view to_string(Label l) noexcept;

}  // namespace ndv::eval
