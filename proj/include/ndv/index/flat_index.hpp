#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ndv/embed/store.hpp"

namespace ndv::index {

struct SearchHit {
  std::string id;
  std::uint64_t ordinal = 0;  // global row number across shards
  float score = 0.0f;         // inner product

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

// Result order: score descending, then global ordinal ascending.
inline bool ranks_before(const SearchHit& a, const SearchHit& b) noexcept {
  return a.score != b.score ? a.score > b.score : a.ordinal < b.ordinal;
}

struct SearchOptions {
  std::size_t block_rows = 4096;
  // Row partitions for search(), query partitions for search_batch().
  unsigned threads = 1;
};

// Exact maximum-inner-product search over one or more stores.
//
// Scores are float32 dot products accumulated sequentially over the
// dimensions of each row, the same arithmetic as embed::inner_product, so
// every search path yields bitwise-identical scores. Immutable once built;
// any number of threads may search concurrently.
class FlatIndex {
 public:
  // Shards are referenced, not copied. Throws EmptyIndex for no shards,
  // DimMismatchError for unequal dims, DuplicateIdError for an id present
  // twice across all shards.
  static FlatIndex build(std::vector<embed::EmbeddingStore> shards);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t total() const noexcept { return total_; }
  const std::vector<embed::EmbeddingStore>& shards() const noexcept { return shards_; }

  std::uint64_t ordinal_of(std::size_t shard, std::size_t row) const;
  std::pair<std::size_t, std::size_t> locate(std::uint64_t ordinal) const;
  const std::string& id(std::uint64_t ordinal) const;
  std::span<const float> row(std::uint64_t ordinal) const;
  std::optional<std::uint64_t> find(std::string_view id) const;

  // The k best rows (k clamped to total). Throws BadK for k == 0 and
  // DimMismatchError when the query has the wrong dim.
  std::vector<SearchHit> search(std::span<const float> query, std::size_t k,
                                const SearchOptions& options = {}) const;

  // `queries` is row-major, queries.size() == n * dim. Element i equals
  // search(query i, k).
  std::vector<std::vector<SearchHit>> search_batch(std::span<const float> queries, std::size_t k,
                                                   const SearchOptions& options = {}) const;
  std::vector<std::vector<SearchHit>> search_batch(const embed::EmbeddingStore& queries,
                                                   std::size_t k,
                                                   const SearchOptions& options = {}) const;

 private:
  std::vector<embed::EmbeddingStore> shards_;
  std::vector<std::uint64_t> offsets_;  // first global ordinal of each shard
  std::size_t dim_ = 0;
  std::size_t total_ = 0;
  std::shared_ptr<const std::unordered_map<std::string_view, std::uint64_t>> by_id_;
};

// Merges per-shard hit lists (each already in result order, ordinals
// global) into the overall top k.
std::vector<SearchHit> merge_topk(std::span<const std::vector<SearchHit>> per_shard,
                                  std::size_t k);

}  // namespace ndv::index
