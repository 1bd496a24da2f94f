#include "ndv/index/flat_index.hpp"

#include <algorithm>
#include <thread>

#include "ndv/common/error.hpp"

namespace ndv::index {

namespace {

struct Candidate {
  float score;
  std::uint64_t ordinal;
};

bool before(const Candidate& a, const Candidate& b) noexcept {
  return a.score != b.score ? a.score > b.score : a.ordinal < b.ordinal;
}

// Bounded heap holding the best k candidates; the root is the worst kept.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

  void offer(float score, std::uint64_t ordinal) {
    const Candidate c{score, ordinal};
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end(), before);
    } else if (before(c, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), before);
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end(), before);
    }
  }

  std::vector<Candidate> take_sorted() {
    std::sort_heap(heap_.begin(), heap_.end(), before);
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Candidate> heap_;
};

// Scores rows [begin, end) of `matrix` against one query. Four rows are
// interleaved for instruction-level parallelism; each row's sum still runs
// over d ascending.
template <typename Sink>
void score_rows(const float* matrix, std::size_t dim, std::size_t begin, std::size_t end,
                const float* query, Sink&& sink) {
  std::size_t r = begin;
  for (; r + 4 <= end; r += 4) {
    const float* r0 = matrix + r * dim;
    const float* r1 = r0 + dim;
    const float* r2 = r1 + dim;
    const float* r3 = r2 + dim;
    float a0 = 0.0f, a1 = 0.0f, a2 = 0.0f, a3 = 0.0f;
    for (std::size_t d = 0; d < dim; ++d) {
      const float q = query[d];
      a0 += r0[d] * q;
      a1 += r1[d] * q;
      a2 += r2[d] * q;
      a3 += r3[d] * q;
    }
    sink(r, a0);
    sink(r + 1, a1);
    sink(r + 2, a2);
    sink(r + 3, a3);
  }
  for (; r < end; ++r) {
    const float* row = matrix + r * dim;
    float acc = 0.0f;
    for (std::size_t d = 0; d < dim; ++d) acc += row[d] * query[d];
    sink(r, acc);
  }
}

constexpr std::size_t kQueryGroup = 8;

// Scores rows [begin, end) against a group of up to kQueryGroup queries held
// dimension-major in `transposed` (dim x kQueryGroup). Accumulation order
// per (row, query) pair matches score_rows exactly.
template <typename Sink>
void score_rows_grouped(const float* matrix, std::size_t dim, std::size_t begin, std::size_t end,
                        const float* transposed, std::size_t group, Sink&& sink) {
  for (std::size_t r = begin; r < end; ++r) {
    const float* row = matrix + r * dim;
    float acc[kQueryGroup] = {};
    for (std::size_t d = 0; d < dim; ++d) {
      const float x = row[d];
      const float* q = transposed + d * kQueryGroup;
      for (std::size_t g = 0; g < kQueryGroup; ++g) acc[g] += x * q[g];
    }
    for (std::size_t g = 0; g < group; ++g) sink(g, r, acc[g]);
  }
}

std::vector<SearchHit> to_hits(const FlatIndex& index, const std::vector<Candidate>& cands) {
  std::vector<SearchHit> hits;
  hits.reserve(cands.size());
  for (const auto& c : cands) hits.push_back({index.id(c.ordinal), c.ordinal, c.score});
  return hits;
}

void check_k(std::size_t k) {
  if (k == 0) throw BadK("k must be at least 1");
}

}  // namespace

FlatIndex FlatIndex::build(std::vector<embed::EmbeddingStore> shards) {
  if (shards.empty()) throw EmptyIndex("cannot build an index from zero shards");
  FlatIndex index;
  index.dim_ = shards.front().dim();
  auto by_id = std::make_shared<std::unordered_map<std::string_view, std::uint64_t>>();
  std::uint64_t next = 0;
  for (std::size_t s = 0; s < shards.size(); ++s) {
    if (shards[s].dim() != index.dim_) {
      throw DimMismatchError("shard " + std::to_string(s) + " has dim " +
                             std::to_string(shards[s].dim()) + ", shard 0 has dim " +
                             std::to_string(index.dim_));
    }
    index.offsets_.push_back(next);
    next += shards[s].count();
  }
  by_id->reserve(next);
  for (std::size_t s = 0; s < shards.size(); ++s) {
    const auto& ids = shards[s].ids();
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (!by_id->emplace(ids[r], index.offsets_[s] + r).second) {
        throw DuplicateIdError("id '" + ids[r] + "' occurs in more than one row");
      }
    }
  }
  index.total_ = next;
  index.shards_ = std::move(shards);
  index.by_id_ = std::move(by_id);
  return index;
}

std::uint64_t FlatIndex::ordinal_of(std::size_t shard, std::size_t row) const {
  if (shard >= shards_.size() || row >= shards_[shard].count()) {
    throw UnknownId("no row " + std::to_string(row) + " in shard " + std::to_string(shard));
  }
  return offsets_[shard] + row;
}

std::pair<std::size_t, std::size_t> FlatIndex::locate(std::uint64_t ordinal) const {
  if (ordinal >= total_) throw UnknownId("ordinal " + std::to_string(ordinal) + " out of range");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), ordinal);
  std::size_t shard = std::size_t(it - offsets_.begin()) - 1;
  // Skip empty shards sharing the same offset.
  while (ordinal - offsets_[shard] >= shards_[shard].count()) ++shard;
  return {shard, std::size_t(ordinal - offsets_[shard])};
}

const std::string& FlatIndex::id(std::uint64_t ordinal) const {
  const auto [shard, row] = locate(ordinal);
  return shards_[shard].ids()[row];
}

std::span<const float> FlatIndex::row(std::uint64_t ordinal) const {
  const auto [shard, row] = locate(ordinal);
  return shards_[shard].row(row);
}

std::optional<std::uint64_t> FlatIndex::find(std::string_view id) const {
  const auto it = by_id_->find(id);
  if (it == by_id_->end()) return std::nullopt;
  return it->second;
}

std::vector<SearchHit> FlatIndex::search(std::span<const float> query, std::size_t k,
                                         const SearchOptions& options) const {
  check_k(k);
  if (query.size() != dim_) {
    throw DimMismatchError("query has dim " + std::to_string(query.size()) + ", index has dim " +
                           std::to_string(dim_));
  }
  k = std::min(k, total_);
  if (k == 0) return {};
  const std::size_t block = std::max<std::size_t>(options.block_rows, 1);

  // Work units are (shard, block) pairs, dealt round-robin to workers.
  struct Unit {
    std::size_t shard, begin, end;
  };
  std::vector<Unit> units;
  for (std::size_t s = 0; s < shards_.size(); ++s) {
    for (std::size_t b = 0; b < shards_[s].count(); b += block) {
      units.push_back({s, b, std::min(b + block, shards_[s].count())});
    }
  }

  const auto scan = [&](std::size_t first, std::size_t stride) {
    TopK top(k);
    for (std::size_t u = first; u < units.size(); u += stride) {
      const auto& unit = units[u];
      const auto& shard = shards_[unit.shard];
      const std::uint64_t base = offsets_[unit.shard];
      score_rows(shard.matrix().data(), dim_, unit.begin, unit.end, query.data(),
                 [&](std::size_t r, float score) { top.offer(score, base + r); });
    }
    return to_hits(*this, top.take_sorted());
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, unsigned(units.size())));
  if (workers == 1) return scan(0, 1);

  std::vector<std::vector<SearchHit>> partial(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] { partial[w] = scan(w, workers); });
    }
  }
  return merge_topk(partial, k);
}

std::vector<std::vector<SearchHit>> FlatIndex::search_batch(std::span<const float> queries,
                                                            std::size_t k,
                                                            const SearchOptions& options) const {
  check_k(k);
  if (dim_ == 0 || queries.size() % dim_ != 0) {
    throw DimMismatchError("query matrix of " + std::to_string(queries.size()) +
                           " floats is not a multiple of index dim " + std::to_string(dim_));
  }
  const std::size_t n = queries.size() / dim_;
  std::vector<std::vector<SearchHit>> results(n);
  if (n == 0) return results;
  k = std::min(k, total_);
  if (k == 0) return results;
  const std::size_t block = std::max<std::size_t>(options.block_rows, 1);
  const std::size_t groups = (n + kQueryGroup - 1) / kQueryGroup;

  const auto run_group = [&](std::size_t g0) {
    const std::size_t first = g0 * kQueryGroup;
    const std::size_t size = std::min(kQueryGroup, n - first);
    std::vector<float> transposed(dim_ * kQueryGroup, 0.0f);
    for (std::size_t q = 0; q < size; ++q) {
      for (std::size_t d = 0; d < dim_; ++d) {
        transposed[d * kQueryGroup + q] = queries[(first + q) * dim_ + d];
      }
    }
    std::vector<TopK> tops(size, TopK(k));
    for (std::size_t s = 0; s < shards_.size(); ++s) {
      const auto& shard = shards_[s];
      const std::uint64_t base = offsets_[s];
      for (std::size_t b = 0; b < shard.count(); b += block) {
        score_rows_grouped(shard.matrix().data(), dim_, b, std::min(b + block, shard.count()),
                           transposed.data(), size, [&](std::size_t g, std::size_t r, float score) {
                             tops[g].offer(score, base + r);
                           });
      }
    }
    for (std::size_t q = 0; q < size; ++q) results[first + q] = to_hits(*this, tops[q].take_sorted());
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, unsigned(groups)));
  if (workers == 1) {
    for (std::size_t g = 0; g < groups; ++g) run_group(g);
    return results;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t g = w; g < groups; g += workers) run_group(g);
    });
  }
  pool.clear();
  return results;
}

std::vector<std::vector<SearchHit>> FlatIndex::search_batch(const embed::EmbeddingStore& queries,
                                                            std::size_t k,
                                                            const SearchOptions& options) const {
  if (queries.count() > 0 && queries.dim() != dim_) {
    throw DimMismatchError("query store has dim " + std::to_string(queries.dim()) +
                           ", index has dim " + std::to_string(dim_));
  }
  return search_batch(queries.matrix(), k, options);
}

std::vector<SearchHit> merge_topk(std::span<const std::vector<SearchHit>> per_shard,
                                  std::size_t k) {
  std::vector<SearchHit> merged;
  for (const auto& list : per_shard) merged.insert(merged.end(), list.begin(), list.end());
  const std::size_t keep = std::min(k, merged.size());
  std::partial_sort(merged.begin(), merged.begin() + std::ptrdiff_t(keep), merged.end(),
                    ranks_before);
  merged.resize(keep);
  return merged;
}

}  // namespace ndv::index
