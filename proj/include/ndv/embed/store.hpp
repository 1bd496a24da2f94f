#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ndv/embed/vector.hpp"

namespace ndv::embed {

// On-disk layout, little-endian:
//
//   offset 0   char[4]  magic "NDJV"
//          4   u32      version (1)
//          8   u32      dim
//         12   u64      count
//         20   f32      matrix[count][dim], row-major
//          .   id table: count x (u32 byte length, UTF-8 bytes)
//
// The matrix sits at a fixed 4-byte-aligned offset so a read-only mapping
// can be used in place.
inline constexpr char kStoreMagic[4] = {'N', 'D', 'J', 'V'};
inline constexpr std::uint32_t kStoreVersion = 1;
inline constexpr std::size_t kStoreHeaderBytes = 20;

enum class Validation { check, skip };

// count x dim unit-norm float32 rows with aligned ids. Immutable; copies
// share the underlying buffer or mapping, so passing by value is cheap.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  // Throws InvariantError when `check` finds a size mismatch, duplicate
  // ids, dim 0, or a row whose norm is off by more than kNormTolerance.
  static EmbeddingStore from_rows(std::size_t dim, std::vector<float> matrix,
                                  std::vector<std::string> ids,
                                  Validation validation = Validation::check);
  static EmbeddingStore from_vectors(std::size_t dim, const std::vector<EmbeddingVector>& rows,
                                     std::vector<std::string> ids);

  // Wraps externally owned memory; `owner` keeps it alive.
  static EmbeddingStore adopt(std::size_t dim, std::size_t count, const float* data,
                              std::shared_ptr<const void> owner, std::vector<std::string> ids);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  std::span<const float> matrix() const noexcept { return {data_, count_ * dim_}; }
  std::span<const float> row(std::size_t i) const noexcept { return {data_ + i * dim_, dim_}; }
  const std::vector<std::string>& ids() const noexcept;

  // Throws InvariantError describing the first violated invariant.
  void validate() const;

  // Bitwise equality of the matrix bytes plus id equality.
  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b);

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  const float* data_ = nullptr;
  std::shared_ptr<const void> owner_;
  std::shared_ptr<const std::vector<std::string>> ids_;
};

// Validates, then writes the store. Throws InvariantError or IoError.
void write_store(const EmbeddingStore& store, const std::filesystem::path& path);

enum class ReadMode { map, copy };

// Throws FormatError on bad magic/version or a truncated/overlong file,
// CorruptStoreError on a norm violation or duplicate id, IoError when the
// file cannot be opened.
EmbeddingStore read_store(const std::filesystem::path& path, ReadMode mode = ReadMode::map);

// Serialized bytes, as write_store would produce them.
std::vector<std::uint8_t> serialize_store(const EmbeddingStore& store);
EmbeddingStore deserialize_store(std::span<const std::uint8_t> bytes);

}  // namespace ndv::embed
