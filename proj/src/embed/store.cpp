#include "ndv/embed/store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_set>

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include "ndv/common/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "the store format is little-endian and is read in place");

namespace ndv::embed {

namespace {

const std::vector<std::string>& empty_ids() {
  static const std::vector<std::string> none;
  return none;
}

// Read-only private mapping of a whole file.
class MappedFile {
 public:
  explicit MappedFile(const std::filesystem::path& path) {
    const int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) throw IoError("cannot open store '" + path.string() + "'");
    struct stat st {};
    if (::fstat(fd, &st) != 0) {
      ::close(fd);
      throw IoError("cannot stat store '" + path.string() + "'");
    }
    size_ = static_cast<std::size_t>(st.st_size);
    if (size_ > 0) {
      void* p = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
      if (p == MAP_FAILED) {
        ::close(fd);
        throw IoError("cannot map store '" + path.string() + "'");
      }
      data_ = static_cast<const std::uint8_t*>(p);
    }
    ::close(fd);
  }
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;
  ~MappedFile() {
    if (data_) ::munmap(const_cast<std::uint8_t*>(data_), size_);
  }

  std::span<const std::uint8_t> bytes() const noexcept { return {data_, size_}; }

 private:
  const std::uint8_t* data_ = nullptr;
  std::size_t size_ = 0;
};

template <typename T>
T load(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void store_le(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

struct Layout {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::vector<std::string> ids;
};

// Validates everything except row norms.
Layout parse_layout(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kStoreHeaderBytes) {
    throw FormatError("store truncated: " + std::to_string(bytes.size()) + " bytes, header needs " +
                      std::to_string(kStoreHeaderBytes));
  }
  if (std::memcmp(bytes.data(), kStoreMagic, 4) != 0) throw FormatError("store has bad magic");
  const auto version = load<std::uint32_t>(bytes, 4);
  if (version != kStoreVersion) {
    throw FormatError("unsupported store version " + std::to_string(version));
  }
  Layout layout;
  layout.dim = load<std::uint32_t>(bytes, 8);
  const auto count = load<std::uint64_t>(bytes, 12);
  if (layout.dim == 0) throw FormatError("store declares dim 0");
  const std::size_t available = bytes.size() - kStoreHeaderBytes;
  if (count > available / (layout.dim * sizeof(float))) {
    throw FormatError("store truncated inside the matrix region");
  }
  layout.count = static_cast<std::size_t>(count);

  std::size_t pos = kStoreHeaderBytes + layout.count * layout.dim * sizeof(float);
  layout.ids.reserve(layout.count);
  for (std::size_t i = 0; i < layout.count; ++i) {
    if (bytes.size() - pos < sizeof(std::uint32_t)) {
      throw FormatError("store truncated in id table at entry " + std::to_string(i));
    }
    const auto len = load<std::uint32_t>(bytes, pos);
    pos += sizeof(std::uint32_t);
    if (bytes.size() - pos < len) {
      throw FormatError("store truncated in id table at entry " + std::to_string(i));
    }
    layout.ids.emplace_back(reinterpret_cast<const char*>(bytes.data() + pos), len);
    pos += len;
  }
  if (pos != bytes.size()) {
    throw FormatError("store has " + std::to_string(bytes.size() - pos) + " trailing bytes");
  }
  return layout;
}

void check_loaded(const EmbeddingStore& store) {
  try {
    store.validate();
  } catch (const InvariantError& e) {
    throw CorruptStoreError(e.what());
  }
}

}  // namespace

EmbeddingStore EmbeddingStore::from_rows(std::size_t dim, std::vector<float> matrix,
                                         std::vector<std::string> ids, Validation validation) {
  if (dim == 0 || matrix.size() != dim * ids.size()) {
    throw InvariantError("store matrix has " + std::to_string(matrix.size()) + " floats for " +
                         std::to_string(ids.size()) + " ids at dim " + std::to_string(dim));
  }
  const std::size_t count = ids.size();
  auto owned = std::make_shared<const std::vector<float>>(std::move(matrix));
  EmbeddingStore store = adopt(dim, count, owned->data(), owned, std::move(ids));
  if (validation == Validation::check) store.validate();
  return store;
}

EmbeddingStore EmbeddingStore::from_vectors(std::size_t dim,
                                            const std::vector<EmbeddingVector>& rows,
                                            std::vector<std::string> ids) {
  std::vector<float> matrix;
  matrix.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    if (r.dim() != dim) {
      throw InvariantError("row of dim " + std::to_string(r.dim()) + " in store of dim " +
                           std::to_string(dim));
    }
    matrix.insert(matrix.end(), r.values.begin(), r.values.end());
  }
  return from_rows(dim, std::move(matrix), std::move(ids));
}

EmbeddingStore EmbeddingStore::adopt(std::size_t dim, std::size_t count, const float* data,
                                     std::shared_ptr<const void> owner,
                                     std::vector<std::string> ids) {
  EmbeddingStore s;
  s.dim_ = dim;
  s.count_ = count;
  s.data_ = data;
  s.owner_ = std::move(owner);
  s.ids_ = std::make_shared<const std::vector<std::string>>(std::move(ids));
  return s;
}

const std::vector<std::string>& EmbeddingStore::ids() const noexcept {
  return ids_ ? *ids_ : empty_ids();
}

void EmbeddingStore::validate() const {
  if (dim_ == 0) throw InvariantError("store dim must be at least 1");
  if (ids().size() != count_) {
    throw InvariantError("store has " + std::to_string(ids().size()) + " ids for " +
                         std::to_string(count_) + " rows");
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(count_);
  for (std::size_t i = 0; i < count_; ++i) {
    if (!seen.insert(ids()[i]).second) {
      throw InvariantError("store id '" + ids()[i] + "' appears more than once");
    }
    const double norm = l2_norm(row(i));
    if (!(std::abs(norm - 1.0) <= kNormTolerance)) {
      throw InvariantError("store row " + std::to_string(i) + " ('" + ids()[i] + "') has norm " +
                           std::to_string(norm));
    }
  }
}

bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
  if (a.dim_ != b.dim_ || a.count_ != b.count_ || a.ids() != b.ids()) return false;
  const std::size_t bytes = a.count_ * a.dim_ * sizeof(float);
  return bytes == 0 || std::memcmp(a.data_, b.data_, bytes) == 0;
}

std::vector<std::uint8_t> serialize_store(const EmbeddingStore& store) {
  store.validate();
  if (store.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvariantError("store dim does not fit in u32");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kStoreHeaderBytes + store.matrix().size_bytes() + store.count() * 16);
  out.insert(out.end(), kStoreMagic, kStoreMagic + 4);
  store_le<std::uint32_t>(out, kStoreVersion);
  store_le<std::uint32_t>(out, static_cast<std::uint32_t>(store.dim()));
  store_le<std::uint64_t>(out, store.count());
  const auto* m = reinterpret_cast<const std::uint8_t*>(store.matrix().data());
  out.insert(out.end(), m, m + store.matrix().size_bytes());
  for (const auto& id : store.ids()) {
    if (id.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw InvariantError("store id longer than 4 GiB");
    }
    store_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out.insert(out.end(), id.begin(), id.end());
  }
  return out;
}

void write_store(const EmbeddingStore& store, const std::filesystem::path& path) {
  const auto bytes = serialize_store(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write store '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw IoError("write failed for store '" + path.string() + "'");
}

EmbeddingStore deserialize_store(std::span<const std::uint8_t> bytes) {
  Layout layout = parse_layout(bytes);
  std::vector<float> matrix(layout.count * layout.dim);
  if (!matrix.empty()) {
    std::memcpy(matrix.data(), bytes.data() + kStoreHeaderBytes, matrix.size() * sizeof(float));
  }
  auto store = EmbeddingStore::from_rows(layout.dim, std::move(matrix), std::move(layout.ids),
                                         Validation::skip);
  check_loaded(store);
  return store;
}

EmbeddingStore read_store(const std::filesystem::path& path, ReadMode mode) {
  auto mapping = std::make_shared<const MappedFile>(path);
  if (mode == ReadMode::copy) return deserialize_store(mapping->bytes());
  Layout layout = parse_layout(mapping->bytes());
  const auto* data = reinterpret_cast<const float*>(mapping->bytes().data() + kStoreHeaderBytes);
  auto store = EmbeddingStore::adopt(layout.dim, layout.count, data, std::move(mapping),
                                     std::move(layout.ids));
  check_loaded(store);
  return store;
}

}  // namespace ndv::embed
