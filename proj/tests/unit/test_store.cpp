#include <doctest.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

#include "ndv/common/error.hpp"
#include "ndv/embed/store.hpp"
#include "oracles.hpp"

using namespace ndv;
using namespace ndv::embed;

namespace {

const std::string kData = NDV_TEST_DATA;

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(b.data()),
                                           std::streamsize(b.size()));
}

EmbeddingStore golden() {
  return EmbeddingStore::from_rows(4, {1, 0, 0, 0, 0, 0.6f, 0.8f, 0, 0.5f, 0.5f, 0.5f, 0.5f},
                                   {"a", "bb", "ccc"});
}

}  // namespace

TEST_CASE("golden store reads and re-serializes bit-exactly") {
  for (auto mode : {ReadMode::map, ReadMode::copy}) {
    const auto s = read_store(kData + "/golden_3x4.ndjv", mode);
    CHECK(s.dim() == 4);
    CHECK(s.count() == 3);
    CHECK(s.ids() == std::vector<std::string>{"a", "bb", "ccc"});
    CHECK(s == golden());
    CHECK(serialize_store(s) == file_bytes(kData + "/golden_3x4.ndjv"));
  }
}

TEST_CASE("format errors") {
  CHECK_THROWS_AS(read_store(kData + "/golden_3x4_bad_magic.ndjv"), FormatError);
  CHECK_THROWS_AS(read_store(kData + "/golden_3x4_truncated.ndjv"), FormatError);
  CHECK_THROWS_AS(read_store(kData + "/does_not_exist.ndjv"), IoError);

  oracle::TempDir dir("store");
  auto bytes = file_bytes(kData + "/golden_3x4.ndjv");

  auto v = bytes;
  v[4] = 2;  // version
  put_bytes(dir / "version.ndjv", v);
  CHECK_THROWS_AS(read_store(dir / "version.ndjv"), FormatError);

  v = bytes;
  v.push_back(0);
  put_bytes(dir / "trailing.ndjv", v);
  CHECK_THROWS_AS(read_store(dir / "trailing.ndjv"), FormatError);

  for (std::size_t cut : {std::size_t(0), std::size_t(3), std::size_t(19), bytes.size() - 1}) {
    v.assign(bytes.begin(), bytes.begin() + std::ptrdiff_t(cut));
    put_bytes(dir / "cut.ndjv", v);
    CAPTURE(cut);
    CHECK_THROWS_AS(read_store(dir / "cut.ndjv"), FormatError);
  }

  // Row 0 scaled to norm 0.5.
  v = bytes;
  const float half = 0.5f;
  std::memcpy(v.data() + 20, &half, 4);
  put_bytes(dir / "norm.ndjv", v);
  CHECK_THROWS_AS(read_store(dir / "norm.ndjv"), CorruptStoreError);
  CHECK_THROWS_AS(read_store(dir / "norm.ndjv", ReadMode::copy), CorruptStoreError);

  // Duplicate ids written without validation.
  const auto dup = EmbeddingStore::from_rows(4, {1, 0, 0, 0, 0, 1, 0, 0}, {"x", "x"},
                                             Validation::skip);
  CHECK_THROWS_AS(write_store(dup, dir / "dup.ndjv"), InvariantError);
  // Patch the last id byte so both ids read "x".
  v = serialize_store(EmbeddingStore::from_rows(4, {1, 0, 0, 0, 0, 1, 0, 0}, {"x", "y"}));
  v.back() = 'x';
  put_bytes(dir / "dup.ndjv", v);
  CHECK_THROWS_AS(read_store(dir / "dup.ndjv"), CorruptStoreError);
}

TEST_CASE("write validates norms") {
  oracle::TempDir dir("store-w");
  CHECK_THROWS_AS(EmbeddingStore::from_rows(2, {0.5f, 0}, {"a"}), InvariantError);
  const auto bad = EmbeddingStore::from_rows(2, {0.5f, 0}, {"a"}, Validation::skip);
  CHECK_THROWS_AS(write_store(bad, dir / "bad.ndjv"), InvariantError);
  CHECK_FALSE(std::filesystem::exists(dir / "bad.ndjv"));
  CHECK_THROWS_AS(EmbeddingStore::from_rows(2, {1, 0, 0}, {"a"}), InvariantError);
  CHECK_THROWS_AS(EmbeddingStore::from_rows(0, {}, {}), InvariantError);
}

TEST_CASE("random round-trips") {
  std::mt19937 rng(11);
  oracle::TempDir dir("store-rt");
  for (int iter = 0; iter < 20; ++iter) {
    const std::size_t dim = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 60)(rng);
    auto ids = oracle::numbered_ids("id-é-", n);
    const auto s = EmbeddingStore::from_rows(dim, oracle::unit_rows(rng, n, dim), ids);
    write_store(s, dir / "rt.ndjv");
    const auto back = read_store(dir / "rt.ndjv");
    CHECK(back == s);
    CHECK(back.dim() == dim);
    CHECK(std::memcmp(back.matrix().data(), s.matrix().data(), n * dim * sizeof(float)) == 0);
    CHECK(deserialize_store(serialize_store(s)) == s);
  }
}

TEST_CASE("empty store") {
  oracle::TempDir dir("store-e");
  const auto s = EmbeddingStore::from_rows(8, {}, {});
  CHECK(s.empty());
  write_store(s, dir / "e.ndjv");
  const auto back = read_store(dir / "e.ndjv");
  CHECK(back.count() == 0);
  CHECK(back.dim() == 8);
}

TEST_CASE("mapped stores outlive their reader") {
  oracle::TempDir dir("store-m");
  write_store(golden(), dir / "g.ndjv");
  EmbeddingStore copy;
  {
    const auto mapped = read_store(dir / "g.ndjv");
    copy = mapped;
  }
  CHECK(copy == golden());
  CHECK(copy.row(1)[2] == 0.8f);
}
