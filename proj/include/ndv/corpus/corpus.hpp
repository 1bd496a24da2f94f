#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ndv::corpus {

// One news text. Used for corpus rows and query articles alike.
struct Article {
  std::string id;
  std::string source;
  std::string date;  // ISO-8601 calendar date, YYYY-MM-DD
  std::string text;
  std::optional<std::string> headline;

  friend bool operator==(const Article&, const Article&) = default;
};

struct ManifestFile {
  std::string path;  // as written in the manifest
  std::string state;
  int year = 0;
};

struct DatasetManifest {
  std::string dataset_name;
  std::vector<ManifestFile> files;
  int schema_version = 1;
  // Directory relative paths are resolved against.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestFile& file) const;
};

// Parsed form of "dataset[:year-or-range[:state[,state...]]]".
// An empty years/states set means "all".
struct CorpusSpec {
  std::string dataset;
  std::set<int> years;
  std::set<std::string> states;

  bool matches(const ManifestFile& file) const;
  friend bool operator==(const CorpusSpec&, const CorpusSpec&) = default;
};

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr int kMinYear = 1500;
inline constexpr int kMaxYear = 2100;

CorpusSpec parse_corpus_spec(std::string_view spec);

DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(const nlohmann::json& doc, std::filesystem::path base_dir = {});

bool is_valid_iso_date(std::string_view date) noexcept;

// Checks a raw JSONL record and projects it onto Article. Unknown keys are
// ignored.
Article validate_article(const nlohmann::json& raw);
nlohmann::json to_json(const Article& article);

struct StreamStats {
  std::size_t files_matched = 0;
  std::size_t lines = 0;
  std::size_t valid = 0;
  std::size_t invalid = 0;
};

// A file whose share of invalid lines exceeds this is rejected.
inline constexpr double kCorruptFileThreshold = 0.5;

// Reads one JSONL file of articles. Invalid lines are skipped and counted;
// CorruptFileError is raised at end of file when more than half were bad.
class JsonlArticleReader {
 public:
  explicit JsonlArticleReader(std::filesystem::path path);

  std::optional<Article> next();

  std::size_t lines() const noexcept { return lines_; }
  std::size_t invalid() const noexcept { return invalid_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t lines_ = 0;
  std::size_t invalid_ = 0;
  bool finished_ = false;
};

// Streams every valid article from the manifest files that satisfy `spec`,
// in manifest order then line order. Single consumer.
class ArticleStream {
 public:
  ArticleStream(DatasetManifest manifest, CorpusSpec spec);

  std::optional<Article> next();
  const StreamStats& stats() const noexcept { return stats_; }

 private:
  bool open_next_file();

  DatasetManifest manifest_;
  CorpusSpec spec_;
  std::size_t file_index_ = 0;
  std::unique_ptr<JsonlArticleReader> reader_;
  StreamStats stats_;
};

inline ArticleStream stream_articles(DatasetManifest manifest, CorpusSpec spec) {
  return ArticleStream(std::move(manifest), std::move(spec));
}

// Whole-file convenience over JsonlArticleReader.
std::vector<Article> read_articles(const std::filesystem::path& path,
                                   std::size_t* invalid_lines = nullptr);
void write_articles(const std::filesystem::path& path, const std::vector<Article>& articles);

}  // namespace ndv::corpus
