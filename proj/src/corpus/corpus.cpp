#include "ndv/corpus/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <unordered_set>

#include "ndv/common/error.hpp"

namespace ndv::corpus {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

int parse_year(std::string_view token, std::string_view spec) {
  token = trim(token);
  int year = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, year);
  if (token.empty() || ec != std::errc{} || ptr != end) {
    throw SpecParseError("malformed year '" + std::string(token) + "' in corpus spec '" +
                         std::string(spec) + "'");
  }
  return year;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  while (true) {
    const auto pos = s.find(sep, begin);
    parts.push_back(s.substr(begin, pos == std::string_view::npos ? pos : pos - begin));
    if (pos == std::string_view::npos) break;
    begin = pos + 1;
  }
  return parts;
}

const std::string& required_string(const nlohmann::json& raw, const char* key) {
  const auto it = raw.find(key);
  if (it == raw.end() || it->is_null()) {
    throw MissingField(std::string("record is missing '") + key + "'");
  }
  if (!it->is_string()) {
    throw MissingField(std::string("record field '") + key + "' is not a string");
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

std::filesystem::path DatasetManifest::resolve(const ManifestFile& file) const {
  std::filesystem::path p(file.path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

bool CorpusSpec::matches(const ManifestFile& file) const {
  if (!years.empty() && !years.contains(file.year)) return false;
  if (states.empty()) return true;
  const std::string state = lower(file.state);
  return std::any_of(states.begin(), states.end(),
                     [&](const std::string& s) { return lower(s) == state; });
}

CorpusSpec parse_corpus_spec(std::string_view spec) {
  const auto fields = split(spec, ':');
  if (fields.size() > 3) {
    throw SpecParseError("too many ':'-separated fields in corpus spec '" + std::string(spec) + "'");
  }
  CorpusSpec out;
  out.dataset = std::string(trim(fields[0]));
  if (out.dataset.empty()) throw SpecParseError("corpus spec has an empty dataset name");

  if (fields.size() > 1 && !trim(fields[1]).empty()) {
    const std::string_view years = trim(fields[1]);
    // A '-' after the first character separates a range.
    const auto dash = years.find('-', 1);
    if (dash == std::string_view::npos) {
      out.years.insert(parse_year(years, spec));
    } else {
      const int first = parse_year(years.substr(0, dash), spec);
      const int last = parse_year(years.substr(dash + 1), spec);
      if (first > last) {
        throw SpecParseError("empty year range '" + std::string(years) + "' in corpus spec");
      }
      for (int y = first; y <= last; ++y) out.years.insert(y);
    }
  }
  if (fields.size() > 2) {
    for (auto state : split(fields[2], ',')) {
      state = trim(state);
      if (!state.empty()) out.states.emplace(state);
    }
  }
  return out;
}

DatasetManifest parse_manifest(const nlohmann::json& doc, std::filesystem::path base_dir) {
  if (!doc.is_object()) throw ManifestError("manifest must be a JSON object");
  DatasetManifest manifest;
  manifest.base_dir = std::move(base_dir);

  const auto version = doc.find("schema_version");
  if (version == doc.end() || !version->is_number_integer()) {
    throw ManifestError("manifest is missing integer 'schema_version'");
  }
  manifest.schema_version = version->get<int>();
  if (manifest.schema_version != kManifestSchemaVersion) {
    throw ManifestVersionError("unsupported manifest schema_version " +
                               std::to_string(manifest.schema_version) + " (expected " +
                               std::to_string(kManifestSchemaVersion) + ")");
  }
  const auto name = doc.find("dataset_name");
  if (name == doc.end() || !name->is_string()) {
    throw ManifestError("manifest is missing string 'dataset_name'");
  }
  manifest.dataset_name = name->get<std::string>();

  const auto files = doc.find("files");
  if (files == doc.end() || !files->is_array()) {
    throw ManifestError("manifest is missing array 'files'");
  }
  std::unordered_set<std::string> seen;
  for (const auto& entry : *files) {
    if (!entry.is_object() || !entry.contains("path") || !entry["path"].is_string() ||
        !entry.contains("state") || !entry["state"].is_string() || !entry.contains("year") ||
        !entry["year"].is_number_integer()) {
      throw ManifestError("manifest file entries need string 'path', string 'state', integer 'year'");
    }
    ManifestFile file{entry["path"].get<std::string>(), entry["state"].get<std::string>(),
                      entry["year"].get<int>()};
    if (file.year < kMinYear || file.year > kMaxYear) {
      throw ManifestError("manifest year " + std::to_string(file.year) + " for '" + file.path +
                          "' outside [1500, 2100]");
    }
    const auto key = std::filesystem::path(file.path).lexically_normal().string();
    if (!seen.insert(key).second) {
      throw ManifestError("manifest lists path '" + file.path + "' more than once");
    }
    manifest.files.push_back(std::move(file));
  }
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_manifest(doc, path.parent_path());
}

bool is_valid_iso_date(std::string_view date) noexcept {
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (!std::isdigit(static_cast<unsigned char>(date[i]))) return false;
  }
  const auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    std::from_chars(date.data() + pos, date.data() + pos + len, v);
    return v;
  };
  const std::chrono::year_month_day ymd{std::chrono::year{num(0, 4)},
                                        std::chrono::month{unsigned(num(5, 2))},
                                        std::chrono::day{unsigned(num(8, 2))}};
  return ymd.ok();
}

Article validate_article(const nlohmann::json& raw) {
  if (!raw.is_object()) throw MissingField("record is not a JSON object");
  Article a;
  a.id = required_string(raw, "id");
  if (a.id.empty()) throw MissingField("record has an empty 'id'");
  a.text = required_string(raw, "text");
  if (trim(a.text).empty()) throw EmptyText("article '" + a.id + "' has empty text");
  a.source = required_string(raw, "source");
  a.date = required_string(raw, "date");
  if (!is_valid_iso_date(a.date)) {
    throw BadDate("article '" + a.id + "' has invalid date '" + a.date + "'");
  }
  const auto headline = raw.find("headline");
  if (headline != raw.end() && headline->is_string()) a.headline = headline->get<std::string>();
  return a;
}

nlohmann::json to_json(const Article& article) {
  nlohmann::json j = {{"id", article.id},
                      {"source", article.source},
                      {"date", article.date},
                      {"text", article.text}};
  if (article.headline) j["headline"] = *article.headline;
  return j;
}

JsonlArticleReader::JsonlArticleReader(std::filesystem::path path)
    : path_(std::move(path)), in_(path_) {
  if (!in_) throw IoError("cannot open corpus file '" + path_.string() + "'");
}

std::optional<Article> JsonlArticleReader::next() {
  if (finished_) return std::nullopt;
  std::string line;
  while (std::getline(in_, line)) {
    if (trim(line).empty()) continue;
    ++lines_;
    try {
      return validate_article(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception&) {
      ++invalid_;
    } catch (const RecordError&) {
      ++invalid_;
    }
  }
  if (in_.bad()) throw IoError("read error on corpus file '" + path_.string() + "'");
  finished_ = true;
  if (lines_ > 0 && double(invalid_) > kCorruptFileThreshold * double(lines_)) {
    throw CorruptFileError("corpus file '" + path_.string() + "' has " + std::to_string(invalid_) +
                           " invalid lines out of " + std::to_string(lines_));
  }
  return std::nullopt;
}

ArticleStream::ArticleStream(DatasetManifest manifest, CorpusSpec spec)
    : manifest_(std::move(manifest)), spec_(std::move(spec)) {}

bool ArticleStream::open_next_file() {
  while (file_index_ < manifest_.files.size()) {
    const auto& file = manifest_.files[file_index_++];
    if (!spec_.matches(file)) continue;
    reader_ = std::make_unique<JsonlArticleReader>(manifest_.resolve(file));
    ++stats_.files_matched;
    return true;
  }
  return false;
}

std::optional<Article> ArticleStream::next() {
  while (true) {
    if (!reader_ && !open_next_file()) return std::nullopt;
    const std::size_t lines_before = reader_->lines();
    const std::size_t invalid_before = reader_->invalid();
    auto article = reader_->next();
    stats_.lines += reader_->lines() - lines_before;
    stats_.invalid += reader_->invalid() - invalid_before;
    if (article) {
      ++stats_.valid;
      return article;
    }
    reader_.reset();
  }
}

std::vector<Article> read_articles(const std::filesystem::path& path, std::size_t* invalid_lines) {
  JsonlArticleReader reader(path);
  std::vector<Article> out;
  while (auto a = reader.next()) out.push_back(std::move(*a));
  if (invalid_lines) *invalid_lines = reader.invalid();
  return out;
}

void write_articles(const std::filesystem::path& path, const std::vector<Article>& articles) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& a : articles) out << to_json(a).dump() << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace ndv::corpus
