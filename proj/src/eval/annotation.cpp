#include "ndv/eval/annotation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "ndv/common/error.hpp"

namespace ndv::eval {

double topic_match_rate(std::span<const TopicAnnotation> annotations) {
  if (annotations.empty()) throw EmptyAnnotationError("no topic annotations to rate");
  const auto on = std::count_if(annotations.begin(), annotations.end(),
                                [](const TopicAnnotation& a) { return a.on_topic; });
  return double(on) / double(annotations.size());
}

std::vector<SheetRow> build_annotation_sheet(std::span<const std::string> query_ids,
                                             std::span<const std::vector<index::SearchHit>> hits,
                                             std::size_t k, const HeadlineLookup& headline) {
  if (k == 0) throw BadK("annotation sheet k must be at least 1");
  if (query_ids.size() != hits.size()) {
    throw ShapeError(std::to_string(query_ids.size()) + " query ids for " +
                     std::to_string(hits.size()) + " hit lists");
  }
  std::vector<SheetRow> rows;
  for (std::size_t q = 0; q < hits.size(); ++q) {
    const std::size_t n = std::min(k, hits[q].size());
    for (std::size_t r = 0; r < n; ++r) {
      SheetRow row;
      row.modern_id = query_ids[q];
      row.historical_id = hits[q][r].id;
      if (headline) {
        row.modern_headline = headline(row.modern_id);
        row.historical_headline = headline(row.historical_id);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;  // current record has content
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          record.push_back(std::move(field));
          records.push_back(std::move(record));
        }
        field.clear();
        record.clear();
        any = false;
        break;
      default:
        field.push_back(c);
        any = true;
    }
  }
  if (quoted) throw FormatError("CSV ends inside a quoted field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

void write_sheet_csv(std::ostream& out, std::span<const SheetRow> rows) {
  for (std::size_t i = 0; i < kSheetColumns.size(); ++i) {
    out << (i ? "," : "") << kSheetColumns[i];
  }
  out << '\n';
  for (const auto& r : rows) {
    out << csv_escape(r.modern_id) << ',' << csv_escape(r.historical_id) << ','
        << csv_escape(r.modern_headline) << ',' << csv_escape(r.historical_headline) << ','
        << (r.on_topic ? (*r.on_topic ? "true" : "false") : "") << ','
        << csv_escape(r.topic_name) << '\n';
  }
}

std::vector<SheetRow> read_sheet_csv(std::istream& in) {
  const auto records = parse_csv(in);
  if (records.empty()) throw FormatError("annotation sheet has no header");
  // Headline and topic columns may be absent; the rest are required.
  constexpr std::array<bool, kSheetColumns.size()> required = {true, true, false, false, true, false};
  constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
  std::array<std::size_t, kSheetColumns.size()> col{};
  for (std::size_t c = 0; c < kSheetColumns.size(); ++c) {
    const auto& header = records.front();
    const auto it = std::find(header.begin(), header.end(), kSheetColumns[c]);
    if (it == header.end() && required[c]) {
      throw FormatError("annotation sheet lacks column '" + std::string(kSheetColumns[c]) + "'");
    }
    col[c] = it == header.end() ? kAbsent : std::size_t(it - header.begin());
  }
  std::vector<SheetRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    const auto get = [&](std::size_t c) -> std::string {
      return col[c] < rec.size() ? rec[col[c]] : std::string();
    };
    SheetRow row{get(0), get(1), get(2), get(3), std::nullopt, get(5)};
    std::string judged = get(4);
    std::transform(judged.begin(), judged.end(), judged.begin(),
                   [](unsigned char ch) { return char(std::tolower(ch)); });
    judged.erase(std::remove_if(judged.begin(), judged.end(),
                                [](unsigned char ch) { return std::isspace(ch); }),
                 judged.end());
    if (judged == "true" || judged == "yes" || judged == "1") {
      row.on_topic = true;
    } else if (judged == "false" || judged == "no" || judged == "0") {
      row.on_topic = false;
    } else if (!judged.empty()) {
      throw FormatError("annotation sheet row " + std::to_string(i) + " has on_topic '" +
                        get(4) + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t export_annotation_sheet(const std::string& path, std::span<const std::string> query_ids,
                                    std::span<const std::vector<index::SearchHit>> hits,
                                    std::size_t k, const HeadlineLookup& headline) {
  const auto rows = build_annotation_sheet(query_ids, hits, k, headline);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write annotation sheet '" + path + "'");
  write_sheet_csv(out, rows);
  if (!out) throw IoError("write failed for annotation sheet '" + path + "'");
  return rows.size();
}

std::vector<TopicAnnotation> annotations_from_sheet(std::span<const SheetRow> rows) {
  std::vector<TopicAnnotation> out;
  for (const auto& r : rows) {
    if (r.on_topic) out.push_back({r.modern_id, r.historical_id, *r.on_topic, r.topic_name});
  }
  return out;
}

}  // namespace ndv::eval
