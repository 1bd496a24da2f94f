#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ndv/index/flat_index.hpp"

namespace ndv::eval {

// A human judgement on one (modern query, retrieved historical) pair.
struct TopicAnnotation {
  std::string modern_id;
  std::string historical_id;
  bool on_topic = false;
  std::string topic_name;
};

// Share of annotations judged on topic. Throws EmptyAnnotationError on an
// empty list.
double topic_match_rate(std::span<const TopicAnnotation> annotations);

// One row of the annotation sheet. on_topic stays empty until a human
// fills it in.
struct SheetRow {
  std::string modern_id;
  std::string historical_id;
  std::string modern_headline;
  std::string historical_headline;
  std::optional<bool> on_topic;
  std::string topic_name;
};

inline constexpr std::size_t kDefaultSheetK = 5;

using HeadlineLookup = std::function<std::string(const std::string& id)>;

// One row per (query, hit) for the first k hits of each query, with blank
// judgement columns. Throws BadK for k == 0, ShapeError when the id and hit
// lists differ in length.
std::vector<SheetRow> build_annotation_sheet(std::span<const std::string> query_ids,
                                             std::span<const std::vector<index::SearchHit>> hits,
                                             std::size_t k = kDefaultSheetK,
                                             const HeadlineLookup& headline = {});

// Sheet columns, in file order. Fields are quoted per RFC 4180 as needed.
inline constexpr std::array<std::string_view, 6> kSheetColumns = {
    "modern_id", "historical_id", "modern_headline", "historical_headline", "on_topic",
    "topic_name"};

void write_sheet_csv(std::ostream& out, std::span<const SheetRow> rows);

// Reads a sheet written by write_sheet_csv (columns located by header name).
// The headline and topic_name columns are optional. on_topic accepts
// true/false, yes/no, 1/0 in any case, or blank.
std::vector<SheetRow> read_sheet_csv(std::istream& in);

// build_annotation_sheet + write_sheet_csv into a file; returns the row count.
std::size_t export_annotation_sheet(const std::string& path, std::span<const std::string> query_ids,
                                    std::span<const std::vector<index::SearchHit>> hits,
                                    std::size_t k = kDefaultSheetK,
                                    const HeadlineLookup& headline = {});

// Judged rows only; rows with a blank on_topic are skipped.
std::vector<TopicAnnotation> annotations_from_sheet(std::span<const SheetRow> rows);

// Minimal RFC 4180 reader/writer used for the sheet.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);
std::string csv_escape(std::string_view field);

}  // namespace ndv::eval
