#include "ndv/nermask/shares.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "ndv/common/error.hpp"
#include "ndv/common/utf8.hpp"
#include "ndv/nermask/bio.hpp"

namespace ndv::ner {

namespace {

int year_of(const corpus::Article& a) {
  int year = 0;
  const auto& d = a.date;
  auto [ptr, ec] = std::from_chars(d.data(), d.data() + std::min<std::size_t>(d.size(), 4), year);
  if (ec != std::errc{} || ptr != d.data() + 4) {
    throw BadDate("article '" + a.id + "' has no parseable year in date '" + d + "'");
  }
  return year;
}

struct Tally {
  std::size_t tokens = 0;
  std::array<std::size_t, 4> entity{};
};

}  // namespace

std::vector<YearShares> entity_type_shares(std::span<const AnnotatedArticle> articles) {
  std::map<int, Tally> by_year;
  for (const auto& a : articles) {
    const int year = year_of(a.article);
    const auto spans = decode_bio(a.annotations);
    const std::u32string text = utf8::decode(a.article.text);
    Tally& tally = by_year[year];

    std::size_t i = 0;
    std::size_t next_span = 0;
    while (i < text.size()) {
      if (utf8::is_whitespace(text[i])) {
        ++i;
        continue;
      }
      std::size_t end = i;
      while (end < text.size() && !utf8::is_whitespace(text[end])) ++end;
      ++tally.tokens;
      while (next_span < spans.size() && spans[next_span].end <= i) ++next_span;
      if (next_span < spans.size() && spans[next_span].start < end) {
        ++tally.entity[std::size_t(spans[next_span].cls)];
      }
      i = end;
    }
  }

  std::vector<YearShares> rows;
  for (const auto& [year, tally] : by_year) {
    if (tally.tokens == 0) continue;
    YearShares row{year, tally.tokens, {}};
    for (std::size_t c = 0; c < 4; ++c) row.share[c] = double(tally.entity[c]) / double(tally.tokens);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ndv::ner
