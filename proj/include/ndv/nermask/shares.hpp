#pragma once

#include <array>
#include <span>
#include <vector>

#include "ndv/nermask/types.hpp"

namespace ndv::ner {

struct YearShares {
  int year = 0;
  std::size_t tokens = 0;
  std::array<double, 4> share{};  // indexed by EntityClass

  double operator[](EntityClass c) const noexcept { return share[std::size_t(c)]; }
};

// Per-year share of whitespace tokens that fall inside an entity of each
// class. A whitespace token counts toward the class of the first entity span
// it overlaps. Years with no tokens are omitted; rows are sorted by year.
// Throws BadDate when an article's date has no leading year.
std::vector<YearShares> entity_type_shares(std::span<const AnnotatedArticle> articles);

}  // namespace ndv::ner
