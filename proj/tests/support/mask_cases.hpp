#pragma once

// Directed masking cases. Entity spans are written inline between ⟦ and ⟧;
// `expected` is the hand-written masked text and `masks` the number of
// "[MASK]" tokens it contains.

#include <string>
#include <string_view>
#include <vector>

#include "ndv/common/utf8.hpp"
#include "ndv/nermask/types.hpp"

namespace oracle {

struct MaskCase {
  const char* marked;
  const char* expected;
  std::size_t masks;
};

inline const std::vector<MaskCase>& mask_cases() {
  static const std::vector<MaskCase> cases = {
      {"⟦John Smith⟧ spoke in ⟦Paris⟧", "[MASK] spoke in [MASK]", 2},
      {"No entities at all.", "No entities at all.", 0},
      {"⟦New York⟧ ⟦City⟧ is large", "[MASK] is large", 1},
      {"⟦Alpha⟧⟦Beta⟧ touching", "[MASK] touching", 1},
      {"⟦Ben⟧ & ⟦Jerry⟧'s", "[MASK] & [MASK]'s", 2},
      {"⟦Paris⟧", "[MASK]", 1},
      {"  ⟦Paris⟧  ", "  [MASK]  ", 1},
      {"⟦Mr⟧.⟦Smith⟧", "[MASK].[MASK]", 2},
      {"⟦Washington⟧,\t⟦D. C.⟧", "[MASK],\t[MASK]", 2},
      {"⟦John⟧\n⟦Smith⟧ left", "[MASK] left", 1},
      {"⟦John⟧\t \n⟦Smith⟧", "[MASK]", 1},
      {"⟦Café Müller⟧ opened", "[MASK] opened", 1},
      {"Visit ⟦Zürich⟧ and ⟦Genève⟧.", "Visit [MASK] and [MASK].", 2},
      {"⟦東京⟧ ⟦大阪⟧ trip", "[MASK] trip", 1},
      {"⟦東京⟧と⟦大阪⟧", "[MASK]と[MASK]", 2},
      {"⟦Alpha⟧\u00A0⟦Beta⟧", "[MASK]", 1},
      {"⟦Alpha⟧\u3000⟦Beta⟧", "[MASK]", 1},
      {"⟦Alpha⟧\u200B⟦Beta⟧", "[MASK]\u200B[MASK]", 2},
      {"⟦Alpha⟧ - ⟦Beta⟧", "[MASK] - [MASK]", 2},
      {"emoji 😀 ⟦Smith⟧ 😀", "emoji 😀 [MASK] 😀", 1},
      {"⟦😀⟧x", "[MASK]x", 1},
      {"The ⟦Senate⟧ and the ⟦House⟧ met ⟦Monday⟧", "The [MASK] and the [MASK] met [MASK]", 3},
      {"⟦Alpha⟧ ⟦Beta⟧ ⟦Gamma⟧ ⟦Delta⟧", "[MASK]", 1},
      {"⟦Alpha⟧ ⟦Beta⟧, ⟦Gamma⟧ ⟦Delta⟧", "[MASK], [MASK]", 2},
      {"x⟦Alpha⟧y", "x[MASK]y", 1},
      {"⟦Roosevelt⟧'s speech", "[MASK]'s speech", 1},
      {"⟦Duluth⟧, ⟦Minn.⟧ (⟦AP⟧) — cold", "[MASK], [MASK] ([MASK]) — cold", 3},
      {"Rep. ⟦Baker⟧ (⟦Dem⟧-⟦Tex⟧)", "Rep. [MASK] ([MASK]-[MASK])", 3},
      {"⟦W.P.B.⟧ said", "[MASK] said", 1},
      {"line one\r\n⟦Smith⟧\r\nline three", "line one\r\n[MASK]\r\nline three", 1},
      {"⟦Alpha⟧\r\n⟦Beta⟧", "[MASK]", 1},
      {"   ", "   ", 0},
      {"", "", 0},
      {"⟦ leading space entity⟧ x", "[MASK] x", 1},
      {"a ⟦bee⟧ c ⟦dee⟧ e ⟦eff⟧ g", "a [MASK] c [MASK] e [MASK] g", 3},
      {"⟦Dr⟧ ⟦Who⟧ ⟦Junior⟧ the rest", "[MASK] the rest", 1},
      {"quote \"⟦Smith⟧\" unquote", "quote \"[MASK]\" unquote", 1},
      {"⟦Smith⟧⟦Jones⟧⟦Brown⟧", "[MASK]", 1},
      {"tab\t⟦Smith⟧\tend", "tab\t[MASK]\tend", 1},
      {"⟦São Paulo⟧ e ⟦Rio⟧", "[MASK] e [MASK]", 2},
      {"⟦Ελλάδα⟧ και ⟦Κύπρος⟧", "[MASK] και [MASK]", 2},
      {"⟦Москва⟧ ⟦Россия⟧", "[MASK]", 1},
      {"a\u2028⟦Bravo⟧\u2029⟦Charlie⟧", "a\u2028[MASK]", 1},
      {"1,200 crowd the ⟦White House⟧ lawn", "1,200 crowd the [MASK] lawn", 1},
      {"⟦Ben & Jerry's⟧ annual ⟦Cone Day⟧ returns", "[MASK] annual [MASK] returns", 2},
      {"⟦Alpha⟧   \t⟦Beta⟧!", "[MASK]!", 1},
      {"⟦Frank Hall⟧ and ⟦Victor Gomez⟧", "[MASK] and [MASK]", 2},
      {"end with entity ⟦Chicago⟧", "end with entity [MASK]", 1},
      {"⟦Chicago⟧ starts", "[MASK] starts", 1},
      {"⟦Alpha⟧.⟦Beta⟧ ⟦Gamma⟧", "[MASK].[MASK]", 2},
  };
  return cases;
}

struct ParsedCase {
  std::string text;
  std::vector<ndv::ner::EntitySpan> spans;
  std::vector<std::string> surfaces;
};

// Strips the ⟦ ⟧ markers, recording scalar offsets of each marked span.
inline ParsedCase parse_marked(std::string_view marked) {
  static constexpr std::string_view open = "⟦", close = "⟧";
  ParsedCase out;
  std::size_t scalars = 0, start = 0, byte_start = 0;
  for (std::size_t i = 0; i < marked.size();) {
    if (marked.substr(i, open.size()) == open) {
      start = scalars;
      byte_start = out.text.size();
      i += open.size();
    } else if (marked.substr(i, close.size()) == close) {
      out.spans.push_back({start, scalars, ndv::ner::EntityClass::MISC});
      out.surfaces.push_back(out.text.substr(byte_start));
      i += close.size();
    } else {
      const std::size_t len = ndv::utf8::sequence_length(marked, i);
      out.text.append(marked.substr(i, len));
      i += len;
      ++scalars;
    }
  }
  return out;
}

// ASCII whitespace, NEL, and the Unicode space separators and line breaks.
inline bool is_space(char32_t cp) {
  if (cp == U' ' || (cp >= U'\t' && cp <= U'\r')) return true;
  if (cp >= 0x2000 && cp <= 0x200A) return true;
  for (char32_t w : {0x85u, 0xA0u, 0x1680u, 0x2028u, 0x2029u, 0x202Fu, 0x205Fu, 0x3000u}) {
    if (cp == w) return true;
  }
  return false;
}

// Reference masking: the gap between two consecutive spans survives unless
// it is empty or pure whitespace, in which case the spans share one mask.
inline std::string reference_mask(const ParsedCase& c) {
  const auto scalars = ndv::utf8::decode(c.text);
  const auto piece = [&](std::size_t a, std::size_t b) {
    return ndv::utf8::encode(std::u32string_view(scalars).substr(a, b - a));
  };
  std::string out;
  std::size_t cursor = 0;
  bool pending = false;
  for (const auto& s : c.spans) {
    const std::string gap = piece(cursor, s.start);
    bool blank = true;
    for (char32_t cp : std::u32string_view(scalars).substr(cursor, s.start - cursor)) {
      blank = blank && is_space(cp);
    }
    if (!(pending && blank)) {
      out += gap;
      out += "[MASK]";
    }
    pending = true;
    cursor = s.end;
  }
  out += piece(cursor, scalars.size());
  return out;
}

inline std::size_t count_masks(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t p = s.find("[MASK]"); p != std::string_view::npos; p = s.find("[MASK]", p + 6)) {
    ++n;
  }
  return n;
}

}  // namespace oracle
