#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Offsets throughout the library are Unicode scalar-value indices. These
// helpers translate between scalar indices and UTF-8 byte offsets. Malformed
// sequences are counted one byte per unit so offsets stay total.
namespace ndv::utf8 {

// Byte length of the sequence starting at `lead`, 1 for malformed input.
std::size_t sequence_length(std::string_view text, std::size_t pos) noexcept;

// Byte offset of every scalar value, plus text.size() as the final entry.
// Result size is scalar_length(text) + 1.
std::vector<std::size_t> scalar_offsets(std::string_view text);

std::size_t scalar_length(std::string_view text) noexcept;

// Decode the scalar at byte `pos`; malformed bytes decode to U+FFFD.
char32_t decode_at(std::string_view text, std::size_t pos) noexcept;

std::u32string decode(std::string_view text);
std::string encode(std::u32string_view scalars);
void append(std::string& out, char32_t cp);

// Scalars [start, end) of text. Clamped to the text length.
std::string substr(std::string_view text, std::size_t start, std::size_t end);

// Leading `count` scalars.
std::string prefix(std::string_view text, std::size_t count);

// ASCII whitespace plus the Unicode space separators and line breaks.
bool is_whitespace(char32_t cp) noexcept;

}  // namespace ndv::utf8
