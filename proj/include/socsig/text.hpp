#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace socsig::text {

// Decodes UTF-8 into Unicode scalar values. A stray or invalid lead byte, a
// sequence cut short, and a complete sequence encoding an overlong form, a
// surrogate or a value above U+10FFFF each decode to one U+FFFD.
std::u32string decode_utf8(std::string_view in);
std::string encode_utf8(std::u32string_view in);

// Simple (one-to-one) lowercase mapping for Basic Latin, Latin-1, Latin
// Extended-A, Greek and Cyrillic. Other scalars are returned unchanged.
char32_t to_lower(char32_t c);

// Punctuation set used by transcript normalization: ASCII punctuation and
// symbols, plus the Unicode punctuation blocks listed in text.cpp.
bool is_punctuation(char32_t c);

bool is_space(char32_t c);

std::string trim(std::string_view s);

std::vector<std::string_view> split_lines(std::string_view s);

}  // namespace socsig::text
