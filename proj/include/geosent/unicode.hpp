#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace geosent::unicode {

// Decodes UTF-8; ill-formed sequences become U+FFFD.
std::vector<char32_t> decode(std::string_view utf8);
std::string encode(char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

std::size_t codepoint_count(std::string_view utf8);

std::string nfc(std::string_view utf8);

// NFC normalization followed by full case folding (re-normalized to NFC).
std::string fold(std::string_view utf8);

bool is_whitespace(char32_t cp);
// Letters and combining marks. Emoji components (FE0F, keycap) are not
// letters even though some are marks.
bool is_letter(char32_t cp);
// Letters, marks, decimal digits and connector punctuation ("\w").
bool is_word(char32_t cp);
// Extended_Pictographic, excluding ASCII.
bool is_emoji(char32_t cp);
// Variation selectors, ZWJ, skin-tone modifiers, keycap and tag characters.
bool is_emoji_component(char32_t cp);

std::string trim(std::string_view s);

}  // namespace geosent::unicode
