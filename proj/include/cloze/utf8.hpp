#pragma once

#include <string>
#include <string_view>

namespace cloze::utf8 {

// Invalid sequences decode to U+FFFD, one replacement per offending byte.
std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view text);

// Simple one-to-one lowercase mapping covering Latin (Basic, Latin-1,
// Extended-A), Greek and Cyrillic. Other code points map to themselves.
char32_t fold(char32_t c);
std::u32string fold(std::u32string_view text);
std::string fold(std::string_view text);

bool is_space(char32_t c);

// Code point count of a UTF-8 string.
std::size_t length(std::string_view bytes);

}  // namespace cloze::utf8
