#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cloze {

enum class TextKind { Poetry, Prose };

std::string_view to_string(TextKind kind);
TextKind parse_text_kind(std::string_view name);

struct Fragment {
  std::string id;  // content hash of the normalized body
  std::string text;
  TextKind kind = TextKind::Poetry;
  std::string title;
  std::string author;
};

// Offsets are code point positions into Fragment::text, half-open.
struct WordToken {
  std::string fragment_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  int length_chars = 0;
  std::optional<int> length_syllables;  // empty when the word has no vowels

  friend bool operator==(const WordToken&, const WordToken&) = default;
};

class Alphabet {
 public:
  Alphabet(std::set<char32_t> letters, std::set<char32_t> vowels);

  // Russian: а..я and ё in both cases, vowels аеёиоуыэюя.
  static Alphabet cyrillic();
  // English: a..z in both cases, vowels aeiouy.
  static Alphabet latin();
  // Union of the two presets.
  static Alphabet mixed();
  // "cyrillic" | "latin" | "mixed"
  static Alphabet named(std::string_view name);

  bool is_letter(char32_t c) const { return letters_.contains(c); }
  bool is_vowel(char32_t c) const { return vowels_.contains(c); }
  const std::set<char32_t>& letters() const { return letters_; }
  const std::set<char32_t>& vowels() const { return vowels_; }

 private:
  std::set<char32_t> letters_;
  std::set<char32_t> vowels_;
};

enum class LengthUnit { Chars, Syllables };

std::string_view to_string(LengthUnit unit);
LengthUnit parse_length_unit(std::string_view name);

struct LengthDistribution {
  LengthUnit unit = LengthUnit::Chars;
  std::map<int, std::size_t> counts;  // length -> distinct word types
  std::size_t total_types = 0;
};

inline constexpr int kDefaultMinWordLength = 5;

// Maximal runs of alphabet letters at least min_len long, in document order.
std::vector<WordToken> extract_words(std::string_view text, const Alphabet& alphabet,
                                     int min_len = kDefaultMinWordLength,
                                     std::string_view fragment_id = {});

// Throws ZeroSyllables when word has no vowel letters.
int count_syllables(std::string_view word, const Alphabet& alphabet);

// Distinct case-folded surfaces per length. Words without a syllable count
// are skipped on the syllable axis.
LengthDistribution length_distribution(const std::vector<WordToken>& words, LengthUnit unit);

// CRLF to LF, trailing whitespace trimmed from every line and from the ends.
std::string normalize_text(std::string_view text);

// 16 hex digits of FNV-1a 64 over the bytes.
std::string content_hash(std::string_view bytes);

// Front matter is `key: value` lines (title, author, kind) ended by a blank
// line; the rest is the body. Throws MalformedFrontMatter naming `origin`.
Fragment parse_fragment(std::string_view contents, std::string_view origin);
Fragment load_fragment(const std::filesystem::path& path);

}  // namespace cloze
