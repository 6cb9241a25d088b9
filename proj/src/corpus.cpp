#include "cloze/corpus.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "cloze/error.hpp"
#include "cloze/utf8.hpp"

namespace cloze {

std::string_view to_string(TextKind kind) { return kind == TextKind::Poetry ? "poetry" : "prose"; }

TextKind parse_text_kind(std::string_view name) {
  if (name == "poetry") return TextKind::Poetry;
  if (name == "prose") return TextKind::Prose;
  throw Error(ErrorCode::InvalidArgument, "unknown text kind '" + std::string(name) + "'");
}

std::string_view to_string(LengthUnit unit) { return unit == LengthUnit::Chars ? "chars" : "syllables"; }

LengthUnit parse_length_unit(std::string_view name) {
  if (name == "chars") return LengthUnit::Chars;
  if (name == "syllables") return LengthUnit::Syllables;
  throw Error(ErrorCode::InvalidArgument, "unknown length unit '" + std::string(name) + "'");
}

Alphabet::Alphabet(std::set<char32_t> letters, std::set<char32_t> vowels)
    : letters_(std::move(letters)), vowels_(std::move(vowels)) {
  if (letters_.empty() || vowels_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "alphabet letters and vowels must be non-empty");
  }
  for (char32_t v : vowels_) {
    if (!letters_.contains(v)) throw Error(ErrorCode::InvalidArgument, "alphabet vowel is not a letter");
  }
}

namespace {

void add_with_upper(std::set<char32_t>& set, std::u32string_view lower) {
  for (char32_t c : lower) {
    set.insert(c);
    if (c >= U'a' && c <= U'z') set.insert(c - 0x20);
    else if (c >= U'а' && c <= U'я') set.insert(c - 0x20);
    else if (c == U'ё') set.insert(U'Ё');
  }
}

}  // namespace

Alphabet Alphabet::cyrillic() {
  std::set<char32_t> letters, vowels;
  std::u32string lower;
  for (char32_t c = U'а'; c <= U'я'; ++c) lower.push_back(c);
  lower.push_back(U'ё');
  add_with_upper(letters, lower);
  add_with_upper(vowels, U"аеёиоуыэюя");
  return Alphabet(std::move(letters), std::move(vowels));
}

Alphabet Alphabet::latin() {
  std::set<char32_t> letters, vowels;
  std::u32string lower;
  for (char32_t c = U'a'; c <= U'z'; ++c) lower.push_back(c);
  add_with_upper(letters, lower);
  add_with_upper(vowels, U"aeiouy");
  return Alphabet(std::move(letters), std::move(vowels));
}

Alphabet Alphabet::mixed() {
  auto cyr = cyrillic();
  auto lat = latin();
  auto letters = cyr.letters();
  letters.insert(lat.letters().begin(), lat.letters().end());
  auto vowels = cyr.vowels();
  vowels.insert(lat.vowels().begin(), lat.vowels().end());
  return Alphabet(std::move(letters), std::move(vowels));
}

Alphabet Alphabet::named(std::string_view name) {
  if (name == "cyrillic") return cyrillic();
  if (name == "latin") return latin();
  if (name == "mixed") return mixed();
  throw Error(ErrorCode::InvalidArgument, "unknown alphabet '" + std::string(name) + "'");
}

std::vector<WordToken> extract_words(std::string_view text, const Alphabet& alphabet, int min_len,
                                     std::string_view fragment_id) {
  if (min_len < 1) throw Error(ErrorCode::InvalidArgument, "min_len must be at least 1");
  const std::u32string cps = utf8::decode(text);
  std::vector<WordToken> out;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!alphabet.is_letter(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    int vowels = 0;
    while (j < cps.size() && alphabet.is_letter(cps[j])) {
      if (alphabet.is_vowel(cps[j])) ++vowels;
      ++j;
    }
    if (static_cast<int>(j - i) >= min_len) {
      WordToken tok;
      tok.fragment_id = std::string(fragment_id);
      tok.start = i;
      tok.end = j;
      tok.surface = utf8::encode(std::u32string_view(cps).substr(i, j - i));
      tok.length_chars = static_cast<int>(j - i);
      if (vowels > 0) tok.length_syllables = vowels;
      out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

int count_syllables(std::string_view word, const Alphabet& alphabet) {
  int count = 0;
  for (char32_t c : utf8::decode(word)) {
    if (alphabet.is_vowel(c)) ++count;
  }
  if (count == 0) throw Error(ErrorCode::ZeroSyllables, "'" + std::string(word) + "' has no vowels");
  return count;
}

LengthDistribution length_distribution(const std::vector<WordToken>& words, LengthUnit unit) {
  std::map<int, std::set<std::string>> types;
  for (const auto& w : words) {
    std::optional<int> len;
    if (unit == LengthUnit::Chars) {
      len = w.length_chars;
    } else {
      len = w.length_syllables;
    }
    if (!len || *len < 1) continue;
    types[*len].insert(utf8::fold(w.surface));
  }
  LengthDistribution dist;
  dist.unit = unit;
  for (const auto& [len, set] : types) {
    dist.counts[len] = set.size();
    dist.total_types += set.size();
  }
  return dist;
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::string line;
  auto flush_line = [&](bool newline) {
    auto end = line.find_last_not_of(" \t\r");
    line.erase(end == std::string::npos ? 0 : end + 1);
    out += line;
    if (newline) out.push_back('\n');
    line.clear();
  };
  for (char c : text) {
    if (c == '\n') {
      flush_line(true);
    } else {
      line.push_back(c);
    }
  }
  flush_line(false);
  const auto first = out.find_first_not_of(" \t\n");
  if (first == std::string::npos) return {};
  const auto last = out.find_last_not_of(" \t\n");
  return out.substr(first, last - first + 1);
}

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

Fragment parse_fragment(std::string_view contents, std::string_view origin) {
  auto fail = [&](const std::string& what) -> Error {
    return Error(ErrorCode::MalformedFrontMatter, std::string(origin) + ": " + what);
  };
  std::map<std::string, std::string> header;
  std::size_t pos = 0;
  bool terminated = false;
  while (pos < contents.size()) {
    auto eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string line(contents.substr(pos, eol - pos));
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      terminated = true;
      break;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw fail("expected 'key: value' header line, got '" + line + "'");
    auto key = line.substr(0, colon);
    auto value = line.substr(colon + 1);
    auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(value);
    header[key] = value;
  }
  if (!terminated) throw fail("front matter is not followed by a blank line");
  for (const char* key : {"title", "author", "kind"}) {
    if (!header.contains(key)) throw fail(std::string("missing '") + key + ":' line");
  }
  Fragment f;
  f.title = header["title"];
  f.author = header["author"];
  try {
    f.kind = parse_text_kind(header["kind"]);
  } catch (const Error&) {
    throw fail("kind must be 'poetry' or 'prose', got '" + header["kind"] + "'");
  }
  f.text = normalize_text(pos < contents.size() ? contents.substr(pos) : std::string_view{});
  if (f.text.empty()) throw fail("empty body");
  f.id = content_hash(f.text);
  return f;
}

Fragment load_fragment(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_fragment(ss.str(), path.string());
}

}  // namespace cloze
