#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include <unistd.h>
#include <string>
#include <vector>

#include "cloze/corpus.hpp"
#include "cloze/rng.hpp"
#include "cloze/utf8.hpp"

namespace cloze::testing {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cloze-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Random Cyrillic word of exactly `length` letters with at least one vowel.
inline std::string random_word(Rng& rng, int length) {
  static const std::u32string consonants = U"бвгджзклмнпрстфхцчшщ";
  static const std::u32string vowels = U"аеиоуыэюя";
  std::u32string w;
  for (int i = 0; i < length; ++i) {
    const bool vowel = (i % 2 == 1);
    const auto& pool = vowel ? vowels : consonants;
    w.push_back(pool[rng.below(pool.size())]);
  }
  return utf8::encode(w);
}

// Fragment whose eligible words are `words_per_fragment` random words with
// lengths uniform over [min_len, max_len], separated by short function words.
inline Fragment synthetic_fragment(Rng& rng, int index, int words_per_fragment, int min_len, int max_len,
                                   TextKind kind = TextKind::Poetry) {
  static const std::vector<std::string> glue = {"и", "в", "на", "не", "что", "он", "как"};
  std::string text;
  for (int i = 0; i < words_per_fragment; ++i) {
    const int len = min_len + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len - min_len + 1)));
    text += random_word(rng, len);
    text += (i % 5 == 4) ? ",\n" : " " + glue[rng.below(glue.size())] + " ";
  }
  Fragment f;
  f.text = normalize_text(text);
  f.kind = kind;
  f.title = "synthetic " + std::to_string(index);
  f.author = "generator";
  f.id = content_hash(f.text);
  return f;
}

inline std::vector<Fragment> synthetic_corpus(std::uint64_t seed, int fragments, int words_per_fragment,
                                              int min_len = 5, int max_len = 14) {
  Rng rng(seed);
  std::vector<Fragment> out;
  for (int i = 0; i < fragments; ++i) {
    out.push_back(synthetic_fragment(rng, i, words_per_fragment, min_len, max_len,
                                     i % 4 == 3 ? TextKind::Prose : TextKind::Poetry));
  }
  return out;
}

inline std::string fragment_file(const std::string& title, const std::string& kind, const std::string& body) {
  return "title: " + title + "\nauthor: Someone\nkind: " + kind + "\n\n" + body + "\n";
}

}  // namespace cloze::testing
