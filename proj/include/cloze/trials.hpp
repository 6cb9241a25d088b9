#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cloze/corpus.hpp"

namespace cloze {

// 1: the word is blanked and must be typed in.
// 2: one word is highlighted; is it the original or a replacement?
// 3: two candidates; which one is the original?
enum class TrialType : int { Cloze = 1, Authenticity = 2, Choice = 3 };

TrialType trial_type_from_int(int value);

// Type 2 choices.
inline constexpr int kChoiceOriginal = 0;
inline constexpr int kChoiceReplaced = 1;

// Constant-width blank; never depends on the hidden word.
inline constexpr std::string_view kMask = "____";
inline constexpr std::string_view kHighlightOpen = "[[";
inline constexpr std::string_view kHighlightClose = "]]";

struct Trial {
  std::string id;
  std::string fragment_id;
  TextKind fragment_kind = TextKind::Poetry;
  WordToken target;
  TrialType type = TrialType::Cloze;
  // Type 2: present iff the replacement is shown. Type 3: always present.
  std::optional<std::string> decoy;
  // Type 3 presentation order; true for the other types.
  bool original_first = true;
  std::string created_at;

  bool shows_original() const { return type == TrialType::Authenticity && !decoy; }

  friend bool operator==(const Trial&, const Trial&) = default;
};

// Free text for type 1, choice index for types 2 and 3.
using Response = std::variant<std::string, int>;

struct GuessRecord {
  std::string trial_id;
  std::string subject_id;
  Response response;
  bool correct = false;
  std::string timestamp;

  friend bool operator==(const GuessRecord&, const GuessRecord&) = default;
};

struct TargetKey {
  std::string fragment_id;
  std::size_t start = 0;
  std::size_t end = 0;

  static TargetKey of(const WordToken& t) { return {t.fragment_id, t.start, t.end}; }
  friend auto operator<=>(const TargetKey&, const TargetKey&) = default;
};

// Incorrect type-1 guesses per target, stored in normalized form. No entry
// ever equals its target under case folding.
class ReplacementPool {
 public:
  const std::set<std::string>& entries(const TargetKey& key) const;
  // False when the word equals the target or is already present.
  bool add(const TargetKey& key, const std::string& normalized_word, std::string_view target_surface);

  std::size_t size() const;
  const std::map<TargetKey, std::set<std::string>>& all() const { return entries_; }

 private:
  std::map<TargetKey, std::set<std::string>> entries_;
};

// Which guesses qualify as replacements.
struct PoolPolicy {
  Alphabet alphabet = Alphabet::cyrillic();
  int min_len = kDefaultMinWordLength;
};

struct TrialSpec {
  std::string id;
  std::string created_at;
  // Cold-start decoys when the pool entry is empty.
  std::span<const std::string> fallback_words;
};

// Trim, strip surrounding punctuation, case-fold.
std::string normalize_response(std::string_view response);

bool is_valid_word(std::string_view word, const PoolPolicy& policy);

// Uniform pick driven by Rng(rng_seed). Throws NoEligibleWords.
const WordToken& select_target(const Fragment& fragment, std::span<const WordToken> words,
                               std::uint64_t rng_seed);

// Draw order from Rng(rng_seed): type 2 draws the show-original coin, then a
// decoy index if the replacement is shown; type 3 draws the decoy index, then
// the original-first coin. Throws NoDecoyAvailable for types 2 and 3 when
// neither the pool nor the fallback list has a usable word.
Trial make_trial(const Fragment& fragment, const WordToken& target, TrialType type,
                 const ReplacementPool& pool, std::uint64_t rng_seed, const TrialSpec& spec);

struct RenderedTrial {
  TrialType type = TrialType::Cloze;
  std::string text;                    // fragment with blank or highlight
  std::optional<std::string> shown;    // type 2
  std::vector<std::string> candidates; // type 3, display order

  // Text followed by the numbered candidate list for type 3.
  std::string display() const;
};

RenderedTrial render_trial(const Trial& trial, const Fragment& fragment);

// Throws MalformedResponse for empty type-1 answers and out-of-range choices.
GuessRecord score_guess(const Trial& trial, const Response& response, std::string subject_id = {},
                        std::string timestamp = {});

// The normalized word update_pool would add for this record, if any.
std::optional<std::string> pool_candidate(const ReplacementPool& pool, const GuessRecord& record, const Trial& trial,
                                          const PoolPolicy& policy);

// Adds an incorrect, well-formed type-1 guess to the target's entry. Returns
// whether the pool changed.
bool update_pool(ReplacementPool& pool, const GuessRecord& record, const Trial& trial,
                 const PoolPolicy& policy);

// The answer revealed after submission: target surface for type 1, the
// original word for types 2 and 3.
std::string answer_of(const Trial& trial);

}  // namespace cloze
