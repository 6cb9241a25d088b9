#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cloze/corpus.hpp"
#include "cloze/rng.hpp"
#include "cloze/trials.hpp"

namespace cloze {

enum class SubjectKind { Human, Oracle, Uniform, Frequency, Ngram, Planted };

std::string_view to_string(SubjectKind kind);
// Throws UnknownSubjectKind.
SubjectKind parse_subject_kind(std::string_view name);

// Word frequencies normalized to total mass 1, kept sorted by word.
class FrequencyDictionary {
 public:
  FrequencyDictionary() = default;
  // Counts must be positive; words are case-folded and merged.
  explicit FrequencyDictionary(const std::map<std::string, double>& counts);

  static FrequencyDictionary uniform(std::span<const std::string> words);
  // One `word<TAB>count` per line.
  static FrequencyDictionary load(const std::filesystem::path& path);

  bool empty() const { return words_.empty(); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<double>& frequencies() const { return freqs_; }
  // 0 for unknown words.
  double frequency(std::string_view word) const;

 private:
  std::vector<std::string> words_;
  std::vector<double> freqs_;
};

// What a non-oracle subject may see: the fragment with the target span
// removed, plus the words on display.
struct TrialView {
  std::string trial_id;
  std::string fragment_id;
  TrialType type = TrialType::Cloze;
  std::vector<std::string> left_context;   // folded letter runs, document order
  std::vector<std::string> right_context;
  std::string shown;                       // type 2
  std::vector<std::string> candidates;     // type 3, display order
};

TrialView make_view(const Trial& trial, const Fragment& fragment, const Alphabet& alphabet);

// Index drawn proportionally to weights by one uniform01 draw and a linear
// cumulative scan. All-zero weights fall back to a uniform pick.
std::size_t sample_index(std::span<const double> weights, Rng& rng);

Response oracle_guess(const Trial& trial);

// Type 1 samples a word by frequency. Type 3 picks the more frequent
// candidate. Type 2 calls the shown word original when it is at least as
// frequent as the dictionary mean 1/N. Ties go to a seeded coin.
Response frequency_guess(const TrialView& view, const FrequencyDictionary& dict, std::uint64_t rng_seed);

struct NgramOptions {
  int order = 2;
  double smoothing = 0.01;  // add-λ
};

inline constexpr std::string_view kSentenceStart = "<s>";
inline constexpr std::string_view kSentenceEnd = "</s>";

// Word n-gram counts over whole fragments, padded with order-1 boundary
// markers on each side. Remembers which fragments it saw.
class NgramModel {
 public:
  explicit NgramModel(NgramOptions options = {});

  void train(const Fragment& fragment, const Alphabet& alphabet);

  bool empty() const { return total_ngrams_ == 0; }
  int order() const { return options_.order; }
  bool trained_on(std::string_view fragment_id) const;
  // Vocabulary without boundary markers, sorted.
  std::vector<std::string> vocabulary() const;

  // Smoothed P(word | history); history holds the previous order-1 words.
  double probability(std::span<const std::string> history, const std::string& word) const;

  // Product of the probabilities of every n-gram window that contains the
  // candidate, treating the windows as independent.
  double score(std::span<const std::string> left, const std::string& candidate,
               std::span<const std::string> right) const;

 private:
  NgramOptions options_;
  std::map<std::vector<std::string>, std::map<std::string, std::int64_t>> counts_;
  std::map<std::vector<std::string>, std::int64_t> context_totals_;
  std::set<std::string> vocabulary_;
  std::set<std::string> training_fragments_;
  std::int64_t total_ngrams_ = 0;
};

struct NgramGuessOptions {
  std::size_t top_k = 50;
  // Candidate words; the model vocabulary when empty.
  std::span<const std::string> candidates;
};

// Type 1 samples from the renormalized top-k candidates by score. Types 2
// and 3 mirror frequency_guess with the contextual score in place of
// frequency (type 2 compares against the mean candidate score).
// Throws UntrainedModel and TrainingLeakage.
Response ngram_guess(const TrialView& view, const NgramModel& model, std::uint64_t rng_seed,
                     const NgramGuessOptions& options = {});

using SuccessCurve = std::function<double(int)>;

// Letters rotated left by one; extended when that still equals the word.
std::string deterministic_wrong_word(std::string_view surface);

// Correct with probability curve(length_chars), otherwise a fixed wrong answer.
Response planted_guess(const Trial& trial, const SuccessCurve& curve, std::uint64_t rng_seed);

// "pow2:S" gives 2^(-S·n); "const:P" gives P.
SuccessCurve parse_success_curve(std::string_view spec);

struct SubjectProfile {
  std::string subject_id;
  SubjectKind kind = SubjectKind::Oracle;
  int ngram_order = 2;
  double smoothing = 0.01;
  std::size_t top_k = 50;
  std::string curve = "pow2:0.3";
};

// A player usable by the simulation runner. Non-oracle subjects only see the
// TrialView built from the masked fragment.
class Subject {
 public:
  virtual ~Subject() = default;
  virtual const SubjectProfile& profile() const = 0;
  virtual Response respond(const Trial& trial, const Fragment& fragment, std::uint64_t rng_seed) const = 0;
};

struct SubjectResources {
  const Alphabet* alphabet = nullptr;
  const FrequencyDictionary* dictionary = nullptr;
  const NgramModel* model = nullptr;
};

// Throws ValidationFailure for human profiles and when a required resource
// is missing.
std::unique_ptr<Subject> make_subject(const SubjectProfile& profile, const SubjectResources& resources);

}  // namespace cloze
