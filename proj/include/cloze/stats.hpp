#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cloze/corpus.hpp"
#include "cloze/trials.hpp"

namespace cloze::stats {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// One word-length bucket. U is empty when nobody in the bucket guessed right.
struct GroupStats {
  int length = 0;
  LengthUnit unit = LengthUnit::Chars;
  std::int64_t n_trials = 0;
  std::int64_t n_correct = 0;
  double p_hat = 0.0;
  std::optional<double> U;
  double ci_low = 0.0;
  double ci_high = 0.0;

  bool all_missed() const { return n_correct == 0; }
};

struct PerWordStats {
  TargetKey key;
  std::int64_t n_trials = 0;
  std::int64_t n_correct = 0;

  double p_hat() const { return static_cast<double>(n_correct) / static_cast<double>(n_trials); }
};

struct FitRange {
  int min = 5;
  int max = 14;
};

struct LinearFit {
  double slope = 0.0;      // bits per unit length
  double intercept = 0.0;  // bits
  double r_squared = 0.0;
  FitRange fit_range;
  std::size_t n_buckets = 0;
};

// A guess joined with the trial it answers.
struct AnalysisRecord {
  TrialType trial_type = TrialType::Cloze;
  TextKind kind = TextKind::Poetry;
  TargetKey word;
  int length_chars = 0;
  std::optional<int> length_syllables;
  bool correct = false;
};

struct RecordFilter {
  std::optional<TrialType> trial_type = TrialType::Cloze;
  std::optional<TextKind> kind;

  bool accepts(const AnalysisRecord& r) const {
    return (!trial_type || r.trial_type == *trial_type) && (!kind || r.kind == *kind);
  }
};

inline constexpr double kDefaultZ = 1.0;
inline constexpr std::int64_t kDefaultMinBucketTrials = 30;
// Substitute entropies for never-guessed words: wild guessing with a
// frequency dictionary, and the low bound.
inline constexpr double kWildGuessBits = 10.0;
inline constexpr double kLowBoundBits = 3.0;

// -log2(n_correct / n_trials). Throws AllMissed when n_correct is 0.
double unpredictability(std::int64_t n_correct, std::int64_t n_trials);

// Mean over words of -log2 p_i, with never-guessed words contributing
// zero_guess_constant bits.
double entropy_mean_log(std::span<const PerWordStats> per_word, double zero_guess_constant);

// Normal approximation p ± z·sqrt(p(1-p)/n), clamped to [0, 1].
Interval binomial_ci(std::int64_t n_correct, std::int64_t n_trials, double z = kDefaultZ);

std::optional<int> length_of(const AnalysisRecord& r, LengthUnit unit);

// One bucket per occupied length, ascending. Records with no length on the
// requested axis (zero-syllable words) are skipped; see excluded_records.
std::vector<GroupStats> group_by_length(std::span<const AnalysisRecord> records, LengthUnit unit,
                                        const RecordFilter& filter = {}, double z = kDefaultZ);

std::size_t excluded_records(std::span<const AnalysisRecord> records, LengthUnit unit,
                             const RecordFilter& filter = {});

// Grouped by target word, in key order.
std::vector<PerWordStats> per_word_stats(std::span<const AnalysisRecord> records, const RecordFilter& filter = {});

// entropy_mean_log per length bucket.
std::map<int, double> entropy_by_length(std::span<const AnalysisRecord> records, LengthUnit unit,
                                        const RecordFilter& filter, double zero_guess_constant);

// Var(U) by the delta method, (1-p)/(p·n·ln²2). p is held at most
// 1 - 1/(2n) so perfectly guessed buckets keep a finite weight.
double unpredictability_variance(std::int64_t n_correct, std::int64_t n_trials);

// Inverse-variance weighted least squares of U on length over buckets inside
// fit_range with at least min_bucket_trials trials and a defined U.
// Throws InsufficientBuckets when fewer than two qualify.
LinearFit linear_fit(std::span<const GroupStats> groups, FitRange fit_range = {},
                     std::int64_t min_bucket_trials = kDefaultMinBucketTrials);

// Cumulative word entropy from per-position letter entropies (prefix sums).
std::vector<double> word_entropy_from_letter_entropies(std::span<const double> letter_bits);

// -Σ p log2 p. Throws NotNormalized unless all p > 0 and Σp = 1 ± 1e-6.
double zipf_word_entropy(std::span<const double> rank_probabilities);

// p_r = 1 / (r · H_R) for r = 1..R.
std::vector<double> zipf_rank_probabilities(std::size_t ranks);

double bpc_to_bpw(double bits_per_char, double avg_word_len_chars);

// 2^(-H·n): the typical-sequence probability of an ergodic source.
double ergodic_sequence_probability(double bits_per_char, int length);

}  // namespace cloze::stats
