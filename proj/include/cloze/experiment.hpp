#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cloze/corpus.hpp"
#include "cloze/store.hpp"
#include "cloze/subjects.hpp"
#include "cloze/trials.hpp"

namespace cloze {

// Weights over trial types 1, 2, 3.
using TypeMix = std::array<double, 3>;

inline constexpr TypeMix kEqualMix = {1.0 / 3, 1.0 / 3, 1.0 / 3};
inline constexpr TypeMix kClozeOnly = {1.0, 0.0, 0.0};

// Normalizes to sum 1. Throws ValidationFailure on negative or all-zero weights.
TypeMix normalize_mix(const TypeMix& mix);
// Index chosen by one uniform01 draw against the cumulative weights.
TrialType draw_trial_type(const TypeMix& mix, Rng& rng);

struct ExperimentConfig {
  Alphabet alphabet = Alphabet::cyrillic();
  int min_word_len = kDefaultMinWordLength;
  // Cold-start decoys; the corpus's own eligible words when empty.
  std::vector<std::string> fallback_words;
};

struct Session {
  std::string session_id;
  std::string subject_id;
  std::string subject_kind;
  TypeMix type_mix = kEqualMix;
  std::uint64_t seed = 0;
  std::int64_t trials_served = 0;
  std::string created_at;
};

Json session_payload(const Session& session);
Session session_from_payload(const Json& payload, const std::string& created_at = {});

struct TrialEntry {
  Trial trial;
  std::string session_id;
  bool answered = false;
};

struct GuessOutcome {
  GuessRecord record;
  std::string answer;
  std::optional<std::string> pool_word;  // set when the guess became a decoy
};

// Aggregate state folded from the event log. Every mutation goes through
// the log first, then through apply(), so a live run and a replay of its log
// end in the same state.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config = {});

  static Experiment replay(std::span<const Event> events, ExperimentConfig config = {});

  void apply(const Event& event);

  // False when a fragment with the same content hash is already present.
  bool add_fragment(EventLog& log, const Fragment& fragment);

  Session create_session(EventLog& log, std::string session_id, std::string subject_id, std::string subject_kind,
                         const TypeMix& mix, std::uint64_t seed);

  // Pure: the same seed and state always give the same trial. Fragments come
  // from `fragment_pool` when given, else from every fragment with at least
  // one eligible word.
  //   Rng(derive(seed, 0)): fragment index, then trial type
  //   derive(seed, 1):      target word
  //   derive(seed, 2):      decoy and presentation coins
  Trial generate_trial(std::uint64_t seed, const TypeMix& mix, const std::string& trial_id,
                       std::span<const std::string> fragment_pool = {}) const;

  // Generates the next trial of a session and persists it.
  Trial serve_trial(EventLog& log, const std::string& session_id,
                    std::span<const std::string> fragment_pool = {});

  // Throws UnknownTrial, AlreadyAnswered, MalformedResponse.
  GuessOutcome record_guess(EventLog& log, const std::string& trial_id, const Response& response,
                            const std::string& subject_id);

  const ExperimentConfig& config() const { return config_; }
  PoolPolicy pool_policy() const { return {config_.alphabet, config_.min_word_len}; }
  const std::map<std::string, Fragment>& fragments() const { return fragments_; }
  const std::vector<std::string>& fragment_order() const { return fragment_order_; }
  const std::vector<std::string>& eligible_fragments() const { return eligible_; }
  const std::vector<WordToken>& words_of(const std::string& fragment_id) const;
  std::vector<WordToken> all_words() const;
  const std::map<std::string, Session>& sessions() const { return sessions_; }
  const std::map<std::string, TrialEntry>& trials() const { return trials_; }
  const std::vector<GuessRecord>& guesses() const { return guesses_; }
  const ReplacementPool& pool() const { return pool_; }
  // Decoy fallback list actually in use.
  const std::vector<std::string>& fallback_words() const;

  // Hash over fragments, sessions, trials, guesses and pool, independent of
  // timestamps.
  std::string state_hash() const;

 private:
  ExperimentConfig config_;
  std::map<std::string, Fragment> fragments_;
  std::vector<std::string> fragment_order_;
  std::map<std::string, std::vector<WordToken>> words_;
  std::vector<std::string> eligible_;
  std::set<std::string> corpus_vocabulary_;
  mutable std::vector<std::string> vocabulary_cache_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, TrialEntry> trials_;
  std::vector<GuessRecord> guesses_;
  ReplacementPool pool_;
};

struct SimulationOptions {
  std::int64_t n_trials = 100;
  std::uint64_t seed = 0;
  TypeMix type_mix = kEqualMix;
  std::string session_id;  // "sim-<seed>" when empty
  std::span<const std::string> fragment_pool;
};

struct RunReport {
  std::string session_id;
  std::array<std::int64_t, 3> trials_by_type{};
  std::array<std::int64_t, 3> correct_by_type{};
  std::int64_t n_trials = 0;
  std::int64_t n_correct = 0;

  double p_hat() const { return n_trials ? static_cast<double>(n_correct) / static_cast<double>(n_trials) : 0.0; }
  Json to_json() const;
};

// Plays n_trials through the subject; trial i uses seed derive(seed, i) and
// the subject answers with derive(derive(seed, i), 3). Throws CorpusEmpty.
RunReport simulate(Experiment& experiment, EventLog& log, const Subject& subject, const SimulationOptions& options);

// Deterministic split for n-gram subjects: fragments at even positions of the
// ingestion order train the model; the rest, when they have eligible words,
// are held out for trials.
struct CorpusSplit {
  std::vector<std::string> training;
  std::vector<std::string> held_out;
};
CorpusSplit split_corpus(const Experiment& experiment);

}  // namespace cloze
