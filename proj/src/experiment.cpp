#include "cloze/experiment.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "cloze/error.hpp"
#include "cloze/rng.hpp"
#include "cloze/utf8.hpp"

namespace cloze {

TypeMix normalize_mix(const TypeMix& mix) {
  double total = 0.0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (!(mix[i] >= 0.0)) {
      throw Error(ErrorCode::ValidationFailure, "/type_mix/" + std::to_string(i) + ": weights must be non-negative");
    }
    total += mix[i];
  }
  if (!(total > 0.0)) throw Error(ErrorCode::ValidationFailure, "/type_mix: weights must not all be zero");
  TypeMix out{};
  for (std::size_t i = 0; i < mix.size(); ++i) out[i] = mix[i] / total;
  return out;
}

TrialType draw_trial_type(const TypeMix& mix, Rng& rng) {
  const double u = rng.uniform01();
  double cum = 0.0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    cum += mix[i];
    if (u < cum) return static_cast<TrialType>(i + 1);
  }
  for (std::size_t i = mix.size(); i-- > 0;) {
    if (mix[i] > 0.0) return static_cast<TrialType>(i + 1);
  }
  return TrialType::Cloze;
}

Json session_payload(const Session& s) {
  return {{"session_id", s.session_id},
          {"subject_id", s.subject_id},
          {"subject_kind", s.subject_kind},
          {"type_mix", s.type_mix},
          {"seed", s.seed}};
}

Session session_from_payload(const Json& p, const std::string& created_at) {
  Session s;
  s.session_id = p.at("session_id").get<std::string>();
  s.subject_id = p.at("subject_id").get<std::string>();
  s.subject_kind = p.at("subject_kind").get<std::string>();
  const auto& mix = p.at("type_mix");
  for (std::size_t i = 0; i < 3; ++i) s.type_mix[i] = mix.at(i).get<double>();
  s.seed = p.at("seed").get<std::uint64_t>();
  s.created_at = created_at;
  return s;
}

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {}

Experiment Experiment::replay(std::span<const Event> events, ExperimentConfig config) {
  Experiment exp(std::move(config));
  for (const auto& e : events) exp.apply(e);
  return exp;
}

void Experiment::apply(const Event& event) {
  const auto& p = event.payload;
  switch (event.kind) {
    case EventKind::FragmentAdded: {
      auto f = fragment_from_payload(p);
      if (fragments_.contains(f.id)) return;
      auto words = extract_words(f.text, config_.alphabet, config_.min_word_len, f.id);
      if (!words.empty()) eligible_.push_back(f.id);
      for (const auto& w : words) {
        if (corpus_vocabulary_.insert(utf8::fold(w.surface)).second) vocabulary_cache_.clear();
      }
      words_[f.id] = std::move(words);
      fragment_order_.push_back(f.id);
      fragments_.emplace(f.id, std::move(f));
      break;
    }
    case EventKind::SessionCreated: {
      auto s = session_from_payload(p, event.timestamp);
      sessions_[s.session_id] = std::move(s);
      break;
    }
    case EventKind::TrialCreated: {
      TrialEntry entry;
      entry.trial = trial_from_payload(p, event.timestamp);
      entry.session_id = p.at("session_id").get<std::string>();
      if (auto it = sessions_.find(entry.session_id); it != sessions_.end()) ++it->second.trials_served;
      trials_[entry.trial.id] = std::move(entry);
      break;
    }
    case EventKind::GuessRecorded: {
      auto rec = guess_from_payload(p, event.timestamp);
      if (auto it = trials_.find(rec.trial_id); it != trials_.end()) it->second.answered = true;
      guesses_.push_back(std::move(rec));
      break;
    }
    case EventKind::PoolUpdated: {
      TargetKey key{p.at("fragment_id").get<std::string>(), p.at("start").get<std::size_t>(),
                    p.at("end").get<std::size_t>()};
      std::string surface;
      if (auto it = fragments_.find(key.fragment_id); it != fragments_.end()) {
        const auto cps = utf8::decode(it->second.text);
        if (key.end <= cps.size() && key.start <= key.end) {
          surface = utf8::encode(std::u32string_view(cps).substr(key.start, key.end - key.start));
        }
      }
      pool_.add(key, p.at("word").get<std::string>(), surface);
      break;
    }
  }
}

bool Experiment::add_fragment(EventLog& log, const Fragment& fragment) {
  if (fragments_.contains(fragment.id)) return false;
  apply(log.append(EventKind::FragmentAdded, fragment_payload(fragment)));
  return true;
}

Session Experiment::create_session(EventLog& log, std::string session_id, std::string subject_id,
                                   std::string subject_kind, const TypeMix& mix, std::uint64_t seed) {
  if (sessions_.contains(session_id)) {
    throw Error(ErrorCode::ValidationFailure, "/session_id: '" + session_id + "' already exists");
  }
  Session s;
  s.session_id = std::move(session_id);
  s.subject_id = std::move(subject_id);
  s.subject_kind = std::move(subject_kind);
  s.type_mix = normalize_mix(mix);
  s.seed = seed;
  apply(log.append(EventKind::SessionCreated, session_payload(s)));
  return sessions_.at(s.session_id);
}

const std::vector<WordToken>& Experiment::words_of(const std::string& fragment_id) const {
  static const std::vector<WordToken> kNone;
  auto it = words_.find(fragment_id);
  return it == words_.end() ? kNone : it->second;
}

std::vector<WordToken> Experiment::all_words() const {
  std::vector<WordToken> out;
  for (const auto& id : fragment_order_) {
    const auto& w = words_.at(id);
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

const std::vector<std::string>& Experiment::fallback_words() const {
  if (!config_.fallback_words.empty()) return config_.fallback_words;
  if (vocabulary_cache_.size() != corpus_vocabulary_.size()) {
    vocabulary_cache_.assign(corpus_vocabulary_.begin(), corpus_vocabulary_.end());
  }
  return vocabulary_cache_;
}

Trial Experiment::generate_trial(std::uint64_t seed, const TypeMix& mix, const std::string& trial_id,
                                 std::span<const std::string> fragment_pool) const {
  const std::span<const std::string> pool_ids = fragment_pool.empty() ? std::span<const std::string>(eligible_) : fragment_pool;
  if (pool_ids.empty()) throw Error(ErrorCode::CorpusEmpty, "no fragment has an eligible word");
  Rng rng(derive_seed(seed, 0));
  const auto& fragment_id = pool_ids[rng.below(pool_ids.size())];
  const TrialType type = draw_trial_type(mix, rng);
  const auto it = fragments_.find(fragment_id);
  if (it == fragments_.end()) throw Error(ErrorCode::CorpusEmpty, "unknown fragment " + fragment_id);
  const auto& fragment = it->second;
  const auto& target = select_target(fragment, words_of(fragment_id), derive_seed(seed, 1));
  TrialSpec spec;
  spec.id = trial_id;
  spec.fallback_words = fallback_words();
  return make_trial(fragment, target, type, pool_, derive_seed(seed, 2), spec);
}

Trial Experiment::serve_trial(EventLog& log, const std::string& session_id,
                              std::span<const std::string> fragment_pool) {
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + session_id + "'");
  const Session& s = it->second;
  const auto index = static_cast<std::uint64_t>(s.trials_served);
  const std::string trial_id = session_id + "-t" + std::to_string(index + 1);
  auto trial = generate_trial(derive_seed(s.seed, index), s.type_mix, trial_id, fragment_pool);
  const auto event = log.append(EventKind::TrialCreated, trial_payload(trial, session_id));
  apply(event);
  return trials_.at(trial_id).trial;
}

GuessOutcome Experiment::record_guess(EventLog& log, const std::string& trial_id, const Response& response,
                                      const std::string& subject_id) {
  const auto it = trials_.find(trial_id);
  if (it == trials_.end()) throw Error(ErrorCode::UnknownTrial, "no trial '" + trial_id + "'");
  if (it->second.answered) throw Error(ErrorCode::AlreadyAnswered, "trial '" + trial_id + "' was already answered");
  const Trial& trial = it->second.trial;
  const std::string session_id = it->second.session_id;

  GuessOutcome out;
  out.record = score_guess(trial, response, subject_id);
  out.answer = answer_of(trial);
  out.pool_word = pool_candidate(pool_, out.record, trial, pool_policy());

  const auto guess_event = log.append(EventKind::GuessRecorded, guess_payload(out.record, session_id));
  out.record.timestamp = guess_event.timestamp;
  apply(guess_event);
  if (out.pool_word) apply(log.append(EventKind::PoolUpdated, pool_payload(TargetKey::of(trial.target), *out.pool_word)));
  return out;
}

std::string Experiment::state_hash() const {
  Json j;
  for (const auto& id : fragment_order_) j["fragments"].push_back(fragment_payload(fragments_.at(id)));
  for (const auto& [id, s] : sessions_) {
    auto sp = session_payload(s);
    sp["trials_served"] = s.trials_served;
    j["sessions"].push_back(sp);
  }
  for (const auto& [id, t] : trials_) {
    auto tp = trial_payload(t.trial, t.session_id);
    tp["answered"] = t.answered;
    j["trials"].push_back(tp);
  }
  for (const auto& g : guesses_) j["guesses"].push_back(guess_payload(g));
  for (const auto& [key, words] : pool_.all()) {
    j["pool"].push_back({{"fragment_id", key.fragment_id}, {"start", key.start}, {"end", key.end}, {"words", words}});
  }
  return content_hash(j.dump());
}

Json RunReport::to_json() const {
  Json by_type = Json::object();
  for (std::size_t i = 0; i < 3; ++i) {
    by_type[std::to_string(i + 1)] = {{"trials", trials_by_type[i]}, {"correct", correct_by_type[i]}};
  }
  return {{"session_id", session_id},
          {"n_trials", n_trials},
          {"n_correct", n_correct},
          {"p_hat", p_hat()},
          {"by_type", by_type}};
}

RunReport simulate(Experiment& experiment, EventLog& log, const Subject& subject, const SimulationOptions& options) {
  if (subject.profile().kind == SubjectKind::Human) {
    throw Error(ErrorCode::ValidationFailure, "human subjects cannot take part in simulations");
  }
  if (options.n_trials < 0) throw Error(ErrorCode::InvalidArgument, "n_trials must be non-negative");
  const auto& pool_ids = options.fragment_pool.empty() ? std::span<const std::string>(experiment.eligible_fragments())
                                                       : options.fragment_pool;
  if (pool_ids.empty()) throw Error(ErrorCode::CorpusEmpty, "no fragment has an eligible word");

  RunReport report;
  report.session_id = options.session_id.empty() ? "sim-" + std::to_string(options.seed) : options.session_id;
  const auto& profile = subject.profile();
  const auto subject_id = profile.subject_id.empty() ? std::string(to_string(profile.kind)) : profile.subject_id;
  experiment.create_session(log, report.session_id, subject_id, std::string(to_string(profile.kind)),
                            options.type_mix, options.seed);

  for (std::int64_t i = 0; i < options.n_trials; ++i) {
    const auto trial = experiment.serve_trial(log, report.session_id, options.fragment_pool);
    const auto base = derive_seed(options.seed, static_cast<std::uint64_t>(i));
    const auto& fragment = experiment.fragments().at(trial.fragment_id);
    const auto response = subject.respond(trial, fragment, derive_seed(base, 3));
    const auto outcome = experiment.record_guess(log, trial.id, response, subject_id);
    const auto t = static_cast<std::size_t>(trial.type) - 1;
    ++report.trials_by_type[t];
    ++report.n_trials;
    if (outcome.record.correct) {
      ++report.correct_by_type[t];
      ++report.n_correct;
    }
  }
  return report;
}

CorpusSplit split_corpus(const Experiment& experiment) {
  CorpusSplit split;
  const auto& order = experiment.fragment_order();
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i % 2 == 0) {
      split.training.push_back(order[i]);
    } else if (!experiment.words_of(order[i]).empty()) {
      split.held_out.push_back(order[i]);
    }
  }
  return split;
}

}  // namespace cloze
