#include "cloze/trials.hpp"

#include <algorithm>

#include "cloze/error.hpp"
#include "cloze/rng.hpp"
#include "cloze/utf8.hpp"

namespace cloze {

TrialType trial_type_from_int(int value) {
  if (value < 1 || value > 3) {
    throw Error(ErrorCode::InvalidArgument, "trial type must be 1, 2 or 3, got " + std::to_string(value));
  }
  return static_cast<TrialType>(value);
}

const std::set<std::string>& ReplacementPool::entries(const TargetKey& key) const {
  static const std::set<std::string> kEmpty;
  auto it = entries_.find(key);
  return it == entries_.end() ? kEmpty : it->second;
}

bool ReplacementPool::add(const TargetKey& key, const std::string& normalized_word,
                          std::string_view target_surface) {
  if (normalized_word.empty() || normalized_word == utf8::fold(target_surface)) return false;
  return entries_[key].insert(normalized_word).second;
}

std::size_t ReplacementPool::size() const {
  std::size_t n = 0;
  for (const auto& [key, set] : entries_) n += set.size();
  return n;
}

namespace {

bool is_punct(char32_t c) {
  if (c < 0x80) return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
                       (c >= 0x7B && c <= 0x7E);
  switch (c) {
    case U'«': case U'»': case U'„': case U'“': case U'”': case U'‘': case U'’': case U'‚':
    case U'—': case U'–': case U'…': case U'‹': case U'›': case U'¡': case U'¿': case U'·':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string normalize_response(std::string_view response) {
  const auto cps = utf8::decode(response);
  std::size_t b = 0;
  std::size_t e = cps.size();
  auto strip = [](char32_t c) { return utf8::is_space(c) || is_punct(c); };
  while (b < e && strip(cps[b])) ++b;
  while (e > b && strip(cps[e - 1])) --e;
  return utf8::encode(utf8::fold(std::u32string_view(cps).substr(b, e - b)));
}

bool is_valid_word(std::string_view word, const PoolPolicy& policy) {
  const auto cps = utf8::decode(word);
  if (static_cast<int>(cps.size()) < policy.min_len) return false;
  return std::all_of(cps.begin(), cps.end(), [&](char32_t c) { return policy.alphabet.is_letter(c); });
}

const WordToken& select_target(const Fragment& fragment, std::span<const WordToken> words,
                               std::uint64_t rng_seed) {
  if (words.empty()) throw Error(ErrorCode::NoEligibleWords, "fragment " + fragment.id + " has no eligible words");
  Rng rng(rng_seed);
  return words[rng.below(words.size())];
}

namespace {

std::vector<std::string> decoy_candidates(const WordToken& target, const ReplacementPool& pool,
                                          std::span<const std::string> fallback) {
  const auto& entry = pool.entries(TargetKey::of(target));
  if (!entry.empty()) return {entry.begin(), entry.end()};
  const auto folded = utf8::fold(target.surface);
  std::vector<std::string> out;
  for (const auto& w : fallback) {
    if (!w.empty() && utf8::fold(w) != folded) out.push_back(w);
  }
  return out;
}

}  // namespace

Trial make_trial(const Fragment& fragment, const WordToken& target, TrialType type,
                 const ReplacementPool& pool, std::uint64_t rng_seed, const TrialSpec& spec) {
  Trial trial;
  trial.id = spec.id;
  trial.fragment_id = fragment.id;
  trial.fragment_kind = fragment.kind;
  trial.target = target;
  trial.target.fragment_id = fragment.id;
  trial.type = type;
  trial.created_at = spec.created_at;
  if (type == TrialType::Cloze) return trial;

  const auto decoys = decoy_candidates(trial.target, pool, spec.fallback_words);
  if (decoys.empty()) {
    throw Error(ErrorCode::NoDecoyAvailable, "no replacement for '" + target.surface + "' in fragment " + fragment.id);
  }
  Rng rng(rng_seed);
  if (type == TrialType::Authenticity) {
    if (!rng.coin()) trial.decoy = decoys[rng.below(decoys.size())];
  } else {
    trial.decoy = decoys[rng.below(decoys.size())];
    trial.original_first = rng.coin();
  }
  return trial;
}

std::string RenderedTrial::display() const {
  if (candidates.empty()) return text;
  std::string out = text + "\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out += "\n" + std::to_string(i + 1) + ") " + candidates[i];
  }
  return out;
}

RenderedTrial render_trial(const Trial& trial, const Fragment& fragment) {
  const auto cps = utf8::decode(fragment.text);
  const std::u32string_view view(cps);
  const auto start = std::min(trial.target.start, cps.size());
  const auto end = std::min(trial.target.end, cps.size());
  const auto before = utf8::encode(view.substr(0, start));
  const auto after = utf8::encode(view.substr(end));

  RenderedTrial out;
  out.type = trial.type;
  switch (trial.type) {
    case TrialType::Cloze:
      out.text = before + std::string(kMask) + after;
      break;
    case TrialType::Authenticity: {
      const std::string shown = trial.decoy ? *trial.decoy : trial.target.surface;
      out.text = before + std::string(kHighlightOpen) + shown + std::string(kHighlightClose) + after;
      out.shown = shown;
      break;
    }
    case TrialType::Choice: {
      out.text = before + std::string(kMask) + after;
      const std::string& decoy = trial.decoy.value();
      if (trial.original_first) {
        out.candidates = {trial.target.surface, decoy};
      } else {
        out.candidates = {decoy, trial.target.surface};
      }
      break;
    }
  }
  return out;
}

GuessRecord score_guess(const Trial& trial, const Response& response, std::string subject_id,
                        std::string timestamp) {
  GuessRecord rec;
  rec.trial_id = trial.id;
  rec.subject_id = std::move(subject_id);
  rec.response = response;
  rec.timestamp = std::move(timestamp);

  if (trial.type == TrialType::Cloze) {
    const auto* text = std::get_if<std::string>(&response);
    if (text == nullptr) throw Error(ErrorCode::MalformedResponse, "type 1 trials take a word, not a choice");
    const auto normalized = normalize_response(*text);
    if (normalized.empty()) throw Error(ErrorCode::MalformedResponse, "empty answer");
    rec.correct = normalized == utf8::fold(trial.target.surface);
    return rec;
  }

  const auto* choice = std::get_if<int>(&response);
  if (choice == nullptr) throw Error(ErrorCode::MalformedResponse, "type 2 and 3 trials take a choice index");
  if (*choice != 0 && *choice != 1) {
    throw Error(ErrorCode::MalformedResponse, "choice must be 0 or 1, got " + std::to_string(*choice));
  }
  if (trial.type == TrialType::Authenticity) {
    rec.correct = (*choice == kChoiceOriginal) == trial.shows_original();
  } else {
    rec.correct = *choice == (trial.original_first ? 0 : 1);
  }
  return rec;
}

std::optional<std::string> pool_candidate(const ReplacementPool& pool, const GuessRecord& record, const Trial& trial,
                                          const PoolPolicy& policy) {
  if (trial.type != TrialType::Cloze || record.correct) return std::nullopt;
  const auto* text = std::get_if<std::string>(&record.response);
  if (text == nullptr) return std::nullopt;
  auto word = normalize_response(*text);
  if (!is_valid_word(word, policy) || word == utf8::fold(trial.target.surface)) return std::nullopt;
  if (pool.entries(TargetKey::of(trial.target)).contains(word)) return std::nullopt;
  return word;
}

bool update_pool(ReplacementPool& pool, const GuessRecord& record, const Trial& trial,
                 const PoolPolicy& policy) {
  const auto word = pool_candidate(pool, record, trial, policy);
  return word && pool.add(TargetKey::of(trial.target), *word, trial.target.surface);
}

std::string answer_of(const Trial& trial) { return trial.target.surface; }

}  // namespace cloze
