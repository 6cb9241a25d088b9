#include "cloze/subjects.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cloze/error.hpp"
#include "cloze/utf8.hpp"

namespace cloze {

std::string_view to_string(SubjectKind kind) {
  switch (kind) {
    case SubjectKind::Human: return "human";
    case SubjectKind::Oracle: return "oracle";
    case SubjectKind::Uniform: return "uniform";
    case SubjectKind::Frequency: return "frequency";
    case SubjectKind::Ngram: return "ngram";
    case SubjectKind::Planted: return "planted";
  }
  return "unknown";
}

SubjectKind parse_subject_kind(std::string_view name) {
  for (auto k : {SubjectKind::Human, SubjectKind::Oracle, SubjectKind::Uniform, SubjectKind::Frequency,
                 SubjectKind::Ngram, SubjectKind::Planted}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::UnknownSubjectKind, "unknown subject kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// FrequencyDictionary

FrequencyDictionary::FrequencyDictionary(const std::map<std::string, double>& counts) {
  std::map<std::string, double> merged;
  for (const auto& [word, count] : counts) {
    if (!(count > 0.0) || !std::isfinite(count)) {
      throw Error(ErrorCode::InvalidArgument, "frequency of '" + word + "' must be positive");
    }
    const auto folded = utf8::fold(word);
    if (folded.empty()) continue;
    merged[folded] += count;
  }
  double total = 0.0;
  for (const auto& [w, c] : merged) total += c;
  for (const auto& [w, c] : merged) {
    words_.push_back(w);
    freqs_.push_back(c / total);
  }
}

FrequencyDictionary FrequencyDictionary::uniform(std::span<const std::string> words) {
  std::map<std::string, double> counts;
  for (const auto& w : words) counts[utf8::fold(w)] = 1.0;
  return FrequencyDictionary(counts);
}

FrequencyDictionary FrequencyDictionary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::map<std::string, double> counts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::ValidationFailure, path.string() + ":" + std::to_string(lineno) + ": expected word<TAB>count");
    }
    const auto word = line.substr(0, tab);
    const auto count_text = line.substr(tab + 1);
    double count = 0.0;
    const auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size() || !(count > 0.0)) {
      throw Error(ErrorCode::ValidationFailure,
                  path.string() + ":" + std::to_string(lineno) + ": bad count '" + count_text + "'");
    }
    counts[word] += count;
  }
  if (counts.empty()) throw Error(ErrorCode::ValidationFailure, path.string() + ": empty dictionary");
  return FrequencyDictionary(counts);
}

double FrequencyDictionary::frequency(std::string_view word) const {
  const auto folded = utf8::fold(word);
  const auto it = std::lower_bound(words_.begin(), words_.end(), folded);
  if (it == words_.end() || *it != folded) return 0.0;
  return freqs_[static_cast<std::size_t>(it - words_.begin())];
}

// ---------------------------------------------------------------------------
// Views and sampling

namespace {

std::vector<std::string> letter_runs(std::u32string_view text, const Alphabet& alphabet) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!alphabet.is_letter(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && alphabet.is_letter(text[j])) ++j;
    out.push_back(utf8::encode(utf8::fold(text.substr(i, j - i))));
    i = j;
  }
  return out;
}

}  // namespace

TrialView make_view(const Trial& trial, const Fragment& fragment, const Alphabet& alphabet) {
  const auto cps = utf8::decode(fragment.text);
  const std::u32string_view text(cps);
  const auto start = std::min(trial.target.start, cps.size());
  const auto end = std::min(trial.target.end, cps.size());

  TrialView view;
  view.trial_id = trial.id;
  view.fragment_id = trial.fragment_id;
  view.type = trial.type;
  view.left_context = letter_runs(text.substr(0, start), alphabet);
  view.right_context = letter_runs(text.substr(end), alphabet);
  const auto rendered = render_trial(trial, fragment);
  if (rendered.shown) view.shown = utf8::fold(*rendered.shown);
  for (const auto& c : rendered.candidates) view.candidates.push_back(utf8::fold(c));
  return view;
}

std::size_t sample_index(std::span<const double> weights, Rng& rng) {
  if (weights.empty()) throw Error(ErrorCode::InvalidArgument, "cannot sample from an empty list");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) return rng.below(weights.size());
  const double u = rng.uniform01() * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u < cum) return i;
  }
  // Rounding left u at the very top; take the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

namespace {

// 0 or 1 for the larger score; coin on a tie.
int pick_larger(double first, double second, Rng& rng) {
  if (first > second) return 0;
  if (second > first) return 1;
  return rng.coin() ? 0 : 1;
}

// Original when the shown word's score beats the reference.
int judge_shown(double shown, double reference, Rng& rng) {
  if (shown > reference) return kChoiceOriginal;
  if (shown < reference) return kChoiceReplaced;
  return rng.coin() ? kChoiceOriginal : kChoiceReplaced;
}

}  // namespace

Response oracle_guess(const Trial& trial) {
  switch (trial.type) {
    case TrialType::Cloze: return trial.target.surface;
    case TrialType::Authenticity: return trial.shows_original() ? kChoiceOriginal : kChoiceReplaced;
    case TrialType::Choice: return trial.original_first ? 0 : 1;
  }
  return 0;
}

Response frequency_guess(const TrialView& view, const FrequencyDictionary& dict, std::uint64_t rng_seed) {
  if (dict.empty()) throw Error(ErrorCode::InvalidArgument, "frequency subject needs a non-empty dictionary");
  Rng rng(rng_seed);
  switch (view.type) {
    case TrialType::Cloze:
      return dict.words()[sample_index(dict.frequencies(), rng)];
    case TrialType::Authenticity:
      return judge_shown(dict.frequency(view.shown), 1.0 / static_cast<double>(dict.size()), rng);
    case TrialType::Choice:
      return pick_larger(dict.frequency(view.candidates.at(0)), dict.frequency(view.candidates.at(1)), rng);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// NgramModel

NgramModel::NgramModel(NgramOptions options) : options_(options) {
  if (options_.order < 1) throw Error(ErrorCode::InvalidArgument, "n-gram order must be at least 1");
  if (!(options_.smoothing >= 0.0)) throw Error(ErrorCode::InvalidArgument, "smoothing must be non-negative");
}

void NgramModel::train(const Fragment& fragment, const Alphabet& alphabet) {
  const auto cps = utf8::decode(fragment.text);
  const auto words = letter_runs(cps, alphabet);
  const auto pad = static_cast<std::size_t>(options_.order - 1);
  std::vector<std::string> seq(pad, std::string(kSentenceStart));
  seq.insert(seq.end(), words.begin(), words.end());
  seq.insert(seq.end(), pad == 0 ? 1 : pad, std::string(kSentenceEnd));
  for (std::size_t j = pad; j < seq.size(); ++j) {
    std::vector<std::string> history(seq.begin() + static_cast<std::ptrdiff_t>(j - pad),
                                     seq.begin() + static_cast<std::ptrdiff_t>(j));
    ++counts_[history][seq[j]];
    ++context_totals_[history];
    vocabulary_.insert(seq[j]);
    ++total_ngrams_;
  }
  training_fragments_.insert(fragment.id);
}

bool NgramModel::trained_on(std::string_view fragment_id) const {
  return training_fragments_.contains(std::string(fragment_id));
}

std::vector<std::string> NgramModel::vocabulary() const {
  std::vector<std::string> out;
  for (const auto& w : vocabulary_) {
    if (w != kSentenceEnd && w != kSentenceStart) out.push_back(w);
  }
  return out;
}

double NgramModel::probability(std::span<const std::string> history, const std::string& word) const {
  const std::vector<std::string> key(history.begin(), history.end());
  std::int64_t joint = 0;
  std::int64_t total = 0;
  if (auto it = context_totals_.find(key); it != context_totals_.end()) {
    total = it->second;
    const auto& next = counts_.at(key);
    if (auto jt = next.find(word); jt != next.end()) joint = jt->second;
  }
  const double lambda = options_.smoothing;
  const double denom = static_cast<double>(total) + lambda * static_cast<double>(vocabulary_.size());
  if (denom <= 0.0) return 0.0;
  return (static_cast<double>(joint) + lambda) / denom;
}

double NgramModel::score(std::span<const std::string> left, const std::string& candidate,
                         std::span<const std::string> right) const {
  const auto pad = static_cast<std::size_t>(options_.order - 1);
  std::vector<std::string> seq;
  for (std::size_t i = left.size(); i < pad; ++i) seq.emplace_back(kSentenceStart);
  const auto left_take = std::min(left.size(), pad);
  seq.insert(seq.end(), left.end() - static_cast<std::ptrdiff_t>(left_take), left.end());
  const std::size_t at = seq.size();
  seq.push_back(candidate);
  const auto right_take = std::min(right.size(), pad);
  seq.insert(seq.end(), right.begin(), right.begin() + static_cast<std::ptrdiff_t>(right_take));
  while (seq.size() < at + 1 + pad) seq.emplace_back(kSentenceEnd);

  double p = 1.0;
  for (std::size_t j = at; j <= at + pad; ++j) {
    const std::span<const std::string> history(seq.data() + (j - pad), pad);
    p *= probability(history, seq[j]);
  }
  return p;
}

Response ngram_guess(const TrialView& view, const NgramModel& model, std::uint64_t rng_seed,
                     const NgramGuessOptions& options) {
  if (model.empty()) throw Error(ErrorCode::UntrainedModel, "n-gram model has no counts");
  if (model.trained_on(view.fragment_id)) {
    throw Error(ErrorCode::TrainingLeakage, "fragment " + view.fragment_id + " is in the model's training set");
  }
  Rng rng(rng_seed);
  auto score = [&](const std::string& w) { return model.score(view.left_context, w, view.right_context); };

  std::vector<std::string> owned;
  std::span<const std::string> candidates = options.candidates;
  if (candidates.empty()) {
    owned = model.vocabulary();
    candidates = owned;
  }

  switch (view.type) {
    case TrialType::Cloze: {
      struct Scored {
        double score;
        std::size_t index;
      };
      std::vector<Scored> scored;
      scored.reserve(candidates.size());
      for (std::size_t i = 0; i < candidates.size(); ++i) scored.push_back({score(candidates[i]), i});
      std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
      if (options.top_k > 0 && scored.size() > options.top_k) scored.resize(options.top_k);
      std::vector<double> weights;
      weights.reserve(scored.size());
      for (const auto& s : scored) weights.push_back(s.score);
      return candidates[scored[sample_index(weights, rng)].index];
    }
    case TrialType::Authenticity: {
      double mean = 0.0;
      for (const auto& c : candidates) mean += score(c);
      mean /= static_cast<double>(std::max<std::size_t>(candidates.size(), 1));
      return judge_shown(score(view.shown), mean, rng);
    }
    case TrialType::Choice:
      return pick_larger(score(view.candidates.at(0)), score(view.candidates.at(1)), rng);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Planted-probability subject

std::string deterministic_wrong_word(std::string_view surface) {
  auto cps = utf8::decode(surface);
  if (cps.empty()) return "x";
  std::rotate(cps.begin(), cps.begin() + 1, cps.end());
  if (utf8::fold(std::u32string_view(cps)) == utf8::fold(utf8::decode(surface))) cps.push_back(cps.front());
  return utf8::encode(cps);
}

Response planted_guess(const Trial& trial, const SuccessCurve& curve, std::uint64_t rng_seed) {
  const double p = curve(trial.target.length_chars);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "success curve left [0, 1] at length " + std::to_string(trial.target.length_chars));
  }
  Rng rng(rng_seed);
  const bool right = rng.bernoulli(p);
  const Response truth = oracle_guess(trial);
  if (right) return truth;
  if (trial.type == TrialType::Cloze) return deterministic_wrong_word(trial.target.surface);
  return 1 - std::get<int>(truth);
}

SuccessCurve parse_success_curve(std::string_view spec) {
  const auto colon = spec.find(':');
  auto bad = [&] { return Error(ErrorCode::InvalidArgument, "bad curve '" + std::string(spec) + "'"); };
  if (colon == std::string_view::npos) throw bad();
  const auto name = spec.substr(0, colon);
  const auto arg = spec.substr(colon + 1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), value);
  if (ec != std::errc() || ptr != arg.data() + arg.size()) throw bad();
  if (name == "pow2") return [value](int n) { return std::exp2(-value * n); };
  if (name == "const") {
    if (!(value >= 0.0 && value <= 1.0)) throw bad();
    return [value](int) { return value; };
  }
  throw bad();
}

// ---------------------------------------------------------------------------
// Subject factory

namespace {

class OracleSubject final : public Subject {
 public:
  explicit OracleSubject(SubjectProfile p) : profile_(std::move(p)) {}
  const SubjectProfile& profile() const override { return profile_; }
  Response respond(const Trial& trial, const Fragment&, std::uint64_t) const override { return oracle_guess(trial); }

 private:
  SubjectProfile profile_;
};

class FrequencySubject final : public Subject {
 public:
  FrequencySubject(SubjectProfile p, FrequencyDictionary dict, const Alphabet& alphabet)
      : profile_(std::move(p)), dict_(std::move(dict)), alphabet_(alphabet) {}
  const SubjectProfile& profile() const override { return profile_; }
  Response respond(const Trial& trial, const Fragment& fragment, std::uint64_t seed) const override {
    return frequency_guess(make_view(trial, fragment, alphabet_), dict_, seed);
  }

 private:
  SubjectProfile profile_;
  FrequencyDictionary dict_;
  Alphabet alphabet_;
};

class NgramSubject final : public Subject {
 public:
  NgramSubject(SubjectProfile p, const NgramModel& model, std::vector<std::string> candidates, const Alphabet& alphabet)
      : profile_(std::move(p)), model_(model), candidates_(std::move(candidates)), alphabet_(alphabet) {}
  const SubjectProfile& profile() const override { return profile_; }
  Response respond(const Trial& trial, const Fragment& fragment, std::uint64_t seed) const override {
    NgramGuessOptions opts;
    opts.top_k = profile_.top_k;
    opts.candidates = candidates_;
    return ngram_guess(make_view(trial, fragment, alphabet_), model_, seed, opts);
  }

 private:
  SubjectProfile profile_;
  const NgramModel& model_;
  std::vector<std::string> candidates_;
  Alphabet alphabet_;
};

class PlantedSubject final : public Subject {
 public:
  PlantedSubject(SubjectProfile p, SuccessCurve curve) : profile_(std::move(p)), curve_(std::move(curve)) {}
  const SubjectProfile& profile() const override { return profile_; }
  Response respond(const Trial& trial, const Fragment&, std::uint64_t seed) const override {
    return planted_guess(trial, curve_, seed);
  }

 private:
  SubjectProfile profile_;
  SuccessCurve curve_;
};

}  // namespace

std::unique_ptr<Subject> make_subject(const SubjectProfile& profile, const SubjectResources& resources) {
  auto need = [&](const void* ptr, const char* what) {
    if (ptr == nullptr) {
      throw Error(ErrorCode::ValidationFailure,
                  std::string(to_string(profile.kind)) + " subject needs " + what);
    }
  };
  switch (profile.kind) {
    case SubjectKind::Human:
      throw Error(ErrorCode::ValidationFailure, "human subjects cannot take part in simulations");
    case SubjectKind::Oracle:
      return std::make_unique<OracleSubject>(profile);
    case SubjectKind::Uniform:
      need(resources.dictionary, "a dictionary");
      need(resources.alphabet, "an alphabet");
      return std::make_unique<FrequencySubject>(profile, FrequencyDictionary::uniform(resources.dictionary->words()),
                                                *resources.alphabet);
    case SubjectKind::Frequency:
      need(resources.dictionary, "a dictionary");
      need(resources.alphabet, "an alphabet");
      return std::make_unique<FrequencySubject>(profile, *resources.dictionary, *resources.alphabet);
    case SubjectKind::Ngram: {
      need(resources.model, "a trained n-gram model");
      need(resources.alphabet, "an alphabet");
      std::vector<std::string> candidates;
      if (resources.dictionary != nullptr) candidates = resources.dictionary->words();
      return std::make_unique<NgramSubject>(profile, *resources.model, std::move(candidates), *resources.alphabet);
    }
    case SubjectKind::Planted:
      return std::make_unique<PlantedSubject>(profile, parse_success_curve(profile.curve));
  }
  throw Error(ErrorCode::UnknownSubjectKind, "unsupported subject kind");
}

}  // namespace cloze
