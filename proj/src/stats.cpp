#include "cloze/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cloze/error.hpp"

namespace cloze::stats {

namespace {

void check_counts(std::int64_t n_correct, std::int64_t n_trials) {
  if (n_trials < 1) throw Error(ErrorCode::InvalidArgument, "n_trials must be at least 1");
  if (n_correct < 0 || n_correct > n_trials) {
    throw Error(ErrorCode::InvalidArgument, "n_correct must lie in [0, n_trials]");
  }
}

// Neumaier compensated sum.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

double unpredictability(std::int64_t n_correct, std::int64_t n_trials) {
  check_counts(n_correct, n_trials);
  if (n_correct == 0) throw Error(ErrorCode::AllMissed, "no correct guesses in " + std::to_string(n_trials) + " trials");
  // log2 of the ratio, negated by subtraction so p = 1 gives +0 rather than -0.
  return 0.0 - std::log2(static_cast<double>(n_correct) / static_cast<double>(n_trials));
}

double entropy_mean_log(std::span<const PerWordStats> per_word, double zero_guess_constant) {
  if (per_word.empty()) throw Error(ErrorCode::InvalidArgument, "entropy of an empty word list");
  if (!(zero_guess_constant > 0.0)) throw Error(ErrorCode::InvalidArgument, "zero-guess constant must be positive");
  double sum = 0.0;
  for (const auto& w : per_word) {
    check_counts(w.n_correct, w.n_trials);
    sum += w.n_correct > 0 ? -std::log2(w.p_hat()) : zero_guess_constant;
  }
  return sum / static_cast<double>(per_word.size());
}

Interval binomial_ci(std::int64_t n_correct, std::int64_t n_trials, double z) {
  check_counts(n_correct, n_trials);
  if (!(z > 0.0)) throw Error(ErrorCode::InvalidArgument, "z must be positive");
  const double p = static_cast<double>(n_correct) / static_cast<double>(n_trials);
  const double half = z * std::sqrt(p * (1.0 - p) / static_cast<double>(n_trials));
  return {std::clamp(p - half, 0.0, 1.0), std::clamp(p + half, 0.0, 1.0)};
}

std::optional<int> length_of(const AnalysisRecord& r, LengthUnit unit) {
  if (unit == LengthUnit::Chars) return r.length_chars;
  return r.length_syllables;
}

std::vector<GroupStats> group_by_length(std::span<const AnalysisRecord> records, LengthUnit unit,
                                        const RecordFilter& filter, double z) {
  std::map<int, std::pair<std::int64_t, std::int64_t>> tally;  // length -> (trials, correct)
  for (const auto& r : records) {
    if (!filter.accepts(r)) continue;
    const auto len = length_of(r, unit);
    if (!len) continue;
    auto& [trials, correct] = tally[*len];
    ++trials;
    if (r.correct) ++correct;
  }
  std::vector<GroupStats> out;
  out.reserve(tally.size());
  for (const auto& [len, counts] : tally) {
    GroupStats g;
    g.length = len;
    g.unit = unit;
    g.n_trials = counts.first;
    g.n_correct = counts.second;
    g.p_hat = static_cast<double>(g.n_correct) / static_cast<double>(g.n_trials);
    if (g.n_correct > 0) g.U = unpredictability(g.n_correct, g.n_trials);
    const auto ci = binomial_ci(g.n_correct, g.n_trials, z);
    g.ci_low = ci.low;
    g.ci_high = ci.high;
    out.push_back(g);
  }
  return out;
}

std::size_t excluded_records(std::span<const AnalysisRecord> records, LengthUnit unit, const RecordFilter& filter) {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [&](const AnalysisRecord& r) {
    return filter.accepts(r) && !length_of(r, unit);
  }));
}

std::vector<PerWordStats> per_word_stats(std::span<const AnalysisRecord> records, const RecordFilter& filter) {
  std::map<TargetKey, PerWordStats> by_word;
  for (const auto& r : records) {
    if (!filter.accepts(r)) continue;
    auto& w = by_word[r.word];
    w.key = r.word;
    ++w.n_trials;
    if (r.correct) ++w.n_correct;
  }
  std::vector<PerWordStats> out;
  out.reserve(by_word.size());
  for (auto& [key, w] : by_word) out.push_back(std::move(w));
  return out;
}

std::map<int, double> entropy_by_length(std::span<const AnalysisRecord> records, LengthUnit unit,
                                        const RecordFilter& filter, double zero_guess_constant) {
  std::map<int, std::vector<AnalysisRecord>> buckets;
  for (const auto& r : records) {
    if (!filter.accepts(r)) continue;
    if (const auto len = length_of(r, unit)) buckets[*len].push_back(r);
  }
  std::map<int, double> out;
  for (const auto& [len, rs] : buckets) {
    const auto words = per_word_stats(rs, filter);
    out[len] = entropy_mean_log(words, zero_guess_constant);
  }
  return out;
}

double unpredictability_variance(std::int64_t n_correct, std::int64_t n_trials) {
  check_counts(n_correct, n_trials);
  if (n_correct == 0) throw Error(ErrorCode::AllMissed, "variance of U is undefined with no correct guesses");
  const double n = static_cast<double>(n_trials);
  const double p = std::min(static_cast<double>(n_correct) / n, 1.0 - 0.5 / n);
  const double ln2 = std::numbers::ln2;
  return (1.0 - p) / (p * n * ln2 * ln2);
}

LinearFit linear_fit(std::span<const GroupStats> groups, FitRange fit_range, std::int64_t min_bucket_trials) {
  struct Point {
    double x, y, w;
  };
  std::vector<Point> pts;
  for (const auto& g : groups) {
    if (g.length < fit_range.min || g.length > fit_range.max) continue;
    if (g.n_trials < min_bucket_trials || !g.U) continue;
    pts.push_back({static_cast<double>(g.length), *g.U, 1.0 / unpredictability_variance(g.n_correct, g.n_trials)});
  }
  const bool spread = std::any_of(pts.begin(), pts.end(), [&](const Point& p) { return p.x != pts.front().x; });
  if (pts.size() < 2 || !spread) {
    throw Error(ErrorCode::InsufficientBuckets, std::to_string(pts.size()) + " bucket(s) qualify for the fit in range " +
                                                    std::to_string(fit_range.min) + ":" + std::to_string(fit_range.max));
  }

  double sw = 0, swx = 0, swy = 0;
  for (const auto& p : pts) {
    sw += p.w;
    swx += p.w * p.x;
    swy += p.w * p.y;
  }
  const double mx = swx / sw;
  const double my = swy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : pts) {
    sxx += p.w * (p.x - mx) * (p.x - mx);
    sxy += p.w * (p.x - mx) * (p.y - my);
    syy += p.w * (p.y - my) * (p.y - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (const auto& p : pts) {
    const double r = p.y - (fit.intercept + fit.slope * p.x);
    ss_res += p.w * r * r;
  }
  fit.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  fit.fit_range = fit_range;
  fit.n_buckets = pts.size();
  return fit;
}

std::vector<double> word_entropy_from_letter_entropies(std::span<const double> letter_bits) {
  if (letter_bits.empty()) throw Error(ErrorCode::InvalidArgument, "no letter entropies given");
  std::vector<double> out;
  out.reserve(letter_bits.size());
  double total = 0.0;
  for (double h : letter_bits) {
    if (!(h >= 0.0)) throw Error(ErrorCode::InvalidArgument, "letter entropies must be non-negative");
    total += h;
    out.push_back(total);
  }
  return out;
}

double zipf_word_entropy(std::span<const double> rank_probabilities) {
  Accumulator mass;
  for (double p : rank_probabilities) {
    if (!(p > 0.0)) throw Error(ErrorCode::NotNormalized, "probabilities must be positive");
    mass.add(p);
  }
  if (std::abs(mass.value() - 1.0) > 1e-6) {
    throw Error(ErrorCode::NotNormalized, "probabilities sum to " + std::to_string(mass.value()));
  }
  Accumulator h;
  for (double p : rank_probabilities) h.add(-p * std::log2(p));
  return h.value();
}

std::vector<double> zipf_rank_probabilities(std::size_t ranks) {
  if (ranks == 0) throw Error(ErrorCode::InvalidArgument, "need at least one rank");
  Accumulator harmonic;
  for (std::size_t r = 1; r <= ranks; ++r) harmonic.add(1.0 / static_cast<double>(r));
  std::vector<double> out(ranks);
  for (std::size_t r = 1; r <= ranks; ++r) out[r - 1] = 1.0 / (static_cast<double>(r) * harmonic.value());
  return out;
}

double bpc_to_bpw(double bits_per_char, double avg_word_len_chars) {
  if (!(bits_per_char > 0.0) || !(avg_word_len_chars > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "bits per char and word length must be positive");
  }
  return bits_per_char * avg_word_len_chars;
}

double ergodic_sequence_probability(double bits_per_char, int length) {
  if (!(bits_per_char >= 0.0) || length < 1) {
    throw Error(ErrorCode::InvalidArgument, "need H >= 0 and length >= 1");
  }
  return std::exp2(-bits_per_char * static_cast<double>(length));
}

}  // namespace cloze::stats
