// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cloze/analysis.hpp"
#include "cloze/experiment.hpp"
#include "cloze/service.hpp"
#include "cloze/stats.hpp"
#include "support/naive_stats.hpp"
#include "support/test_support.hpp"

namespace {

using namespace cloze;

constexpr double kUnitTol = 1e-12;
constexpr double kJensenEqualityTol = 1e-9;
constexpr int kJensenCases = 1000;
constexpr std::int64_t kSlopeTrials = 50000;
constexpr double kPlantedSlope = 0.3;
constexpr double kSlopeTol = 0.05;
constexpr double kMinRSquared = 0.95;
constexpr double kSlopeSecondsBudget = 120.0;
constexpr std::int64_t kOracleTrials = 1000;
constexpr double kCiTol = 1e-3;
constexpr double kCiRatioTol = 1e-9;
constexpr int kBruteForceCases = 500;
constexpr std::size_t kBruteForceMaxRecords = 20;
constexpr double kBruteForceTol = 1e-12;
constexpr int kLeakageTrials = 10000;
constexpr double kPrefixTol = 1e-12;

struct Outcome {
  bool ok = false;
  std::string detail;
};

Outcome unit_checks() {
  const double a = stats::unpredictability(10, 10), b = stats::unpredictability(5, 10), c = stats::unpredictability(3, 24);
  const bool ok = std::abs(a) <= kUnitTol && std::abs(b - 1) <= kUnitTol && std::abs(c - 3) <= kUnitTol;
  char buf[128];
  std::snprintf(buf, sizeof buf, "U(10,10)=%.3g U(5,10)=%.17g U(3,24)=%.17g", a, b, c);
  return {ok, buf};
}

Outcome jensen() {
  Rng rng(20240601);
  int violations = 0, equality_misses = 0, equal_cases = 0;
  for (int c = 0; c < kJensenCases; ++c) {
    const bool equal = c % 4 == 0;
    const auto words = 1 + rng.below(12);
    const auto n = 1 + static_cast<std::int64_t>(rng.below(30));
    const auto k0 = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
    std::vector<stats::PerWordStats> ws;
    std::int64_t K = 0, N = 0;
    for (std::size_t i = 0; i < words; ++i) {
      stats::PerWordStats w;
      w.key = {"f", i, i + 1};
      // Balanced tables: every word has n trials (scaled in the equal case).
      const auto scale = equal ? 1 + static_cast<std::int64_t>(rng.below(4)) : 1;
      w.n_trials = n * scale;
      w.n_correct = equal ? k0 * scale : 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
      K += w.n_correct;
      N += w.n_trials;
      ws.push_back(w);
    }
    const double H = stats::entropy_mean_log(ws, stats::kWildGuessBits);
    const double U = stats::unpredictability(K, N);
    if (H < U - kUnitTol) ++violations;
    if (equal) {
      ++equal_cases;
      if (std::abs(H - U) > kJensenEqualityTol) ++equality_misses;
    }
  }
  return {violations == 0 && equality_misses == 0,
          std::to_string(kJensenCases) + " tables, " + std::to_string(violations) + " violations, " +
              std::to_string(equality_misses) + "/" + std::to_string(equal_cases) + " equality misses"};
}

Outcome bits_per_word() {
  const double w = stats::bpc_to_bpw(1.72, 4.5);
  const double gap = 11.82 - w;
  char buf[96];
  std::snprintf(buf, sizeof buf, "bpw=%.17g gap=%.17g", w, gap);
  return {w == 7.74 && gap == 4.08, buf};
}

std::unique_ptr<Subject> simple_subject(SubjectKind kind, const std::string& curve = "pow2:0.3") {
  static const Alphabet alphabet = Alphabet::cyrillic();
  SubjectProfile p;
  p.kind = kind;
  p.subject_id = std::string(to_string(kind));
  p.curve = curve;
  return make_subject(p, {&alphabet, nullptr, nullptr});
}

Outcome slope_recovery() {
  const auto start = std::chrono::steady_clock::now();
  auto log = EventLog::in_memory();
  Experiment exp;
  for (const auto& f : testing::synthetic_corpus(1, 200, 40, 5, 14)) exp.add_fragment(log, f);
  simulate(exp, log, *simple_subject(SubjectKind::Planted, "pow2:0.3"), {kSlopeTrials, 2024, kClozeOnly});
  const auto result = analyze(log.replay(), make_analysis_options("chars", "all", "1", "5:14"));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!result.fit) return {false, "no fit: " + result.fit_error};
  const auto& fit = *result.fit;
  char buf[160];
  std::snprintf(buf, sizeof buf, "slope=%.4f r2=%.4f buckets=%zu n=%zu %.1fs", fit.slope, fit.r_squared, fit.n_buckets,
                result.n_records, seconds);
  const bool ok = std::abs(fit.slope - kPlantedSlope) <= kSlopeTol && fit.r_squared >= kMinRSquared &&
                  seconds < kSlopeSecondsBudget && result.n_records == static_cast<std::size_t>(kSlopeTrials);
  return {ok, buf};
}

Outcome oracle_end_to_end() {
  auto log = EventLog::in_memory();
  Experiment exp;
  for (const auto& f : testing::synthetic_corpus(2, 30, 25)) exp.add_fragment(log, f);
  const auto report = simulate(exp, log, *simple_subject(SubjectKind::Oracle), {kOracleTrials, 7, kEqualMix});
  bool ok = report.n_correct == kOracleTrials;
  std::size_t buckets = 0;
  for (const char* unit : {"chars", "syllables"}) {
    for (const char* type : {"1", "2", "3"}) {
      for (const auto& g : analyze(log.replay(), make_analysis_options(unit, "all", type)).groups) {
        ++buckets;
        ok = ok && g.p_hat == 1.0 && g.U && *g.U == 0.0;
      }
    }
  }
  return {ok && buckets > 0, std::to_string(report.n_correct) + "/" + std::to_string(report.n_trials) + " correct, " +
                                 std::to_string(buckets) + " buckets with U=0"};
}

Outcome ci_numerics() {
  const auto ci = stats::binomial_ci(50, 100, 1.96);
  const auto w1 = stats::binomial_ci(30, 100).high - stats::binomial_ci(30, 100).low;
  const auto w2 = stats::binomial_ci(60, 200).high - stats::binomial_ci(60, 200).low;
  const double ratio = w2 / w1;
  char buf[128];
  std::snprintf(buf, sizeof buf, "(%.6f, %.6f) width ratio %.15f", ci.low, ci.high, ratio);
  const bool ok = std::abs(ci.low - 0.402) <= kCiTol && std::abs(ci.high - 0.598) <= kCiTol &&
                  std::abs(ratio - 1 / std::sqrt(2.0)) <= kCiRatioTol;
  return {ok, buf};
}

Outcome brute_force() {
  Rng rng(99);
  int mismatches = 0;
  for (int c = 0; c < kBruteForceCases; ++c) {
    std::vector<stats::AnalysisRecord> rs(rng.below(kBruteForceMaxRecords + 1));
    for (auto& r : rs) {
      r.length_chars = 5 + static_cast<int>(rng.below(4));
      const std::size_t id = rng.below(6) * 100 + static_cast<std::size_t>(r.length_chars);
      r.word = {"f", id, id + static_cast<std::size_t>(r.length_chars)};
      if (id / 100 != 5) r.length_syllables = 1 + r.length_chars / 3;
      r.kind = rng.coin() ? TextKind::Prose : TextKind::Poetry;
      r.trial_type = rng.below(4) == 0 ? TrialType::Authenticity : TrialType::Cloze;
      r.correct = rng.coin();
    }
    for (auto unit : {LengthUnit::Chars, LengthUnit::Syllables}) {
      const stats::RecordFilter filter;
      const auto got = stats::group_by_length(rs, unit, filter, 1.0);
      const auto want = testing::naive::buckets(rs, unit, filter, 1.0);
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].length == want[i].length && got[i].n_trials == want[i].n && got[i].n_correct == want[i].k &&
               got[i].U.has_value() == want[i].U.has_value() &&
               (!want[i].U || std::abs(*got[i].U - *want[i].U) <= kBruteForceTol) &&
               std::abs(got[i].ci_low - want[i].lo) <= kBruteForceTol &&
               std::abs(got[i].ci_high - want[i].hi) <= kBruteForceTol;
        for (double constant : {stats::kWildGuessBits, stats::kLowBoundBits}) {
          const auto H = stats::entropy_by_length(rs, unit, filter, constant);
          const auto h = testing::naive::entropy(rs, unit, filter, want[i].length, constant);
          same = same && h && H.contains(want[i].length) && std::abs(H.at(want[i].length) - *h) <= kBruteForceTol;
        }
      }
      if (!same) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(kBruteForceCases) + " record sets, " + std::to_string(mismatches) + " mismatches"};
}

Outcome determinism() {
  auto run = [] {
    auto log = EventLog::in_memory();
    Experiment exp;
    for (const auto& f : testing::synthetic_corpus(3, 40, 25)) exp.add_fragment(log, f);
    simulate(exp, log, *simple_subject(SubjectKind::Planted), {2000, 42, kEqualMix});
    std::string lines;
    for (const auto& e : log.replay()) lines += serialize_event_without_timestamp(e) + "\n";
    return std::make_pair(lines, log.replay());
  };
  const auto [a, events] = run();
  const auto [b, unused] = run();
  testing::TempDir dir;
  {
    auto file = EventLog::open(dir / "events.jsonl");
    for (const auto& e : events) file.append(e.kind, e.payload);
  }
  const auto replayed = EventLog::read(dir / "events.jsonl");
  bool csv_same = true;
  for (const char* unit : {"chars", "syllables"}) {
    const auto opts = make_analysis_options(unit, "all", "1");
    csv_same = csv_same && to_csv(analyze(events, opts)) == to_csv(analyze(replayed, opts));
  }
  const bool state_same = Experiment::replay(events).state_hash() == Experiment::replay(replayed).state_hash();
  return {a == b && csv_same && state_same,
          std::to_string(events.size()) + " events, logs " + (a == b ? "identical" : "differ") + ", replay CSV " +
              (csv_same ? "identical" : "differs")};
}

Outcome leakage() {
  auto log = EventLog::in_memory();
  Experiment exp;
  for (const auto& f : testing::synthetic_corpus(4, 100, 30)) exp.add_fragment(log, f);
  Service service(exp, log, {5});
  const auto session = service.create_session(R"({"subject": {"kind": "human"}, "type_mix": [1, 0, 0]})");
  const auto sid = session.body.at("session_id").get<std::string>();
  int leaks = 0, served = 0;
  for (int i = 0; i < kLeakageTrials; ++i) {
    const auto r = service.next_trial(sid);
    if (r.status != 200) return {false, "next_trial failed: " + r.body.dump()};
    const auto body = r.body.dump();
    const auto& t = exp.trials().at(r.body.at("trial_id").get<std::string>()).trial;
    ++served;
    if (body.find(t.target.surface) != std::string::npos) ++leaks;
  }
  return {leaks == 0 && served == kLeakageTrials,
          std::to_string(served) + " type-1 responses, " + std::to_string(leaks) + " contain the target"};
}

Outcome prefix_sums() {
  constexpr double c = 0.65;
  std::vector<double> h = {4.0, 2.6, 1.5, 0.9};
  for (int i = 4; i < 16; ++i) h.push_back(c);
  const auto cum = stats::word_entropy_from_letter_entropies(h);
  double worst = 0;
  for (std::size_t i = 4; i < cum.size(); ++i) worst = std::max(worst, std::abs(cum[i] - cum[i - 1] - c));
  char buf[96];
  std::snprintf(buf, sizeof buf, "max |diff - %.2f| = %.3g over %zu positions", c, worst, cum.size() - 4);
  return {worst <= kPrefixTol, buf};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"unpredictability unit values", unit_checks},
      {"per-word entropy bounds pooled U", jensen},
      {"bits-per-word arithmetic", bits_per_word},
      {"planted slope recovery", slope_recovery},
      {"oracle end to end", oracle_end_to_end},
      {"binomial CI numerics", ci_numerics},
      {"brute-force equivalence", brute_force},
      {"determinism and replay", determinism},
      {"type-1 leakage", leakage},
      {"prefix-sum reconstruction", prefix_sums},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-34s %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
    if (!o.ok) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
