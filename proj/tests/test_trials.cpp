#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "cloze/error.hpp"
#include "cloze/rng.hpp"
#include "cloze/trials.hpp"
#include "cloze/utf8.hpp"
#include "support/test_support.hpp"

namespace cloze {
namespace {

Fragment make_fragment(const std::string& text, TextKind kind = TextKind::Poetry) {
  Fragment f;
  f.text = text;
  f.kind = kind;
  f.id = content_hash(text);
  f.title = "t";
  f.author = "a";
  return f;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

struct Fixture : ::testing::Test {
  Fragment fragment = make_fragment("Там песня льётся, ветер гонит их.");
  std::vector<WordToken> words = extract_words(fragment.text, Alphabet::cyrillic(), 5, fragment.id);
  const WordToken& песня() const { return words.at(0); }
};

TEST_F(Fixture, CorpusAsExpected) {
  ASSERT_EQ(words.size(), 4u);
  EXPECT_EQ(words[0].surface, "песня");
  EXPECT_EQ(words[1].surface, "льётся");
  EXPECT_EQ(words[2].surface, "ветер");
  EXPECT_EQ(words[3].surface, "гонит");
}

TEST_F(Fixture, SelectTargetSingleWord) {
  const std::vector<WordToken> one = {words[1]};
  for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_EQ(select_target(fragment, one, seed), words[1]);
}

TEST_F(Fixture, SelectTargetEmpty) {
  EXPECT_EQ(code_of([&] { select_target(fragment, {}, 1); }), ErrorCode::NoEligibleWords);
}

TEST_F(Fixture, SelectTargetIsDeterministic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(&select_target(fragment, words, seed), &select_target(fragment, words, seed));
  }
}

TEST(SelectTarget, UniformOverTenWords) {
  // p = 0.1, n = 10,000: mean 1000, sd 30; the ±150 band is five sd wide.
  const auto fragment = make_fragment("первое второе третье четвёртое пятое шестое седьмое восьмое девятое десятое");
  const auto words = extract_words(fragment.text, Alphabet::cyrillic(), 5, fragment.id);
  ASSERT_EQ(words.size(), 10u);
  std::array<int, 10> hits{};
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto& w = select_target(fragment, words, derive_seed(99, seed));
    ++hits[static_cast<std::size_t>(&w - words.data())];
  }
  for (int h : hits) {
    EXPECT_GE(h, 850);
    EXPECT_LE(h, 1150);
  }
  // Frozen from tests/oracles/prng_trace.py: Rng(5).below(10) == 5.
  EXPECT_EQ(select_target(fragment, words, 5).surface, "шестое");
}

TEST_F(Fixture, TypeOneHasNoDecoy) {
  const ReplacementPool pool;
  const auto t = make_trial(fragment, песня(), TrialType::Cloze, pool, 1, {"t1", "now", {}});
  EXPECT_FALSE(t.decoy.has_value());
  EXPECT_EQ(t.id, "t1");
  EXPECT_EQ(t.fragment_id, fragment.id);
  EXPECT_EQ(t.created_at, "now");
}

TEST_F(Fixture, TypeThreeHandTrace) {
  ReplacementPool pool;
  ASSERT_TRUE(pool.add(TargetKey::of(песня()), "ветер", песня().surface));
  // Rng(42): below(1) consumes one output, then the coin reads the top bit of
  // the second output 0x6104d9866d113a7e, which is 0.
  const auto t42 = make_trial(fragment, песня(), TrialType::Choice, pool, 42, {"t", "", {}});
  EXPECT_EQ(t42.decoy, "ветер");
  EXPECT_FALSE(t42.original_first);
  // Rng(0): second output 0xbf6e1f784956452a has its top bit set.
  const auto t0 = make_trial(fragment, песня(), TrialType::Choice, pool, 0, {"t", "", {}});
  EXPECT_EQ(t0.decoy, "ветер");
  EXPECT_TRUE(t0.original_first);
}

TEST_F(Fixture, TypeTwoHandTrace) {
  ReplacementPool pool;
  pool.add(TargetKey::of(песня()), "ветер", песня().surface);
  pool.add(TargetKey::of(песня()), "весна", песня().surface);
  // Frozen from the oracle: seed 1 shows the original, seed 2 shows decoy 0
  // of the sorted pool {"весна", "ветер"}.
  const auto t1 = make_trial(fragment, песня(), TrialType::Authenticity, pool, 1, {"t", "", {}});
  EXPECT_TRUE(t1.shows_original());
  EXPECT_FALSE(t1.decoy.has_value());
  const auto t2 = make_trial(fragment, песня(), TrialType::Authenticity, pool, 2, {"t", "", {}});
  EXPECT_FALSE(t2.shows_original());
  EXPECT_EQ(t2.decoy, "весна");
}

TEST_F(Fixture, NoDecoyAvailable) {
  const ReplacementPool pool;
  EXPECT_EQ(code_of([&] { make_trial(fragment, песня(), TrialType::Authenticity, pool, 1, {"t", "", {}}); }),
            ErrorCode::NoDecoyAvailable);
  EXPECT_EQ(code_of([&] { make_trial(fragment, песня(), TrialType::Choice, pool, 1, {"t", "", {}}); }),
            ErrorCode::NoDecoyAvailable);
  // A fallback containing only the target itself does not help.
  const std::vector<std::string> self = {"Песня"};
  EXPECT_EQ(code_of([&] { make_trial(fragment, песня(), TrialType::Choice, pool, 1, {"t", "", self}); }),
            ErrorCode::NoDecoyAvailable);
}

TEST_F(Fixture, FallbackDictionaryFeedsColdStart) {
  const ReplacementPool pool;
  const std::vector<std::string> fallback = {"песня", "дорога", "облако"};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = make_trial(fragment, песня(), TrialType::Choice, pool, seed, {"t", "", fallback});
    ASSERT_TRUE(t.decoy.has_value());
    EXPECT_NE(utf8::fold(*t.decoy), "песня");
  }
}

TEST_F(Fixture, TypeThreeOrderIsFair) {
  // 4000 fair coins: mean 2000, sd 31.6; 3 sd band.
  const std::vector<std::string> fallback = {"дорога"};
  const ReplacementPool pool;
  int first = 0;
  for (std::uint64_t i = 0; i < 4000; ++i) {
    if (make_trial(fragment, песня(), TrialType::Choice, pool, derive_seed(7, i), {"t", "", fallback}).original_first) ++first;
  }
  EXPECT_NEAR(first, 2000, 3 * std::sqrt(1000.0));
}

TEST(RenderTrial, MaskWidthIndependentOfTargetLength) {
  const auto a = make_fragment("Это слово здесь.");
  const auto b = make_fragment("Это достопримечательность здесь.");
  const auto wa = extract_words(a.text, Alphabet::cyrillic(), 5, a.id);
  const auto wb = extract_words(b.text, Alphabet::cyrillic(), 5, b.id);
  ASSERT_EQ(wa.at(0).length_chars, 5);
  ASSERT_EQ(wb.at(0).length_chars, 21);
  const ReplacementPool pool;
  const auto ra = render_trial(make_trial(a, wa[0], TrialType::Cloze, pool, 0, {}), a);
  const auto rb = render_trial(make_trial(b, wb[0], TrialType::Cloze, pool, 0, {}), b);
  EXPECT_EQ(ra.text, "Это " + std::string(kMask) + " здесь.");
  EXPECT_EQ(ra.text, rb.text);
}

TEST_F(Fixture, RenderTypeTwoOriginalOnlyAddsDelimiters) {
  ReplacementPool pool;
  const auto t = make_trial(fragment, песня(), TrialType::Authenticity, pool, 1, {"t", "", std::vector<std::string>{"дорога"}});
  ASSERT_TRUE(t.shows_original());
  const auto r = render_trial(t, fragment);
  EXPECT_EQ(r.text, "Там [[песня]] льётся, ветер гонит их.");
  EXPECT_EQ(r.shown, "песня");
  std::string stripped = r.text;
  stripped.erase(stripped.find(kHighlightOpen), kHighlightOpen.size());
  stripped.erase(stripped.find(kHighlightClose), kHighlightClose.size());
  EXPECT_EQ(stripped, fragment.text);
}

TEST_F(Fixture, RenderTypeThreeListsBothCandidatesOnce) {
  const auto target = words[3];  // "гонит"
  ReplacementPool pool;
  pool.add(TargetKey::of(target), "манит", target.surface);
  for (std::uint64_t seed : {0u, 42u}) {
    const auto t = make_trial(fragment, target, TrialType::Choice, pool, seed, {"t", "", {}});
    const auto r = render_trial(t, fragment);
    const auto shown = r.display();
    for (const std::string& w : {std::string("гонит"), std::string("манит")}) {
      const auto first = shown.find(w);
      ASSERT_NE(first, std::string::npos);
      EXPECT_EQ(shown.find(w, first + 1), std::string::npos);
    }
    EXPECT_EQ(r.candidates.at(t.original_first ? 0 : 1), "гонит");
  }
}

TEST_F(Fixture, ScoreTypeOne) {
  const ReplacementPool pool;
  const auto t = make_trial(fragment, песня(), TrialType::Cloze, pool, 0, {"t", "", {}});
  EXPECT_TRUE(score_guess(t, std::string("ПЕСНЯ")).correct);
  EXPECT_TRUE(score_guess(t, std::string("  «Песня»! ")).correct);
  EXPECT_FALSE(score_guess(t, std::string("ветер")).correct);
  EXPECT_FALSE(score_guess(t, std::string("песни")).correct);
  EXPECT_EQ(code_of([&] { score_guess(t, std::string("   ")); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([&] { score_guess(t, 0); }), ErrorCode::MalformedResponse);
}

TEST_F(Fixture, ScoreTypeThreeOrderBookkeeping) {
  Trial t;
  t.id = "x";
  t.type = TrialType::Choice;
  t.target = песня();
  t.decoy = "ветер";
  t.original_first = false;
  EXPECT_TRUE(score_guess(t, 1).correct);
  EXPECT_FALSE(score_guess(t, 0).correct);
  t.original_first = true;
  EXPECT_TRUE(score_guess(t, 0).correct);
  EXPECT_EQ(code_of([&] { score_guess(t, 2); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([&] { score_guess(t, -1); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([&] { score_guess(t, std::string("ветер")); }), ErrorCode::MalformedResponse);
}

TEST_F(Fixture, ScoreTypeTwo) {
  Trial t;
  t.type = TrialType::Authenticity;
  t.target = песня();
  EXPECT_TRUE(score_guess(t, kChoiceOriginal).correct);
  EXPECT_FALSE(score_guess(t, kChoiceReplaced).correct);
  t.decoy = "ветер";
  EXPECT_FALSE(score_guess(t, kChoiceOriginal).correct);
  EXPECT_TRUE(score_guess(t, kChoiceReplaced).correct);
}

TEST_F(Fixture, UpdatePool) {
  const PoolPolicy policy;
  ReplacementPool pool;
  const auto t = make_trial(fragment, песня(), TrialType::Cloze, pool, 0, {"t", "", {}});
  const auto key = TargetKey::of(t.target);

  EXPECT_FALSE(update_pool(pool, score_guess(t, std::string("песня")), t, policy));
  EXPECT_EQ(pool.size(), 0u);

  EXPECT_TRUE(update_pool(pool, score_guess(t, std::string("Дорога")), t, policy));
  EXPECT_EQ(pool.entries(key), (std::set<std::string>{"дорога"}));

  // Normalization variants of the target, short words and non-letters are
  // never added.
  for (const std::string bad : {" песня ", "ПЕСНЯ", "«песня»", "песня!", "\tПесНя\n", "дом", "до-рога", "song5", "песня1"}) {
    GuessRecord rec;
    rec.trial_id = t.id;
    rec.response = bad;
    rec.correct = false;  // forced, to exercise the target-equality guard
    EXPECT_FALSE(update_pool(pool, rec, t, policy)) << bad;
  }
  EXPECT_EQ(pool.size(), 1u);

  // Type 2/3 records never feed the pool.
  Trial t3 = t;
  t3.type = TrialType::Choice;
  t3.decoy = "дорога";
  EXPECT_FALSE(update_pool(pool, score_guess(t3, 1), t3, policy));
}

TEST(Pool, EntriesNeverEqualTargets) {
  const PoolPolicy policy;
  auto corpus = testing::synthetic_corpus(11, 10, 30);
  ReplacementPool pool;
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const auto& f = corpus[rng.below(corpus.size())];
    const auto words = extract_words(f.text, policy.alphabet, 5, f.id);
    const auto& target = select_target(f, words, rng.next());
    const auto t = make_trial(f, target, TrialType::Cloze, pool, rng.next(), {"t", "", {}});
    std::string guess = rng.coin() ? words[rng.below(words.size())].surface : utf8::fold(target.surface);
    if (rng.coin()) guess = " " + guess + ".";
    update_pool(pool, score_guess(t, guess), t, policy);
    for (const auto& [key, entries] : pool.all()) {
      const auto& frag = *std::find_if(corpus.begin(), corpus.end(), [&](const Fragment& c) { return c.id == key.fragment_id; });
      const auto cps = utf8::decode(frag.text);
      const auto surface = utf8::encode(std::u32string_view(cps).substr(key.start, key.end - key.start));
      for (const auto& e : entries) ASSERT_NE(e, utf8::fold(surface));
    }
  }
  EXPECT_GT(pool.size(), 0u);
}

}  // namespace
}  // namespace cloze
