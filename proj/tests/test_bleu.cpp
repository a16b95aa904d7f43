#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rallycast/bleu.hpp"

using namespace rallycast;

namespace {

std::string random_sentence(std::mt19937_64& rng, int min_len, int max_len) {
  static const std::vector<std::string> vocab{"the", "cat", "sat", "on", "mat", "federer", "hits", "a",
                                              "forehand", "down", "line", "nadal"};
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::string s;
  for (int i = len(rng); i > 0; --i) s += vocab[rng() % vocab.size()] + (i > 1 ? " " : "");
  return s;
}

} // namespace

TEST(Bleu, ClippedUnigramExample) {
  const BleuReport r = bleu(Tokens{"the", "the", "the"}, {Tokens{"the", "cat"}}, 1);
  EXPECT_EQ(r.precisions[0], 1.0 / 3.0);
}

TEST(Bleu, IdenticalSentenceScoresOne) {
  const BleuReport r = bleu("federer hits a forehand down the line", {"federer hits a forehand down the line"});
  for (double c : r.cumulative) EXPECT_DOUBLE_EQ(c, 1.0);
  EXPECT_DOUBLE_EQ(r.brevity_penalty, 1.0);
}

TEST(Bleu, MatchesReferenceImplementation) {
  std::mt19937_64 rng(51);
  for (int i = 0; i < 25; ++i) {
    const std::string cand = random_sentence(rng, 1, 12);
    std::vector<std::string> refs;
    for (int r = 0, n = 1 + i % 3; r < n; ++r) refs.push_back(random_sentence(rng, 2, 14));
    const BleuReport got = bleu(cand, refs);
    std::vector<std::vector<std::string>> rw;
    for (const auto& r : refs) rw.push_back(oracle::words(r));
    const oracle::Bleu want = oracle::bleu(oracle::words(cand), rw, 4);
    EXPECT_NEAR(got.brevity_penalty, want.bp, 1e-12) << i;
    for (int n = 0; n < 4; ++n) {
      EXPECT_NEAR(got.precisions[n], want.p[n], 1e-12) << i;
      EXPECT_NEAR(got.cumulative[n], want.cumulative[n], 1e-12) << i;
    }
  }
}

TEST(Bleu, BrevityPenaltyUsesClosestReference) {
  const BleuReport r = bleu(Tokens{"a", "b"}, {Tokens{"a", "b", "c", "d", "e"}, Tokens{"a", "b", "c"}}, 1);
  EXPECT_NEAR(r.brevity_penalty, std::exp(1.0 - 3.0 / 2.0), 1e-15);
  // Equidistant references: the shorter wins, so no penalty here.
  const BleuReport t = bleu(Tokens{"a", "b", "c"}, {Tokens{"a", "b"}, Tokens{"a", "b", "c", "d"}}, 1);
  EXPECT_DOUBLE_EQ(t.brevity_penalty, 1.0);
}

TEST(Bleu, MissingHigherOrderMatchesZeroTheScore) {
  const BleuReport r = bleu("cat the", {"the cat"});
  EXPECT_DOUBLE_EQ(r.cumulative[0], 1.0);
  EXPECT_DOUBLE_EQ(r.cumulative[1], 0.0);
  EXPECT_DOUBLE_EQ(r.cumulative[3], 0.0);
}

TEST(Bleu, RejectsEmptyInput) {
  EXPECT_THROW(bleu(Tokens{}, {Tokens{"a"}}), UsageError);
  EXPECT_THROW(bleu(Tokens{"a"}, {}), UsageError);
  EXPECT_THROW(bleu(Tokens{"a"}, {Tokens{"a"}}, 0), UsageError);
}

TEST(Bleu, TopKAveragesFirstCandidates) {
  const std::string ref = "federer hits a forehand";
  const std::vector<std::string> cands{"federer hits a forehand", "nadal", "federer hits", "x", "y", "z"};
  const TopKBleu b = evaluate_topk(cands, ref, 1, 3);
  EXPECT_EQ(b.count, 3u);
  const double want = (1.0 + 0.0 + std::exp(1.0 - 4.0 / 2.0)) / 3.0;
  EXPECT_NEAR(b.cumulative[0], want, 1e-12);
  EXPECT_EQ(evaluate_topk({"a"}, ref, 4, 5).count, 1u);
  EXPECT_EQ(evaluate_topk({"", "federer"}, ref, 1, 5).cumulative[0], (0.0 + std::exp(1.0 - 4.0)) / 2.0);
  EXPECT_THROW(evaluate_topk({}, ref), UsageError);
}
