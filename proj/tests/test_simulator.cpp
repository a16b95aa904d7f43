#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "rallycast/ablation.hpp"
#include "rallycast/simulator.hpp"

using namespace rallycast;

TEST(Simulator, SameSeedSameWorld) {
  SimConfig cfg;
  cfg.seed = 77;
  Simulator a(cfg, gen_transition_model(cfg)), b(cfg, gen_transition_model(cfg));
  for (int i = 0; i < 5; ++i) {
    const SimMatch x = a.gen_match("v"), y = b.gen_match("v");
    EXPECT_EQ(x.labels, y.labels);
    EXPECT_EQ(x.scores.upper, y.scores.upper);
    EXPECT_EQ(x.commentary, y.commentary);
  }
  cfg.seed = 78;
  Simulator c(cfg, gen_transition_model(cfg));
  EXPECT_NE(c.gen_corpus(20), a.gen_corpus(20));
}

TEST(Simulator, TransitionRowsAreDistributions) {
  SimConfig cfg;
  cfg.persistence = 0.3;
  const TransitionModel m = gen_transition_model(cfg);
  for (const Matrix* p : {&m.p11, &m.p12, &m.p22, &m.p21})
    for (std::size_t r = 0; r < p->rows; ++r) {
      double s = 0;
      for (double x : p->row(r)) {
        EXPECT_GT(x, 0.0);
        s += x;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Simulator, HighConcentrationGivesNearUniformRows) {
  SimConfig cfg;
  cfg.concentration = 1e6;
  const TransitionModel m = gen_transition_model(cfg);
  for (double x : m.p11.data) EXPECT_NEAR(x, 1.0 / cfg.num_upper, 2e-3);
  for (double x : m.p12.data) EXPECT_NEAR(x, 1.0 / cfg.num_lower, 2e-3);
}

TEST(Simulator, LabelFrequenciesFollowTheGenerator) {
  SimConfig cfg;
  cfg.windows_per_phrase = 1;
  cfg.sequence_length = 10001;
  cfg.concentration = 0.5;
  Simulator sim(cfg, gen_transition_model(cfg));
  const LabelSequence seq = sim.gen_labels();
  const std::size_t U = cfg.num_upper, L = cfg.num_lower;
  Matrix seen_u(U, U), want_u(U, U), seen_l(L, L), want_l(L, L);
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    const auto [up, lo] = coupled_next(sim.transitions(), seq[t]);
    for (std::size_t j = 0; j < U; ++j) want_u(seq[t].first, j) += up[j];
    for (std::size_t j = 0; j < L; ++j) want_l(seq[t].second, j) += lo[j];
    seen_u(seq[t].first, seq[t + 1].first) += 1;
    seen_l(seq[t].second, seq[t + 1].second) += 1;
  }
  const double n = static_cast<double>(seq.size() - 1);
  for (auto [seen, want] : {std::pair{&seen_u, &want_u}, {&seen_l, &want_l}}) {
    double tv = 0;
    for (std::size_t i = 0; i < seen->data.size(); ++i) tv += std::abs(seen->data[i] - want->data[i]) / n;
    EXPECT_LT(tv / 2.0, 0.05);
  }
}

TEST(Simulator, PhrasesAreHeldForTheirDuration) {
  SimConfig cfg;
  cfg.windows_per_phrase = 4;
  cfg.sequence_length = 10;
  Simulator sim(cfg, gen_transition_model(cfg));
  const LabelSequence seq = sim.gen_labels();
  ASSERT_EQ(seq.size(), 10u);
  for (std::size_t t = 0; t < seq.size(); ++t) EXPECT_EQ(seq[t], seq[t / 4 * 4]);
}

TEST(Simulator, NoiselessArgmaxIsTruth) {
  SimConfig cfg;
  cfg.noise_sigma = 0.0;
  Simulator sim(cfg, gen_transition_model(cfg));
  for (int i = 0; i < 10; ++i) {
    const SimMatch m = sim.gen_match("v");
    EXPECT_EQ(argmax_labels(m.scores), m.labels);
  }
}

TEST(Simulator, SingleWindowMatches) {
  SimConfig cfg;
  cfg.sequence_length = 1;
  Simulator sim(cfg, gen_transition_model(cfg));
  const SimMatch m = sim.gen_match("v");
  EXPECT_EQ(m.labels.size(), 1u);
  EXPECT_EQ(m.scores.num_windows(), 1u);
  EXPECT_FALSE(m.commentary.empty());
}

TEST(Simulator, ValidatesConfiguration) {
  SimConfig cfg;
  cfg.concentration = 0.0;
  EXPECT_THROW(gen_transition_model(cfg), UsageError);
  cfg = {};
  cfg.persistence = 1.0;
  EXPECT_THROW(gen_transition_model(cfg), UsageError);
  for (auto tweak : std::vector<void (*)(SimConfig&)>{
           [](SimConfig& c) { c.windows_per_phrase = 0; }, [](SimConfig& c) { c.sequence_length = 0; },
           [](SimConfig& c) { c.noise_sigma = -1; }, [](SimConfig& c) { c.num_players = 1; },
           [](SimConfig& c) { c.corpus_templates.clear(); }}) {
    SimConfig c;
    tweak(c);
    EXPECT_THROW(Simulator(c, gen_transition_model(SimConfig{})), UsageError);
  }
  SimConfig big;
  big.num_upper = 3;
  EXPECT_THROW(Simulator(big, gen_transition_model(SimConfig{})), UsageError);
}

TEST(Simulator, LexiconPhrasesUseDistinctContentStems) {
  SimConfig cfg;
  const PhraseLexicon lex = sim_lexicon(cfg);
  std::set<std::vector<std::string>> seen;
  for (Side s : {Side::upper, Side::lower})
    for (const auto& p : lex.side(s)) EXPECT_TRUE(seen.insert(tokenize(p)).second) << p;
  // Every verb, shot and placement wording maps to stems no other entry uses.
  std::map<std::string, std::string> owner;
  auto claim = [&](const std::string& text, const std::string& who) {
    for (const auto& stem : tokenize(text)) {
      auto [it, fresh] = owner.emplace(stem, who);
      EXPECT_TRUE(fresh || it->second == who) << stem << " used by " << it->second << " and " << who;
    }
  };
  for (const auto& v : detail::kVerbs) {
    claim(v.verb, v.verb);
    for (const auto* syn : v.synonyms) claim(syn, v.verb);
  }
  for (const auto* shot : detail::kShots) claim(shot, shot);
  for (const auto& p : detail::kPlacements) {
    claim(p.text, p.text);
    for (const auto* para : p.paraphrases) claim(para, p.text);
  }
  for (const auto* player : detail::kPlayers) claim(player, player);
}

TEST(Simulator, CommentaryNamesPlayersAndPhrases) {
  SimConfig cfg;
  cfg.synonym_rate = 0.0;
  Simulator sim(cfg, gen_transition_model(cfg));
  const SimMatch m = sim.gen_match("v");
  EXPECT_NE(m.commentary.find(m.players[0]), std::string::npos);
  EXPECT_NE(m.commentary.find(m.players[1]), std::string::npos);
  EXPECT_NE(m.players[0], m.players[1]);
  for (const auto& [u, l] : m.labels) {
    EXPECT_NE(m.commentary.find(sim.lexicon().phrase(Side::upper, u)), std::string::npos);
    EXPECT_NE(m.commentary.find(sim.lexicon().phrase(Side::lower, l)), std::string::npos);
  }
}

TEST(Simulator, InsertedCommentaryLandsAtReportedPosition) {
  SimConfig cfg;
  Simulator sim(cfg, gen_transition_model(cfg));
  auto lines = sim.gen_corpus(10);
  const SimMatch m = sim.gen_match("v");
  const std::size_t pos = sim.insert_into_corpus(lines, m);
  ASSERT_EQ(lines.size(), 11u);
  EXPECT_EQ(lines[pos], m.commentary);
}

TEST(Simulator, LabelAccuracy) {
  EXPECT_DOUBLE_EQ(label_accuracy({{0, 0}, {1, 1}}, {{0, 1}, {1, 1}}), 0.75);
  EXPECT_THROW(label_accuracy({{0, 0}}, {}), UsageError);
}

TEST(Ablation, SmallRunIsDeterministic) {
  SimConfig cfg;
  cfg.training_matches = 20;
  cfg.corpus_size = 40;
  AblationOptions opts;
  opts.runs = 3;
  const AblationReport a = ablation_run(cfg, opts), b = ablation_run(cfg, opts);
  EXPECT_EQ(a.mean_accuracy_smoothed, b.mean_accuracy_smoothed);
  EXPECT_EQ(a.mean_bleu_smoothed_lsi, b.mean_bleu_smoothed_lsi);
  EXPECT_EQ(a.runs.size(), 3u);
  EXPECT_GE(a.mean_accuracy_smoothed, 0.0);
  EXPECT_LE(a.mean_accuracy_smoothed, 1.0);
}

TEST(Simulator, TransitionModelsAcrossSeeds) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SimConfig cfg;
    cfg.seed = seed;
    const TransitionModel m = gen_transition_model(cfg), again = gen_transition_model(cfg);
    EXPECT_EQ(m.p21, again.p21);
    for (const Matrix* p : {&m.p11, &m.p12, &m.p22, &m.p21})
      for (std::size_t r = 0; r < p->rows; ++r) {
        double s = 0;
        for (double x : p->row(r)) s += x;
        ASSERT_NEAR(s, 1.0, 1e-9);
      }
  }
}

TEST(Ablation, NoiselessDecodesArePerfect) {
  SimConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.training_matches = 30;
  cfg.corpus_size = 40;
  AblationOptions opts;
  opts.runs = 5;
  const AblationReport r = ablation_run(cfg, opts);
  EXPECT_DOUBLE_EQ(r.mean_accuracy_smoothed, 1.0);
  EXPECT_DOUBLE_EQ(r.mean_accuracy_unsmoothed, 1.0);
}
