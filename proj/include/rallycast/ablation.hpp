#pragma once

// Simulated smoothing and retrieval ablations: each run draws a transition
// model, training matches, a commentary corpus and one test match, then
// scores every decode/retrieval combination with top-k BLEU.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rallycast/bleu.hpp"
#include "rallycast/decode.hpp"
#include "rallycast/lsi.hpp"
#include "rallycast/platt.hpp"
#include "rallycast/retrieval.hpp"
#include "rallycast/simulator.hpp"
#include "rallycast/transitions.hpp"

namespace rallycast {

struct AblationOptions {
  std::size_t runs = 100;
  double alpha = 1.0;
  std::optional<std::size_t> lsi_k; // sim_lsi_rank(config) when unset
  std::size_t top_k = kDefaultTopK;
  std::size_t max_n = 4;
  DecodeOptions decode;
  PlattModelOptions platt;
};

struct ArmScores {
  double accuracy = 0.0;
  std::vector<double> bleu_lsi;     // mean top-k BLEU-n, LSI retrieval
  std::vector<double> bleu_lexical; // mean top-k BLEU-n, coverage retrieval
};

struct AblationRun {
  std::uint64_t seed = 0;
  ArmScores smoothed;
  ArmScores unsmoothed;
};

struct AblationReport {
  std::vector<AblationRun> runs;
  double mean_accuracy_smoothed = 0.0;
  double mean_accuracy_unsmoothed = 0.0;
  std::vector<double> mean_bleu_smoothed_lsi;
  std::vector<double> mean_bleu_unsmoothed_lsi;
  std::vector<double> mean_bleu_smoothed_lexical;
  /// Fraction of runs where smoothed BLEU-2 (LSI) >= unsmoothed BLEU-2.
  double smoothing_bleu2_win_rate = 0.0;
  /// Fraction of runs where LSI BLEU-1 >= lexical BLEU-1 (smoothed decode).
  double lsi_bleu1_win_rate = 0.0;
};

/// Per-run seed derivation shared by the ablation and its tests.
inline std::uint64_t run_seed(std::uint64_t base, std::size_t run) {
  return base * 0x9E3779B97F4A7C15ULL + run + 1;
}

struct SimulatedWorld {
  Simulator sim;
  TransitionModel estimated;
  PlattModel platt;
  std::vector<Commentary> corpus;
  SimMatch test;
  std::size_t test_commentary_id = 0;
};

/// Training data, fitted models, corpus (with the test commentary inserted)
/// and one held-out test match, all from a single seed.
inline SimulatedWorld simulate_world(const SimConfig& cfg, double alpha,
                                     const PlattModelOptions& platt_opts = {}) {
  Simulator sim(cfg, gen_transition_model(cfg));
  std::vector<LabelSequence> train_labels;
  std::vector<ScoreSequence> train_scores;
  for (std::size_t i = 0; i < cfg.training_matches; ++i) {
    train_labels.push_back(sim.gen_labels());
    train_scores.push_back(sim.gen_scores(train_labels.back(), "train" + std::to_string(i)));
  }
  TransitionModel est = estimate_transitions(train_labels, cfg.num_upper, cfg.num_lower, alpha);
  PlattModel platt = fit_platt_model(train_scores, train_labels, platt_opts);

  std::vector<std::string> lines = sim.gen_corpus(cfg.corpus_size);
  SimMatch test = sim.gen_match("test");
  const std::size_t pos = sim.insert_into_corpus(lines, test);
  return {std::move(sim), std::move(est), std::move(platt), make_corpus(lines), std::move(test), pos};
}

inline std::vector<std::string> texts_of(const RetrievalResult& r, const std::vector<Commentary>& corpus) {
  std::vector<std::string> out;
  for (const auto& item : r.ranked) out.push_back(corpus.at(item.commentary_id).raw);
  return out;
}

inline AblationReport ablation_run(const SimConfig& cfg, const AblationOptions& opts = {}) {
  if (opts.runs < 1) throw UsageError("ablation needs at least one run");
  AblationReport report;
  const std::size_t N = opts.max_n;
  report.mean_bleu_smoothed_lsi.assign(N, 0.0);
  report.mean_bleu_unsmoothed_lsi.assign(N, 0.0);
  report.mean_bleu_smoothed_lexical.assign(N, 0.0);
  std::size_t smooth_wins = 0, lsi_wins = 0;

  for (std::size_t r = 0; r < opts.runs; ++r) {
    SimConfig run_cfg = cfg;
    run_cfg.seed = run_seed(cfg.seed, r);
    SimulatedWorld world = simulate_world(run_cfg, opts.alpha, opts.platt);
    const LsiIndex index = build_lsi_index(world.corpus, opts.lsi_k.value_or(sim_lsi_rank(run_cfg)));

    AblationRun rec;
    rec.seed = run_cfg.seed;
    for (bool smooth : {true, false}) {
      DecodeOptions dopts = opts.decode;
      dopts.smoothing = smooth;
      const DecodeResult dec = decode_phrases(world.test.scores, world.platt, world.estimated, dopts);
      const auto phrases = phrase_strings(dec.phrases, world.sim.lexicon());
      ArmScores& arm = smooth ? rec.smoothed : rec.unsmoothed;
      arm.accuracy = label_accuracy(world.test.labels, dec.labels);
      for (RetrievalMode mode : {RetrievalMode::lsi, RetrievalMode::lexical}) {
        const RetrievalResult res =
            describe(phrases, world.test.players, world.corpus, index, opts.top_k, mode);
        const TopKBleu b = evaluate_topk(texts_of(res, world.corpus), world.test.commentary, N, opts.top_k);
        (mode == RetrievalMode::lsi ? arm.bleu_lsi : arm.bleu_lexical) = b.cumulative;
      }
    }

    report.mean_accuracy_smoothed += rec.smoothed.accuracy;
    report.mean_accuracy_unsmoothed += rec.unsmoothed.accuracy;
    for (std::size_t n = 0; n < N; ++n) {
      report.mean_bleu_smoothed_lsi[n] += rec.smoothed.bleu_lsi[n];
      report.mean_bleu_unsmoothed_lsi[n] += rec.unsmoothed.bleu_lsi[n];
      report.mean_bleu_smoothed_lexical[n] += rec.smoothed.bleu_lexical[n];
    }
    if (N >= 2 && rec.smoothed.bleu_lsi[1] >= rec.unsmoothed.bleu_lsi[1]) ++smooth_wins;
    if (rec.smoothed.bleu_lsi[0] >= rec.smoothed.bleu_lexical[0]) ++lsi_wins;
    report.runs.push_back(std::move(rec));
  }

  const double runs = static_cast<double>(opts.runs);
  report.mean_accuracy_smoothed /= runs;
  report.mean_accuracy_unsmoothed /= runs;
  for (std::size_t n = 0; n < N; ++n) {
    report.mean_bleu_smoothed_lsi[n] /= runs;
    report.mean_bleu_unsmoothed_lsi[n] /= runs;
    report.mean_bleu_smoothed_lexical[n] /= runs;
  }
  report.smoothing_bleu2_win_rate = static_cast<double>(smooth_wins) / runs;
  report.lsi_bleu1_win_rate = static_cast<double>(lsi_wins) / runs;
  return report;
}

} // namespace rallycast
