// rallycast: command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rallycast/ablation.hpp"
#include "rallycast/bleu.hpp"
#include "rallycast/bundle.hpp"
#include "rallycast/io.hpp"
#include "rallycast/lsi.hpp"
#include "rallycast/pipeline.hpp"
#include "rallycast/platt.hpp"
#include "rallycast/retrieval.hpp"
#include "rallycast/run_config.hpp"
#include "rallycast/text_corpus.hpp"
#include "rallycast/transitions.hpp"

namespace fs = std::filesystem;
using namespace rallycast;

namespace {

/// --seed wins, then RALLYCAST_SEED, then the command's default.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("RALLYCAST_SEED")) {
    std::uint64_t v = 0;
    std::istringstream in(env);
    if (!(in >> v) || !in.eof()) throw UsageError(std::string("RALLYCAST_SEED is not an integer: ") + env);
    return v;
  }
  return fallback;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") std::cout << content;
  else io::write_file(out_path, content);
}

std::vector<std::size_t> default_checkpoints(std::size_t lines, std::size_t step) {
  std::vector<std::size_t> cps{0};
  for (std::size_t c = step; c < lines; c += step) cps.push_back(c);
  if (cps.back() != lines) cps.push_back(lines);
  return cps;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tennis commentary from per-window phrase scores"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "Random seed (falls back to RALLYCAST_SEED)");

  // build-dict
  auto* build = app.add_subcommand("build-dict", "Tokenize a corpus and write the dictionary artifact");
  std::string bd_corpus, bd_stop, bd_out;
  build->add_option("--corpus", bd_corpus, "Corpus file, one commentary per line")->required();
  build->add_option("--stopwords", bd_stop, "Stopword file, one word per line (default: built-in list)");
  build->add_option("--out", bd_out, "Dictionary JSON output")->required();

  // ngram-stats
  auto* ngram = app.add_subcommand("ngram-stats", "Distinct n-gram counts over growing corpus prefixes");
  std::string ng_corpus, ng_out;
  int ng_n = 1;
  std::size_t ng_step = 100;
  std::vector<std::size_t> ng_cps;
  ngram->add_option("--corpus", ng_corpus, "Corpus file")->required();
  ngram->add_option("-n,--order", ng_n, "N-gram order (1, 2 or 3)")->capture_default_str();
  ngram->add_option("--step", ng_step, "Checkpoint spacing in lines")->capture_default_str()->check(CLI::PositiveNumber);
  ngram->add_option("--checkpoints", ng_cps, "Explicit checkpoints (overrides --step)");
  ngram->add_option("--out", ng_out, "CSV output (default: stdout)");

  // fit-lsi
  auto* fit = app.add_subcommand("fit-lsi", "Fit the LSI model over a corpus");
  std::string fl_corpus, fl_stop, fl_out, fl_dict;
  std::optional<std::size_t> fl_k;
  fit->add_option("--corpus", fl_corpus, "Corpus file")->required();
  fit->add_option("--stopwords", fl_stop, "Stopword file");
  fit->add_option("-k,--rank", fl_k, "Latent dimensions (default min(100, rank))");
  fit->add_option("--out", fl_out, "Model file output")->required();
  fit->add_option("--dict-out", fl_dict, "Also write the dictionary artifact");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Fit Platt sigmoids and transition probabilities from training data");
  std::string cal_lex, cal_scores, cal_labels, cal_platt, cal_trans, cal_apply, cal_apply_out;
  double cal_alpha = 1.0;
  std::size_t cal_minpos = 5;
  cal->add_option("--lexicon", cal_lex, "Lexicon JSON")->required();
  cal->add_option("--train-scores", cal_scores, "Directory of training score files")->required();
  cal->add_option("--train-labels", cal_labels, "Training labels CSV")->required();
  cal->add_option("--alpha", cal_alpha, "Additive smoothing for transition counts")->capture_default_str();
  cal->add_option("--min-positives", cal_minpos, "Positives needed for a per-phrase fit")->capture_default_str();
  cal->add_option("--platt-out", cal_platt, "Platt model JSON output")->required();
  cal->add_option("--transitions-out", cal_trans, "Transition model JSON output")->required();
  cal->add_option("--apply", cal_apply, "Score file to calibrate with the fitted model");
  cal->add_option("--apply-out", cal_apply_out, "Calibrated score file output (default: stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Write a simulated bundle (scores, labels, corpus, references)");
  std::string sim_out, sim_cfg_path;
  std::size_t sim_tests = 10;
  SimConfig sim_cfg;
  sim->add_option("--out", sim_out, "Bundle directory")->required();
  sim->add_option("--config", sim_cfg_path, "Simulator settings JSON (flags override)");
  sim->add_option("--test-matches", sim_tests, "Held-out test matches")->capture_default_str();
  auto* sim_sigma = sim->add_option("--noise-sigma", sim_cfg.noise_sigma, "Score noise standard deviation");
  auto* sim_len = sim->add_option("--length", sim_cfg.sequence_length, "Windows per match");
  auto* sim_corpus = sim->add_option("--corpus-size", sim_cfg.corpus_size, "Background commentary lines");
  auto* sim_train = sim->add_option("--train-matches", sim_cfg.training_matches, "Training matches");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Calibrate, smooth, retrieve and evaluate every test video");
  std::string pipe_cfg, pipe_out;
  std::optional<std::size_t> pipe_jobs, pipe_k;
  bool no_smoothing = false, lexical = false, with_template = false;
  pipe->add_option("--config", pipe_cfg, "Run config JSON")->required();
  pipe->add_option("--out-dir", pipe_out, "Output directory (overrides the config)");
  pipe->add_option("--jobs", pipe_jobs, "Videos processed in parallel");
  pipe->add_option("--lsi-k", pipe_k, "Latent dimensions");
  pipe->add_flag("--no-smoothing", no_smoothing, "Skip the MRF; use per-window argmax labels");
  pipe->add_flag("--lexical", lexical, "Coverage-only retrieval");
  pipe->add_flag("--template", with_template, "Also emit the 'player - phrase' baseline string");

  // retrieve
  auto* ret = app.add_subcommand("retrieve", "Rank commentaries for one query JSON {phrases, players}");
  std::string ret_corpus, ret_stop, ret_query, ret_out, ret_cache;
  std::size_t ret_k = kDefaultTopK;
  std::optional<std::size_t> ret_rank;
  bool ret_lexical = false;
  ret->add_option("--corpus", ret_corpus, "Corpus file")->required();
  ret->add_option("--stopwords", ret_stop, "Stopword file");
  ret->add_option("--query", ret_query, "Query JSON")->required();
  ret->add_option("-k,--top", ret_k, "Results to return")->capture_default_str();
  ret->add_option("--lsi-k", ret_rank, "Latent dimensions");
  ret->add_option("--model-cache", ret_cache, "Directory caching the LSI index");
  ret->add_flag("--lexical", ret_lexical, "Coverage-only retrieval");
  ret->add_option("--out", ret_out, "Results JSON output (default: stdout)");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Top-k BLEU for JSON lines {video_id, candidates, reference}");
  std::string ev_in, ev_out;
  std::size_t ev_n = 4, ev_top = kBleuTopK;
  eval->add_option("--input", ev_in, "JSON lines input")->required();
  eval->add_option("--out", ev_out, "CSV output (default: stdout)");
  eval->add_option("--max-n", ev_n, "Highest n-gram order")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--top", ev_top, "Candidates averaged per video")->capture_default_str()->check(CLI::PositiveNumber);

  // ablation
  auto* abl = app.add_subcommand("ablation", "Simulated smoothing and retrieval ablations");
  std::size_t abl_runs = 100;
  std::string abl_out;
  abl->add_option("--runs", abl_runs, "Simulated runs")->capture_default_str()->check(CLI::PositiveNumber);
  abl->add_option("--out", abl_out, "Per-run CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::usage);
  }

  try {
    if (*build) {
      const Tokenizer tok = make_tokenizer(bd_stop);
      const auto corpus = load_corpus(bd_corpus, tok);
      const Dictionary dict = build_dictionary(corpus);
      io::write_file(bd_out, io::dump(io::dictionary_to_json(dict, corpus)));
      std::cout << "documents " << corpus.size() << "\nvocabulary " << dict.size() << "\n";
    } else if (*ngram) {
      const auto corpus = load_corpus(ng_corpus);
      const auto cps = ng_cps.empty() ? default_checkpoints(corpus.size(), ng_step) : ng_cps;
      std::ostringstream csv;
      write_ngram_csv(ngram_saturation(corpus, ng_n, cps), csv);
      emit(ng_out, csv.str());
    } else if (*fit) {
      const Tokenizer tok = make_tokenizer(fl_stop);
      const auto corpus = load_corpus(fl_corpus, tok);
      const LsiIndex index = build_lsi_index(corpus, fl_k);
      std::ostringstream model;
      save_lsi(index.model, model);
      io::write_file(fl_out, model.str());
      if (!fl_dict.empty()) io::write_file(fl_dict, io::dump(io::dictionary_to_json(index.dictionary, corpus)));
      std::cout << "terms " << index.model.rows << "\ndocuments " << index.model.cols << "\nk " << index.model.k
                << "\n";
    } else if (*cal) {
      RunConfig rc;
      rc.paths.train_scores = cal_scores;
      rc.paths.train_labels = cal_labels;
      rc.params.alpha = cal_alpha;
      rc.params.platt_min_positives = cal_minpos;
      rc.validate();
      const PhraseLexicon lex = io::load_lexicon(cal_lex);
      const TrainedModels models = train_models(rc, lex);
      io::write_file(cal_platt, io::dump(io::to_json(models.platt)));
      io::write_file(cal_trans, io::dump(io::to_json(models.transitions)));
      if (!cal_apply.empty()) {
        io::ScoreFile f = io::load_score_file(cal_apply);
        f.scores.validate(lex);
        f.scores = calibrate(f.scores, models.platt);
        emit(cal_apply_out, io::dump(io::to_json(f)));
      }
    } else if (*sim) {
      SimConfig cfg = sim_cfg_path.empty() ? SimConfig{} : sim_config_from_json(io::read_json(sim_cfg_path), sim_cfg_path);
      if (*sim_sigma) cfg.noise_sigma = sim_cfg.noise_sigma;
      if (*sim_len) cfg.sequence_length = sim_cfg.sequence_length;
      if (*sim_corpus) cfg.corpus_size = sim_cfg.corpus_size;
      if (*sim_train) cfg.training_matches = sim_cfg.training_matches;
      cfg.seed = resolve_seed(seed_flag, cfg.seed);
      const BundleSummary s = write_sim_bundle(cfg, sim_tests, sim_out);
      std::cout << "seed " << cfg.seed << "\ncorpus_lines " << s.corpus_lines << "\ntrain_videos " << s.train_videos
                << "\ntest_videos " << s.test_videos << "\n";
    } else if (*pipe) {
      RunConfig rc = load_run_config(pipe_cfg);
      rc.seed = resolve_seed(seed_flag, rc.seed);
      if (!pipe_out.empty()) rc.paths.out_dir = pipe_out;
      if (pipe_jobs) rc.params.jobs = *pipe_jobs;
      if (pipe_k) rc.params.lsi_k = *pipe_k;
      if (no_smoothing) rc.params.smoothing = false;
      if (lexical) rc.params.lexical = true;
      if (with_template) rc.params.template_baseline = true;
      if (rc.paths.out_dir.empty()) throw UsageError("no output directory (paths.out_dir or --out-dir)");
      // Earlier outputs must not survive a failed run.
      for (const char* name : {"results.json", "metrics.csv"}) fs::remove(rc.paths.out_dir / name);
      const PipelineOutput out = run_pipeline(rc);
      write_pipeline_output(out, rc.paths.out_dir);
      std::cout << "videos " << out.videos.size() << "\nresults " << (rc.paths.out_dir / "results.json").string()
                << "\n";
      if (out.metrics_csv) std::cout << "metrics " << (rc.paths.out_dir / "metrics.csv").string() << "\n";
    } else if (*ret) {
      const Tokenizer tok = make_tokenizer(ret_stop);
      const auto corpus = load_corpus(ret_corpus, tok);
      const io::QueryInput q = io::query_from_json(io::read_json(ret_query), ret_query);
      const LsiIndex index = load_or_build_index(corpus, ret_rank, ret_stop, ret_cache);
      const RetrievalResult r = describe(q.phrases, q.players, corpus, index, ret_k,
                                         ret_lexical ? RetrievalMode::lexical : RetrievalMode::lsi, tok);
      emit(ret_out, io::dump(io::results_to_json(r, corpus)));
    } else if (*eval) {
      std::string csv = io::metrics_header(ev_n);
      for (const auto& item : io::parse_eval_jsonl(io::read_file(ev_in), ev_in))
        csv += io::metrics_row(item.video_id, evaluate_topk(item.candidates, item.reference, ev_n, ev_top));
      emit(ev_out, csv);
    } else if (*abl) {
      SimConfig cfg;
      cfg.seed = resolve_seed(seed_flag, cfg.seed);
      AblationOptions opts;
      opts.runs = abl_runs;
      const AblationReport rep = ablation_run(cfg, opts);
      std::printf("runs %zu\naccuracy smoothed %.4f unsmoothed %.4f\n", rep.runs.size(), rep.mean_accuracy_smoothed,
                  rep.mean_accuracy_unsmoothed);
      for (std::size_t n = 0; n < rep.mean_bleu_smoothed_lsi.size(); ++n)
        std::printf("B%zu smoothed+lsi %.4f unsmoothed+lsi %.4f smoothed+lexical %.4f\n", n + 1,
                    rep.mean_bleu_smoothed_lsi[n], rep.mean_bleu_unsmoothed_lsi[n], rep.mean_bleu_smoothed_lexical[n]);
      std::printf("smoothing B2 win rate %.2f\nlsi B1 win rate %.2f\n", rep.smoothing_bleu2_win_rate,
                  rep.lsi_bleu1_win_rate);
      if (!abl_out.empty()) {
        std::string csv = "seed,acc_smoothed,acc_unsmoothed,b1_smoothed_lsi,b2_smoothed_lsi,b2_unsmoothed_lsi,"
                          "b1_smoothed_lexical\n";
        for (const auto& r : rep.runs)
          csv += std::to_string(r.seed) + ',' + io::format_double(r.smoothed.accuracy) + ',' +
                 io::format_double(r.unsmoothed.accuracy) + ',' + io::format_double(r.smoothed.bleu_lsi[0]) + ',' +
                 io::format_double(r.smoothed.bleu_lsi[1]) + ',' + io::format_double(r.unsmoothed.bleu_lsi[1]) + ',' +
                 io::format_double(r.smoothed.bleu_lexical[0]) + '\n';
        io::write_file(abl_out, csv);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::data);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::data);
  }
  return 0;
}
