#pragma once

// End-to-end run: calibrate -> smooth -> retrieve -> evaluate for every test
// video described by a RunConfig. Outputs are built in memory and written
// only after every video succeeded.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rallycast/bleu.hpp"
#include "rallycast/decode.hpp"
#include "rallycast/io.hpp"
#include "rallycast/lsi.hpp"
#include "rallycast/platt.hpp"
#include "rallycast/retrieval.hpp"
#include "rallycast/run_config.hpp"
#include "rallycast/text_corpus.hpp"
#include "rallycast/transitions.hpp"

namespace rallycast {

inline Tokenizer make_tokenizer(const std::filesystem::path& stopwords) {
  return stopwords.empty() ? Tokenizer{} : Tokenizer(StopwordList::from_file(stopwords.string()));
}

/// FNV-1a over the corpus lines, stopword source and rank: identifies a cached index.
inline std::uint64_t index_fingerprint(const std::vector<Commentary>& corpus, const std::filesystem::path& stopwords,
                                       std::optional<std::size_t> rank) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
    h = (h ^ 0xff) * 1099511628211ULL;
  };
  for (const auto& c : corpus) mix(c.raw);
  mix(stopwords.empty() ? std::string("<english>") : io::read_file(stopwords));
  mix(rank ? std::to_string(*rank) : std::string("default"));
  return h;
}

/// Builds the LSI index, reusing `cache_dir` when its fingerprint matches.
inline LsiIndex load_or_build_index(const std::vector<Commentary>& corpus, std::optional<std::size_t> rank,
                                    const std::filesystem::path& stopwords, const std::filesystem::path& cache_dir) {
  if (cache_dir.empty()) return build_lsi_index(corpus, rank);
  const std::string fp = std::to_string(index_fingerprint(corpus, stopwords, rank));
  const auto fp_path = cache_dir / "fingerprint", dict_path = cache_dir / "dictionary.json",
             model_path = cache_dir / "lsi.model";
  namespace fs = std::filesystem;
  if (fs::exists(fp_path) && fs::exists(dict_path) && fs::exists(model_path) && io::read_file(fp_path) == fp + "\n") {
    std::istringstream model_in(io::read_file(model_path));
    LsiIndex index{io::dictionary_from_json(io::read_json(dict_path), dict_path.string()), load_lsi(model_in)};
    if (index.model.rows == index.dictionary.size() && index.model.cols == corpus.size()) return index;
  }
  LsiIndex index = build_lsi_index(corpus, rank);
  std::ostringstream model_out;
  save_lsi(index.model, model_out);
  io::write_file(dict_path, io::dump(io::dictionary_to_json(index.dictionary, corpus)));
  io::write_file(model_path, model_out.str());
  io::write_file(fp_path, fp + "\n");
  return index;
}

/// Reference commentary per video from JSON lines {video_id, reference}.
inline std::map<std::string, std::string> load_references(const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(io::read_file(path));
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const io::Json j = io::parse_json(line, where);
    if (!out.emplace(io::field<std::string>(j, "video_id", where), io::field<std::string>(j, "reference", where)).second)
      throw DataError(where + ": duplicate video_id");
  }
  return out;
}

/// Training-derived models: Platt sigmoids and transition probabilities.
struct TrainedModels {
  PlattModel platt;
  TransitionModel transitions;
};

inline TrainedModels train_models(const RunConfig& cfg, const PhraseLexicon& lexicon) {
  const RunPaths& p = cfg.paths;
  const bool need_training = p.platt_model.empty() || p.transitions.empty();
  std::vector<ScoreSequence> scores;
  std::vector<LabelSequence> labels;
  if (need_training) {
    if (p.train_labels.empty()) throw UsageError("training labels are required unless both models are given");
    const auto by_video = io::parse_labels_csv(io::read_file(p.train_labels), lexicon, p.train_labels.string());
    if (p.platt_model.empty()) {
      if (p.train_scores.empty()) throw UsageError("training scores are required to fit the Platt model");
      for (auto& f : io::load_score_dir(p.train_scores)) {
        f.scores.validate(lexicon);
        auto it = by_video.find(f.scores.video_id);
        if (it == by_video.end()) throw DataError("no training labels for video " + f.scores.video_id);
        scores.push_back(std::move(f.scores));
        labels.push_back(it->second);
      }
      if (scores.empty()) throw DataError("no training score files in " + p.train_scores.string());
    } else {
      for (const auto& [video, seq] : by_video) labels.push_back(seq);
    }
  }
  TrainedModels m;
  if (!p.platt_model.empty()) {
    m.platt = io::platt_from_json(io::read_json(p.platt_model), p.platt_model.string());
  } else {
    PlattModelOptions opts;
    opts.min_positives = cfg.params.platt_min_positives;
    m.platt = fit_platt_model(scores, labels, opts);
  }
  if (!p.transitions.empty()) {
    m.transitions = io::transitions_from_json(io::read_json(p.transitions), p.transitions.string());
  } else {
    m.transitions = estimate_transitions(labels, lexicon.size(Side::upper), lexicon.size(Side::lower),
                                         cfg.params.alpha);
  }
  if (m.platt.upper.size() != lexicon.size(Side::upper) || m.platt.lower.size() != lexicon.size(Side::lower))
    throw DataError("Platt model does not match the lexicon");
  if (m.transitions.upper_labels() != lexicon.size(Side::upper) ||
      m.transitions.lower_labels() != lexicon.size(Side::lower))
    throw DataError("transition model does not match the lexicon");
  return m;
}

struct VideoOutcome {
  std::string video_id;
  DecodeResult decoded;
  std::vector<std::string> upper_phrases;
  std::vector<std::string> lower_phrases;
  RetrievalResult retrieval;
  std::optional<std::string> template_text;
  std::optional<TopKBleu> bleu;
};

struct PipelineOutput {
  std::vector<VideoOutcome> videos; // sorted by video_id
  std::string results_json;
  std::optional<std::string> metrics_csv; // present when references were given
};

inline io::Json outcome_to_json(const VideoOutcome& v, const std::vector<Commentary>& corpus) {
  io::Json labels = io::Json::array();
  for (const auto& [u, l] : v.decoded.labels) labels.push_back(io::Json::array({u, l}));
  io::Json j{{"video_id", v.video_id},
             {"converged", v.decoded.converged},
             {"labels", labels},
             {"phrases", io::Json{{"upper", v.upper_phrases}, {"lower", v.lower_phrases}}},
             {"lexical_fallback", v.retrieval.lexical_fallback},
             {"descriptions", io::results_to_json(v.retrieval, corpus)}};
  if (v.template_text) j["template"] = *v.template_text;
  if (v.bleu) j["bleu"] = io::Json{{"cumulative", v.bleu->cumulative}, {"precisions", v.bleu->precisions}};
  return j;
}

inline PipelineOutput run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  const RunPaths& p = cfg.paths;
  for (auto [path, what] : {std::pair{&p.corpus, "corpus"}, {&p.lexicon, "lexicon"}, {&p.test_scores, "test_scores"}})
    if (path->empty()) throw UsageError(std::string("config is missing paths.") + what);

  const Tokenizer tokenizer = make_tokenizer(p.stopwords);
  const std::vector<Commentary> corpus = load_corpus(p.corpus.string(), tokenizer);
  const PhraseLexicon lexicon = io::load_lexicon(p.lexicon);
  const TrainedModels models = train_models(cfg, lexicon);
  const LsiIndex index = load_or_build_index(corpus, cfg.params.lsi_k, p.stopwords, p.model_cache);
  std::vector<io::ScoreFile> tests = io::load_score_dir(p.test_scores);
  if (tests.empty()) throw DataError("no test score files in " + p.test_scores.string());
  for (const auto& t : tests) t.scores.validate(lexicon);
  std::map<std::string, std::string> references;
  if (!p.references.empty()) references = load_references(p.references);

  DecodeOptions dopts;
  dopts.bp = cfg.params.bp;
  dopts.nms_radius = cfg.params.nms_radius;
  dopts.smoothing = cfg.params.smoothing;
  const RetrievalMode mode = cfg.params.lexical ? RetrievalMode::lexical : RetrievalMode::lsi;

  std::vector<VideoOutcome> outcomes(tests.size());
  std::vector<std::exception_ptr> errors(tests.size());
  auto process = [&](std::size_t i) {
    try {
      const io::ScoreFile& f = tests[i];
      VideoOutcome& out = outcomes[i];
      out.video_id = f.scores.video_id;
      out.decoded = decode_phrases(f.scores, models.platt, models.transitions, dopts);
      for (const auto& ref : out.decoded.phrases)
        (ref.side == Side::upper ? out.upper_phrases : out.lower_phrases).push_back(lexicon.phrase(ref.side, ref.phrase_id));
      std::vector<std::string> all = out.upper_phrases;
      all.insert(all.end(), out.lower_phrases.begin(), out.lower_phrases.end());
      out.retrieval = describe(all, f.players, corpus, index, cfg.params.k_retrieve, mode, tokenizer);
      if (cfg.params.template_baseline)
        out.template_text = template_description(f.players, out.upper_phrases, out.lower_phrases);
      if (auto it = references.find(out.video_id); it != references.end()) {
        std::vector<std::string> texts;
        for (const auto& r : out.retrieval.ranked) texts.push_back(corpus.at(r.commentary_id).raw);
        out.bleu = evaluate_topk(texts, it->second, cfg.params.max_n, kBleuTopK);
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const std::size_t jobs = std::min(cfg.params.jobs, tests.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < tests.size(); ++i) process(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < tests.size(); i += jobs) process(i);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  PipelineOutput out;
  io::Json results = io::Json::array();
  for (const auto& v : outcomes) results.push_back(outcome_to_json(v, corpus));
  out.results_json = io::dump(results);
  if (!references.empty()) {
    std::string csv = io::metrics_header(cfg.params.max_n);
    for (const auto& v : outcomes)
      if (v.bleu) csv += io::metrics_row(v.video_id, *v.bleu);
    out.metrics_csv = std::move(csv);
  }
  out.videos = std::move(outcomes);
  return out;
}

/// Writes results.json (and metrics.csv); removes anything written if a write fails.
inline std::vector<std::filesystem::path> write_pipeline_output(const PipelineOutput& out,
                                                                const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  try {
    written.push_back(dir / "results.json");
    io::write_file(written.back(), out.results_json);
    if (out.metrics_csv) {
      written.push_back(dir / "metrics.csv");
      io::write_file(written.back(), *out.metrics_csv);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& path : written) std::filesystem::remove(path, ec);
    throw;
  }
  return written;
}

} // namespace rallycast
