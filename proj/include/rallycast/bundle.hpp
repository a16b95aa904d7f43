#pragma once

// Writes a simulated match collection in the pipeline's on-disk formats:
//
//   lexicon.json          phrase lexicon
//   corpus.txt            commentary corpus (test commentaries mixed in)
//   train/<id>.json       training score files
//   train_labels.csv      training labels
//   test/<id>.json        test score files (with player names)
//   test_labels.csv       true test labels, for accuracy checks
//   references.jsonl      {video_id, reference} ground-truth commentary
//   sim_config.json       generator settings
//   config.json           RunConfig for the pipeline, paths relative to the bundle

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rallycast/io.hpp"
#include "rallycast/run_config.hpp"
#include "rallycast/simulator.hpp"

namespace rallycast {

inline io::Json to_json(const SimConfig& c) {
  return io::Json{{"seed", c.seed},
                  {"num_upper", c.num_upper},
                  {"num_lower", c.num_lower},
                  {"num_players", c.num_players},
                  {"sequence_length", c.sequence_length},
                  {"noise_sigma", c.noise_sigma},
                  {"concentration", c.concentration},
                  {"persistence", c.persistence},
                  {"windows_per_phrase", c.windows_per_phrase},
                  {"corpus_templates", c.corpus_templates},
                  {"synonym_rate", c.synonym_rate},
                  {"corpus_size", c.corpus_size},
                  {"training_matches", c.training_matches},
                  {"window_stride", c.window_stride},
                  {"window_size", c.window_size},
                  {"score_gain", c.score_gain}};
}

/// Missing keys keep their defaults.
inline SimConfig sim_config_from_json(const io::Json& j, const std::string& origin = "simulator config") {
  if (!j.is_object()) throw UsageError(origin + ": expected a JSON object");
  SimConfig c;
  auto get = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    try {
      dst = j.at(key).get<std::remove_reference_t<decltype(dst)>>();
    } catch (const io::Json::exception&) {
      throw UsageError(origin + ": '" + key + "' has the wrong type");
    }
  };
  for (const auto& [key, _] : j.items())
    if (!to_json(c).contains(key)) throw UsageError(origin + ": unknown key '" + key + "'");
  get("seed", c.seed);
  get("num_upper", c.num_upper);
  get("num_lower", c.num_lower);
  get("num_players", c.num_players);
  get("sequence_length", c.sequence_length);
  get("noise_sigma", c.noise_sigma);
  get("concentration", c.concentration);
  get("persistence", c.persistence);
  get("windows_per_phrase", c.windows_per_phrase);
  get("corpus_templates", c.corpus_templates);
  get("synonym_rate", c.synonym_rate);
  get("corpus_size", c.corpus_size);
  get("training_matches", c.training_matches);
  get("window_stride", c.window_stride);
  get("window_size", c.window_size);
  get("score_gain", c.score_gain);
  return c;
}

inline std::string video_name(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%04zu", prefix, i);
  return buf;
}

struct BundleSummary {
  std::size_t corpus_lines = 0;
  std::size_t train_videos = 0;
  std::size_t test_videos = 0;
};

inline BundleSummary write_sim_bundle(const SimConfig& cfg, std::size_t test_matches, const std::filesystem::path& dir,
                                      const RunParams& params = {}) {
  if (test_matches < 1) throw UsageError("a bundle needs at least one test match");
  if (cfg.training_matches < 1) throw UsageError("a bundle needs at least one training match");
  Simulator sim(cfg, gen_transition_model(cfg));
  const PhraseLexicon& lex = sim.lexicon();

  std::map<std::string, LabelSequence> train_labels, test_labels;
  std::vector<std::pair<std::string, std::string>> files; // relative path, content
  for (std::size_t i = 0; i < cfg.training_matches; ++i) {
    const std::string id = video_name("train", i);
    LabelSequence labels = sim.gen_labels();
    io::ScoreFile f{sim.gen_scores(labels, id), {}};
    files.emplace_back("train/" + id + ".json", io::dump(io::to_json(f)));
    train_labels.emplace(id, std::move(labels));
  }

  std::vector<std::string> lines = sim.gen_corpus(cfg.corpus_size);
  std::string references;
  for (std::size_t i = 0; i < test_matches; ++i) {
    const std::string id = video_name("test", i);
    SimMatch m = sim.gen_match(id);
    files.emplace_back("test/" + id + ".json", io::dump(io::to_json(io::ScoreFile{m.scores, m.players})));
    references += io::Json{{"video_id", id}, {"reference", m.commentary}}.dump() + "\n";
    sim.insert_into_corpus(lines, m);
    test_labels.emplace(id, std::move(m.labels));
  }
  std::string corpus;
  for (const auto& l : lines) corpus += l + "\n";

  RunConfig run;
  run.seed = cfg.seed;
  run.params = params;
  if (!run.params.lsi_k) run.params.lsi_k = sim_lsi_rank(cfg);
  run.paths.corpus = "corpus.txt";
  run.paths.lexicon = "lexicon.json";
  run.paths.train_scores = "train";
  run.paths.train_labels = "train_labels.csv";
  run.paths.test_scores = "test";
  run.paths.references = "references.jsonl";
  run.paths.out_dir = "out";

  files.emplace_back("lexicon.json", io::dump(io::to_json(lex)));
  files.emplace_back("corpus.txt", corpus);
  files.emplace_back("train_labels.csv", io::write_labels_csv(train_labels, lex));
  files.emplace_back("test_labels.csv", io::write_labels_csv(test_labels, lex));
  files.emplace_back("references.jsonl", references);
  files.emplace_back("sim_config.json", io::dump(to_json(cfg)));
  files.emplace_back("config.json", io::dump(to_json(run)));
  // Stale score files from an earlier, larger bundle would leak into the run.
  for (const char* sub : {"train", "test"}) std::filesystem::remove_all(dir / sub);
  for (const auto& [rel, content] : files) io::write_file(dir / rel, content);
  return {lines.size(), cfg.training_matches, test_matches};
}

} // namespace rallycast
