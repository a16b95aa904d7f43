#pragma once

// Serializable description of one pipeline run. Relative paths are resolved
// against the directory of the config file they were read from.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rallycast/error.hpp"
#include "rallycast/io.hpp"
#include "rallycast/mrf.hpp"
#include "rallycast/retrieval.hpp"

namespace rallycast {

struct RunPaths {
  std::filesystem::path corpus;
  std::filesystem::path lexicon;
  std::filesystem::path train_scores; // directory of score files
  std::filesystem::path train_labels; // labels CSV
  std::filesystem::path test_scores;  // directory of score files
  std::filesystem::path references;   // optional JSON lines {video_id, reference}
  std::filesystem::path stopwords;    // optional; built-in list when empty
  std::filesystem::path platt_model;  // optional; fitted from training data when empty
  std::filesystem::path transitions;  // optional; estimated from training labels when empty
  std::filesystem::path model_cache;  // optional directory for the LSI index
  std::filesystem::path out_dir;
};

struct RunParams {
  std::optional<std::size_t> lsi_k;
  std::optional<std::size_t> nms_radius;
  BpOptions bp;
  std::size_t platt_min_positives = 5;
  double alpha = 1.0;
  std::size_t k_retrieve = kDefaultTopK;
  std::size_t max_n = 4;
  bool smoothing = true;
  bool lexical = false;
  bool template_baseline = false;
  std::size_t jobs = 1;
};

struct RunConfig {
  RunPaths paths;
  RunParams params;
  std::uint64_t seed = 1;

  void validate() const {
    if (params.k_retrieve < 1) throw UsageError("k_retrieve must be >= 1");
    if (params.max_n < 1) throw UsageError("max_n must be >= 1");
    if (!(params.alpha > 0.0)) throw UsageError("alpha must be > 0");
    if (!(params.bp.damping >= 0.0 && params.bp.damping < 1.0)) throw UsageError("bp damping must be in [0, 1)");
    if (params.bp.max_iters < 1) throw UsageError("bp max_iters must be >= 1");
    if (!(params.bp.tol > 0.0)) throw UsageError("bp tol must be > 0");
    if (params.lsi_k && *params.lsi_k < 1) throw UsageError("lsi_k must be >= 1");
    if (params.jobs < 1) throw UsageError("jobs must be >= 1");
  }
};

inline io::Json to_json(const RunConfig& c) {
  using io::Json;
  auto p = [](const std::filesystem::path& x) { return x.generic_string(); };
  Json paths{{"corpus", p(c.paths.corpus)},
             {"lexicon", p(c.paths.lexicon)},
             {"train_scores", p(c.paths.train_scores)},
             {"train_labels", p(c.paths.train_labels)},
             {"test_scores", p(c.paths.test_scores)},
             {"references", p(c.paths.references)},
             {"stopwords", p(c.paths.stopwords)},
             {"platt_model", p(c.paths.platt_model)},
             {"transitions", p(c.paths.transitions)},
             {"model_cache", p(c.paths.model_cache)},
             {"out_dir", p(c.paths.out_dir)}};
  const RunParams& r = c.params;
  Json params{{"lsi_k", r.lsi_k ? Json(*r.lsi_k) : Json(nullptr)},
              {"nms_radius", r.nms_radius ? Json(*r.nms_radius) : Json(nullptr)},
              {"bp_damping", r.bp.damping},
              {"bp_max_iters", r.bp.max_iters},
              {"bp_tol", r.bp.tol},
              {"platt_min_positives", r.platt_min_positives},
              {"alpha", r.alpha},
              {"k_retrieve", r.k_retrieve},
              {"max_n", r.max_n},
              {"smoothing", r.smoothing},
              {"lexical", r.lexical},
              {"template", r.template_baseline},
              {"jobs", r.jobs}};
  return Json{{"seed", c.seed}, {"paths", paths}, {"params", params}};
}

/// Missing keys keep their defaults; unknown keys are rejected so typos surface.
inline RunConfig run_config_from_json(const io::Json& j, const std::filesystem::path& base_dir = {},
                                      const std::string& origin = "config") {
  using io::Json;
  if (!j.is_object()) throw UsageError(origin + ": config must be a JSON object");
  auto check_keys = [&](const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw UsageError(origin + ": " + where + " must be an object");
    for (const auto& [key, _] : obj.items())
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        throw UsageError(origin + ": unknown key '" + where + "." + key + "'");
  };
  check_keys(j, {"seed", "paths", "params"}, "config");

  auto get = [&](const Json& obj, const char* key, auto& dst) {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    try {
      dst = obj.at(key).get<std::remove_reference_t<decltype(dst)>>();
    } catch (const Json::exception&) {
      throw UsageError(origin + ": '" + key + "' has the wrong type");
    }
  };
  auto get_opt = [&](const Json& obj, const char* key, std::optional<std::size_t>& dst) {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    std::size_t v = 0;
    get(obj, key, v);
    dst = v;
  };

  RunConfig c;
  get(j, "seed", c.seed);
  if (j.contains("paths")) {
    const Json& p = j.at("paths");
    check_keys(p, {"corpus", "lexicon", "train_scores", "train_labels", "test_scores", "references", "stopwords",
                   "platt_model", "transitions", "model_cache", "out_dir"},
               "paths");
    auto path = [&](const char* key, std::filesystem::path& dst) {
      std::string s;
      get(p, key, s);
      if (s.empty()) return;
      dst = std::filesystem::path(s);
      if (dst.is_relative() && !base_dir.empty()) dst = base_dir / dst;
    };
    path("corpus", c.paths.corpus);
    path("lexicon", c.paths.lexicon);
    path("train_scores", c.paths.train_scores);
    path("train_labels", c.paths.train_labels);
    path("test_scores", c.paths.test_scores);
    path("references", c.paths.references);
    path("stopwords", c.paths.stopwords);
    path("platt_model", c.paths.platt_model);
    path("transitions", c.paths.transitions);
    path("model_cache", c.paths.model_cache);
    path("out_dir", c.paths.out_dir);
  }
  if (j.contains("params")) {
    const Json& p = j.at("params");
    check_keys(p, {"lsi_k", "nms_radius", "bp_damping", "bp_max_iters", "bp_tol", "platt_min_positives", "alpha",
                   "k_retrieve", "max_n", "smoothing", "lexical", "template", "jobs"},
               "params");
    RunParams& r = c.params;
    get_opt(p, "lsi_k", r.lsi_k);
    get_opt(p, "nms_radius", r.nms_radius);
    get(p, "bp_damping", r.bp.damping);
    get(p, "bp_max_iters", r.bp.max_iters);
    get(p, "bp_tol", r.bp.tol);
    get(p, "platt_min_positives", r.platt_min_positives);
    get(p, "alpha", r.alpha);
    get(p, "k_retrieve", r.k_retrieve);
    get(p, "max_n", r.max_n);
    get(p, "smoothing", r.smoothing);
    get(p, "lexical", r.lexical);
    get(p, "template", r.template_baseline);
    get(p, "jobs", r.jobs);
  }
  c.validate();
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  io::Json j;
  try {
    j = io::read_json(path);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  return run_config_from_json(j, path.parent_path(), path.string());
}

} // namespace rallycast
