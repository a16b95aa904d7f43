#pragma once

// File formats shared by the CLI and the simulator: JSON documents for
// lexicons, score files, models, queries and results; CSV for labels and
// metrics; JSON lines for batch evaluation input.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rallycast/bleu.hpp"
#include "rallycast/error.hpp"
#include "rallycast/lexicon.hpp"
#include "rallycast/platt.hpp"
#include "rallycast/retrieval.hpp"
#include "rallycast/text_corpus.hpp"
#include "rallycast/transitions.hpp"

namespace rallycast::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content) || !out.flush()) throw DataError("cannot write " + path.string());
}

inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(origin + ": invalid JSON: " + e.what());
  }
}

inline Json read_json(const fs::path& path) { return parse_json(read_file(path), path.string()); }

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Typed field access that reports the document and key on failure.
template <typename T>
T field(const Json& j, const char* key, const std::string& origin) {
  if (!j.is_object() || !j.contains(key)) throw DataError(origin + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw DataError(origin + ": field '" + std::string(key) + "' has the wrong type");
  }
}

// ---- CSV ------------------------------------------------------------------

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Splits one CSV record; double quotes delimit fields and "" escapes a quote.
inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') fields.back() += '"', ++i;
      else if (c == '"') quoted = false;
      else fields.back() += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw DataError("unterminated quote in CSV record: " + line);
  return fields;
}

inline bool parse_size(const std::string& s, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

// ---- lexicon ----------------------------------------------------------------
// {"upper": [phrase, ...], "lower": [phrase, ...]} in index order.

inline Json to_json(const PhraseLexicon& lex) { return Json{{"upper", lex.upper()}, {"lower", lex.lower()}}; }

inline PhraseLexicon lexicon_from_json(const Json& j, const std::string& origin = "lexicon") {
  return PhraseLexicon(field<std::vector<std::string>>(j, "upper", origin),
                       field<std::vector<std::string>>(j, "lower", origin));
}

inline PhraseLexicon load_lexicon(const fs::path& path) { return lexicon_from_json(read_json(path), path.string()); }

// ---- score files ------------------------------------------------------------
// {"video_id", "window_stride", "window_size", "upper_scores": T rows of U,
//  "lower_scores": T rows of L, optional "players": [upper name, lower name]}

struct ScoreFile {
  ScoreSequence scores;
  std::vector<std::string> players;
};

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw DataError(what + " must be a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  try {
    rows = j.get<std::vector<std::vector<double>>>();
  } catch (const Json::exception&) {
    throw DataError(what + " must contain only numeric rows");
  }
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols) throw DataError(what + ": ragged row " + std::to_string(r));
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

inline Json to_json(const ScoreFile& f) {
  Json j{{"video_id", f.scores.video_id},
         {"window_stride", f.scores.window_stride},
         {"window_size", f.scores.window_size},
         {"upper_scores", matrix_to_json(f.scores.upper)},
         {"lower_scores", matrix_to_json(f.scores.lower)}};
  if (!f.players.empty()) j["players"] = f.players;
  return j;
}

inline ScoreFile score_file_from_json(const Json& j, const std::string& origin) {
  ScoreFile f;
  f.scores.video_id = field<std::string>(j, "video_id", origin);
  f.scores.window_stride = field<std::size_t>(j, "window_stride", origin);
  f.scores.window_size = field<std::size_t>(j, "window_size", origin);
  f.scores.upper = matrix_from_json(field<Json>(j, "upper_scores", origin), origin + ": upper_scores");
  f.scores.lower = matrix_from_json(field<Json>(j, "lower_scores", origin), origin + ": lower_scores");
  if (j.contains("players")) f.players = field<std::vector<std::string>>(j, "players", origin);
  f.scores.validate();
  return f;
}

inline ScoreFile load_score_file(const fs::path& path) {
  return score_file_from_json(read_json(path), path.string());
}

/// Every *.json file in a directory, ordered by video_id.
inline std::vector<ScoreFile> load_score_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("score directory not found: " + dir.string());
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  std::vector<ScoreFile> out;
  for (const auto& p : paths) out.push_back(load_score_file(p));
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.scores.video_id < b.scores.video_id; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].scores.video_id == out[i - 1].scores.video_id)
      throw DataError("duplicate video_id " + out[i].scores.video_id + " in " + dir.string());
  return out;
}

// ---- training labels ----------------------------------------------------------
// video_id,window,upper_label,lower_label with phrase text as labels (a bare
// non-negative integer is also accepted as a phrase index).

inline std::string write_labels_csv(const std::map<std::string, LabelSequence>& labels,
                                    const PhraseLexicon& lex) {
  std::string out = "video_id,window,upper_label,lower_label\n";
  for (const auto& [video, seq] : labels)
    for (std::size_t t = 0; t < seq.size(); ++t)
      out += csv_escape(video) + ',' + std::to_string(t) + ',' +
             csv_escape(lex.phrase(Side::upper, seq[t].first)) + ',' +
             csv_escape(lex.phrase(Side::lower, seq[t].second)) + '\n';
  return out;
}

inline std::map<std::string, LabelSequence> parse_labels_csv(const std::string& text, const PhraseLexicon& lex,
                                                             const std::string& origin = "labels") {
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::map<std::size_t, LabelPair>> rows;
  std::size_t lineno = 0;
  auto label = [&](Side s, const std::string& v) {
    if (auto id = lex.find(s, v)) return *id;
    std::size_t idx = 0;
    if (parse_size(v, idx) && idx < lex.size(s)) return idx;
    throw DataError(origin + ":" + std::to_string(lineno) + ": unknown " + to_string(s) + " label '" + v + "'");
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = csv_split(line);
    if (lineno == 1) {
      if (f != std::vector<std::string>{"video_id", "window", "upper_label", "lower_label"})
        throw DataError(origin + ": expected header video_id,window,upper_label,lower_label");
      continue;
    }
    if (f.size() != 4) throw DataError(origin + ":" + std::to_string(lineno) + ": expected 4 fields");
    std::size_t window = 0;
    if (!parse_size(f[1], window)) throw DataError(origin + ":" + std::to_string(lineno) + ": bad window");
    if (!rows[f[0]].emplace(window, LabelPair{label(Side::upper, f[2]), label(Side::lower, f[3])}).second)
      throw DataError(origin + ":" + std::to_string(lineno) + ": duplicate window");
  }
  if (lineno == 0) throw DataError(origin + ": empty labels file");
  std::map<std::string, LabelSequence> out;
  for (auto& [video, windows] : rows) {
    LabelSequence seq;
    for (auto& [t, pair] : windows) {
      if (t != seq.size()) throw DataError(origin + ": " + video + " has a gap at window " + std::to_string(seq.size()));
      seq.push_back(pair);
    }
    out.emplace(video, std::move(seq));
  }
  return out;
}

// ---- dictionary artifact ----------------------------------------------------------
// {"num_docs", "terms": [[term, doc_freq], ...], "documents": [[tokens], ...]}

inline Json dictionary_to_json(const Dictionary& dict, const std::vector<Commentary>& corpus) {
  Json terms = Json::array();
  for (std::size_t i = 0; i < dict.size(); ++i) terms.push_back(Json::array({dict.term(i), dict.doc_freq(i)}));
  Json docs = Json::array();
  for (const auto& c : corpus) docs.push_back(c.tokens);
  return Json{{"num_docs", dict.num_docs()}, {"terms", terms}, {"documents", docs}};
}

inline Dictionary dictionary_from_json(const Json& j, const std::string& origin = "dictionary") {
  std::vector<std::string> terms;
  std::vector<std::size_t> freq;
  for (const auto& t : field<Json>(j, "terms", origin)) {
    if (!t.is_array() || t.size() != 2 || !t[0].is_string() || !t[1].is_number_unsigned())
      throw DataError(origin + ": terms entries must be [term, doc_freq]");
    terms.push_back(t[0].get<std::string>());
    freq.push_back(t[1].get<std::size_t>());
  }
  if (!std::is_sorted(terms.begin(), terms.end())) throw DataError(origin + ": terms must be sorted");
  return Dictionary(std::move(terms), std::move(freq), field<std::size_t>(j, "num_docs", origin));
}

// ---- models ---------------------------------------------------------------------------

inline Json to_json(const PlattModel& m) {
  auto side = [](const std::vector<PlattParams>& v) {
    Json a = Json::array();
    for (const auto& p : v) a.push_back(Json{{"a", p.a}, {"b", p.b}});
    return a;
  };
  return Json{{"upper", side(m.upper)}, {"lower", side(m.lower)}};
}

inline PlattModel platt_from_json(const Json& j, const std::string& origin = "platt model") {
  PlattModel m;
  for (Side s : {Side::upper, Side::lower})
    for (const auto& p : field<Json>(j, to_string(s), origin))
      m.side(s).push_back({field<double>(p, "a", origin), field<double>(p, "b", origin)});
  return m;
}

inline Json to_json(const TransitionModel& m) {
  return Json{{"smoothing_alpha", m.smoothing_alpha}, {"p11", matrix_to_json(m.p11)},
              {"p12", matrix_to_json(m.p12)},         {"p22", matrix_to_json(m.p22)},
              {"p21", matrix_to_json(m.p21)}};
}

inline TransitionModel transitions_from_json(const Json& j, const std::string& origin = "transitions") {
  TransitionModel m{matrix_from_json(field<Json>(j, "p11", origin), origin + ": p11"),
                    matrix_from_json(field<Json>(j, "p12", origin), origin + ": p12"),
                    matrix_from_json(field<Json>(j, "p22", origin), origin + ": p22"),
                    matrix_from_json(field<Json>(j, "p21", origin), origin + ": p21"),
                    field<double>(j, "smoothing_alpha", origin)};
  const std::size_t U = m.p11.rows, L = m.p22.rows;
  if (m.p11.cols != U || m.p12.rows != U || m.p12.cols != L || m.p22.cols != L || m.p21.rows != L ||
      m.p21.cols != U)
    throw DataError(origin + ": transition matrix shapes are inconsistent");
  return m;
}

// ---- retrieval --------------------------------------------------------------------------

struct QueryInput {
  std::vector<std::string> phrases;
  std::vector<std::string> players;
};

inline QueryInput query_from_json(const Json& j, const std::string& origin = "query") {
  QueryInput q{field<std::vector<std::string>>(j, "phrases", origin), {}};
  if (j.contains("players")) q.players = field<std::vector<std::string>>(j, "players", origin);
  return q;
}

/// [{rank, commentary_id, text, lsi_score, coverage}, ...]
inline Json results_to_json(const RetrievalResult& r, const std::vector<Commentary>& corpus) {
  Json out = Json::array();
  for (std::size_t i = 0; i < r.ranked.size(); ++i) {
    const auto& item = r.ranked[i];
    out.push_back(Json{{"rank", i + 1},
                       {"commentary_id", item.commentary_id},
                       {"text", corpus.at(item.commentary_id).raw},
                       {"lsi_score", item.lsi_score},
                       {"coverage", item.coverage}});
  }
  return out;
}

// ---- evaluation -----------------------------------------------------------------------------
// Input lines: {"video_id", "candidates": [text, ...], "reference": text}.

struct EvalItem {
  std::string video_id;
  std::vector<std::string> candidates;
  std::string reference;
};

inline std::vector<EvalItem> parse_eval_jsonl(const std::string& text, const std::string& origin = "evaluation input") {
  std::vector<EvalItem> out;
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    const Json j = parse_json(line, where);
    out.push_back({field<std::string>(j, "video_id", where), field<std::vector<std::string>>(j, "candidates", where),
                   field<std::string>(j, "reference", where)});
    if (out.back().candidates.empty()) throw DataError(where + ": candidates is empty");
  }
  return out;
}

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

/// video_id,B1..Bn,p1..pn (n = 4 gives the standard layout).
inline std::string metrics_header(std::size_t max_n = 4) {
  std::string h = "video_id";
  for (const char* prefix : {",B", ",p"})
    for (std::size_t n = 1; n <= max_n; ++n) h += prefix + std::to_string(n);
  return h + '\n';
}

inline std::string metrics_row(const std::string& video_id, const TopKBleu& b) {
  std::string row = csv_escape(video_id);
  for (double x : b.cumulative) row += ',' + format_double(x);
  for (double x : b.precisions) row += ',' + format_double(x);
  return row + '\n';
}

} // namespace rallycast::io
