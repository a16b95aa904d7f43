#pragma once

// Commentary selection for a decoded phrase set: word coverage (one sentence
// chosen to cover as many query words as possible) and its latent-space
// counterpart.

#include <algorithm>
#include <cstddef>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "rallycast/error.hpp"
#include "rallycast/lsi.hpp"
#include "rallycast/text_corpus.hpp"

namespace rallycast {

struct Query {
  std::vector<std::string> words; // unique stems, first-appearance order
  std::vector<std::string> source_phrases;
};

/// W = unique tokens of the phrases plus the player names, all passed
/// through the retrieval tokenizer (names are stemmed like any word).
inline Query make_query(const std::vector<std::string>& phrases,
                        const std::vector<std::string>& players,
                        const Tokenizer& tokenizer = Tokenizer{}) {
  Query q{{}, phrases};
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& text) {
    for (auto& tok : tokenizer(text))
      if (seen.insert(tok).second) q.words.push_back(tok);
  };
  for (const auto& p : phrases) add(p);
  for (const auto& p : players) add(p);
  return q;
}

/// Number of query words present in the sentence (presence, not frequency).
inline std::size_t coverage(const Commentary& sentence, const Query& query) {
  const std::unordered_set<std::string> present(sentence.tokens.begin(), sentence.tokens.end());
  return static_cast<std::size_t>(std::count_if(
      query.words.begin(), query.words.end(), [&](const auto& w) { return present.count(w) != 0; }));
}

struct RankedCommentary {
  std::size_t commentary_id = 0;
  double lsi_score = 0.0;
  std::size_t coverage = 0;
};

struct RetrievalResult {
  std::vector<RankedCommentary> ranked;
  bool lexical_fallback = false; // LSI query vector was zero
  bool zero_coverage = false;    // no candidate covers any query word

  /// The single selected sentence (x_i = 1).
  std::size_t selected() const {
    if (ranked.empty()) throw DataError("retrieval produced no candidates");
    return ranked.front().commentary_id;
  }
};

/// Ranks candidates by coverage, then shorter sentences, then lower id.
/// Candidates may be any subset of the corpus.
inline RetrievalResult retrieve_lexical(const Query& query, const std::vector<Commentary>& corpus,
                                        std::size_t k) {
  if (corpus.empty()) throw DataError("retrieval corpus is empty");
  if (k < 1) throw UsageError("k must be >= 1");
  struct Row {
    RankedCommentary r;
    std::size_t length;
  };
  std::vector<Row> rows;
  rows.reserve(corpus.size());
  for (const auto& doc : corpus) rows.push_back({{doc.id, 0.0, coverage(doc, query)}, doc.tokens.size()});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tuple(b.r.coverage, a.length, a.r.commentary_id) <
           std::tuple(a.r.coverage, b.length, b.r.commentary_id);
  });

  RetrievalResult out;
  out.zero_coverage = rows.front().r.coverage == 0;
  if (out.zero_coverage) {
    // Nothing matches: report the lowest ids.
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.r.commentary_id < b.r.commentary_id; });
  }
  for (std::size_t i = 0; i < std::min(k, rows.size()); ++i) out.ranked.push_back(rows[i].r);
  return out;
}

/// Ranks by cosine between the folded-in query and each document's latent
/// vector; ties go to higher coverage, then lower id.
inline RetrievalResult retrieve_lsi(const Query& query, const std::vector<Commentary>& corpus,
                                    const LsiIndex& index, std::size_t k) {
  if (corpus.empty()) throw DataError("retrieval corpus is empty");
  if (k < 1) throw UsageError("k must be >= 1");
  for (const auto& doc : corpus)
    if (doc.id >= index.model.cols) throw DataError("commentary id outside the LSI index");

  const TfIdfVector qv = tfidf(query.words, index.dictionary);
  if (qv.is_zero()) {
    RetrievalResult out = retrieve_lexical(query, corpus, k);
    out.lexical_fallback = true;
    return out;
  }
  const LatentVector latent = project(index.model, qv);

  RetrievalResult out;
  out.ranked.reserve(corpus.size());
  for (const auto& doc : corpus)
    out.ranked.push_back(
        {doc.id, latent_similarity(latent, index.doc_vector(doc.id)), coverage(doc, query)});
  std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const auto& a, const auto& b) {
    if (a.lsi_score != b.lsi_score) return a.lsi_score > b.lsi_score;
    if (a.coverage != b.coverage) return a.coverage > b.coverage;
    return a.commentary_id < b.commentary_id;
  });
  out.zero_coverage = std::none_of(out.ranked.begin(), out.ranked.end(),
                                   [](const auto& r) { return r.coverage > 0; });
  out.ranked.resize(std::min(k, out.ranked.size()));
  return out;
}

enum class RetrievalMode { lsi, lexical };

inline constexpr std::size_t kDefaultTopK = 5;

/// Builds the query from decoded phrases and player names and retrieves the
/// top-k commentaries. Duplicate corpus lines are not collapsed.
inline RetrievalResult describe(const std::vector<std::string>& phrases,
                                const std::vector<std::string>& players,
                                const std::vector<Commentary>& corpus, const LsiIndex& index,
                                std::size_t k = kDefaultTopK, RetrievalMode mode = RetrievalMode::lsi,
                                const Tokenizer& tokenizer = Tokenizer{}) {
  if (phrases.empty()) throw DataError("cannot describe an empty phrase set");
  const Query q = make_query(phrases, players, tokenizer);
  return mode == RetrievalMode::lsi ? retrieve_lsi(q, corpus, index, k)
                                    : retrieve_lexical(q, corpus, k);
}

/// "player1 - phrase1, player2 - phrase2" baseline string.
inline std::string template_description(const std::vector<std::string>& players,
                                        const std::vector<std::string>& upper_phrases,
                                        const std::vector<std::string>& lower_phrases) {
  auto side = [](const std::string& who, const std::vector<std::string>& phrases) {
    std::string s = who + " -";
    for (std::size_t i = 0; i < phrases.size(); ++i) s += (i ? ", " : " ") + phrases[i];
    return s;
  };
  const std::string p1 = players.size() > 0 ? players[0] : "player1";
  const std::string p2 = players.size() > 1 ? players[1] : "player2";
  return side(p1, upper_phrases) + ", " + side(p2, lower_phrases);
}

} // namespace rallycast
