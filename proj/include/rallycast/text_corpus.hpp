#pragma once

// Commentary corpus ingestion: tokenization, the term dictionary, tf-idf
// vectors and n-gram vocabulary growth.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rallycast/error.hpp"
#include "rallycast/porter_stemmer.hpp"
#include "rallycast/stopwords.hpp"

namespace rallycast {

/// Lowercased word split. Any byte outside [A-Za-z0-9] below 0x80 separates
/// words; UTF-8 multibyte sequences are kept inside words. No stemming and no
/// stopword removal; this is the tokenizer used for BLEU and n-gram counts.
inline std::vector<std::string> surface_tokens(std::string_view raw) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : raw) {
    if (c >= 0x80 || std::isalnum(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Retrieval tokenizer: surface split, stopword filter, Porter stem.
class Tokenizer {
public:
  Tokenizer() : stopwords_(StopwordList::english()) {}
  explicit Tokenizer(StopwordList stopwords) : stopwords_(std::move(stopwords)) {}

  std::vector<std::string> operator()(std::string_view raw) const {
    std::vector<std::string> out;
    for (auto& word : surface_tokens(raw)) {
      if (stopwords_.contains(word)) continue;
      const bool ascii_alpha = std::all_of(word.begin(), word.end(), [](char c) {
        return c >= 'a' && c <= 'z';
      });
      std::string tok = ascii_alpha ? porter_stem(word) : std::move(word);
      if (!tok.empty()) out.push_back(std::move(tok));
    }
    return out;
  }

  const StopwordList& stopwords() const { return stopwords_; }

private:
  StopwordList stopwords_;
};

/// Tokenizes with the shipped English stopword list.
inline std::vector<std::string> tokenize(std::string_view raw) {
  static const Tokenizer tokenizer;
  return tokenizer(raw);
}

struct Commentary {
  std::size_t id = 0;
  std::string raw;
  std::vector<std::string> tokens;
};

inline std::vector<Commentary> make_corpus(const std::vector<std::string>& lines,
                                           const Tokenizer& tokenizer = Tokenizer{}) {
  std::vector<Commentary> corpus;
  corpus.reserve(lines.size());
  for (const auto& line : lines)
    corpus.push_back({corpus.size(), line, tokenizer(line)});
  return corpus;
}

/// Reads one commentary per line. Trailing CR is stripped and blank lines are
/// skipped, so ids are dense over the retained lines.
inline std::vector<Commentary> load_corpus(const std::string& path,
                                           const Tokenizer& tokenizer = Tokenizer{}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read corpus file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  return make_corpus(lines, tokenizer);
}

class Dictionary {
public:
  Dictionary() = default;

  /// Terms are sorted lexicographically before ids are assigned.
  Dictionary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq,
             std::size_t num_docs)
      : terms_(std::move(terms)), doc_freq_(std::move(doc_freq)), num_docs_(num_docs) {
    if (terms_.size() != doc_freq_.size())
      throw DataError("dictionary: terms and doc_freq differ in length");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (doc_freq_[i] < 1 || doc_freq_[i] > num_docs_)
        throw DataError("dictionary: doc_freq out of range for term '" + terms_[i] + "'");
      if (!ids_.emplace(terms_[i], i).second)
        throw DataError("dictionary: duplicate term '" + terms_[i] + "'");
    }
  }

  std::size_t size() const { return terms_.size(); }
  std::size_t num_docs() const { return num_docs_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::string& term(std::size_t id) const { return terms_.at(id); }
  std::size_t doc_freq(std::size_t id) const { return doc_freq_.at(id); }

  std::optional<std::size_t> id(const std::string& term) const {
    auto it = ids_.find(term);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  /// Smoothed inverse document frequency ln((1+N)/(1+df)) + 1.
  double idf(std::size_t id) const {
    return std::log((1.0 + static_cast<double>(num_docs_)) /
                    (1.0 + static_cast<double>(doc_freq_.at(id)))) +
           1.0;
  }

private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> doc_freq_;
  std::size_t num_docs_ = 0;
  std::unordered_map<std::string, std::size_t> ids_;
};

inline Dictionary build_dictionary(const std::vector<Commentary>& corpus) {
  if (corpus.empty()) throw DataError("corpus is empty; cannot build a dictionary");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    std::unordered_set<std::string_view> seen;
    for (const auto& tok : doc.tokens)
      if (seen.insert(tok).second) ++df[tok];
  }
  std::vector<std::string> terms;
  std::vector<std::size_t> freq;
  terms.reserve(df.size());
  freq.reserve(df.size());
  for (auto& [term, count] : df) {
    terms.push_back(term);
    freq.push_back(count);
  }
  return Dictionary(std::move(terms), std::move(freq), corpus.size());
}

/// Sparse tf-idf vector with entries sorted by term id.
struct TfIdfVector {
  std::vector<std::pair<std::size_t, double>> entries;
  double norm = 0.0;

  bool is_zero() const { return entries.empty(); }

  double weight(std::size_t term_id) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), term_id,
                               [](const auto& e, std::size_t id) { return e.first < id; });
    return (it != entries.end() && it->first == term_id) ? it->second : 0.0;
  }
};

/// weight(t) = count(t) * idf(t) over in-dictionary tokens. With normalize,
/// the result has unit L2 norm; `norm` always holds the length before scaling.
inline TfIdfVector tfidf(const std::vector<std::string>& tokens, const Dictionary& dict,
                         bool normalize = true) {
  std::map<std::size_t, double> counts;
  for (const auto& tok : tokens)
    if (auto id = dict.id(tok)) counts[*id] += 1.0;

  TfIdfVector v;
  v.entries.reserve(counts.size());
  double sq = 0.0;
  for (auto [id, tf] : counts) {
    const double w = tf * dict.idf(id);
    v.entries.emplace_back(id, w);
    sq += w * w;
  }
  v.norm = std::sqrt(sq);
  if (normalize && v.norm > 0.0)
    for (auto& e : v.entries) e.second /= v.norm;
  return v;
}

inline TfIdfVector tfidf(const Commentary& doc, const Dictionary& dict, bool normalize = true) {
  return tfidf(doc.tokens, dict, normalize);
}

struct NGramCurve {
  int n = 1;
  std::vector<std::pair<std::size_t, std::size_t>> points; // (corpus_size, unique_count)
};

/// Distinct n-gram counts over growing corpus prefixes. N-grams are taken from
/// surface tokens (unstemmed, stopwords kept) and never cross line boundaries.
inline NGramCurve ngram_saturation(const std::vector<Commentary>& corpus, int n,
                                   const std::vector<std::size_t>& checkpoints) {
  if (n < 1 || n > 3) throw UsageError("n-gram order must be 1, 2 or 3");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw UsageError("checkpoints must be sorted ascending");
  if (!checkpoints.empty() && checkpoints.back() > corpus.size())
    throw UsageError("checkpoint " + std::to_string(checkpoints.back()) +
                     " exceeds corpus size " + std::to_string(corpus.size()));

  NGramCurve curve{n, {}};
  std::unordered_set<std::string> seen;
  std::size_t line = 0;
  for (std::size_t cp : checkpoints) {
    for (; line < cp; ++line) {
      const auto words = surface_tokens(corpus[line].raw);
      for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= words.size(); ++i) {
        std::string key = words[i];
        for (int j = 1; j < n; ++j) {
          key.push_back('\x1f');
          key += words[i + j];
        }
        seen.insert(std::move(key));
      }
    }
    curve.points.emplace_back(cp, seen.size());
  }
  return curve;
}

inline void write_ngram_csv(const NGramCurve& curve, std::ostream& out) {
  out << "corpus_size,unique_count\n";
  for (auto [size, count] : curve.points) out << size << ',' << count << '\n';
}

} // namespace rallycast
