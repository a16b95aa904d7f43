#pragma once

#include <array>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>

#include "rallycast/error.hpp"

namespace rallycast {

// The classic 127-word English list (NLTK corpus, pre-2018 release).
inline constexpr std::array<std::string_view, 127> kEnglishStopwords{
    "i",         "me",       "my",      "myself",  "we",      "our",     "ours",
    "ourselves", "you",      "your",    "yours",   "yourself", "yourselves", "he",
    "him",       "his",      "himself", "she",     "her",     "hers",    "herself",
    "it",        "its",      "itself",  "they",    "them",    "their",   "theirs",
    "themselves", "what",    "which",   "who",     "whom",    "this",    "that",
    "these",     "those",    "am",      "is",      "are",     "was",     "were",
    "be",        "been",     "being",   "have",    "has",     "had",     "having",
    "do",        "does",     "did",     "doing",   "a",       "an",      "the",
    "and",       "but",      "if",      "or",      "because", "as",      "until",
    "while",     "of",       "at",      "by",      "for",     "with",    "about",
    "against",   "between",  "into",    "through", "during",  "before",  "after",
    "above",     "below",    "to",      "from",    "up",      "down",    "in",
    "out",       "on",       "off",     "over",    "under",   "again",   "further",
    "then",      "once",     "here",    "there",   "when",    "where",   "why",
    "how",       "all",      "any",     "both",    "each",    "few",     "more",
    "most",      "other",    "some",    "such",    "no",      "nor",     "not",
    "only",      "own",      "same",    "so",      "than",    "too",     "very",
    "s",         "t",        "can",     "will",    "just",    "don",     "should",
    "now"};

class StopwordList {
public:
  StopwordList() = default;

  static StopwordList english() {
    StopwordList list;
    for (auto w : kEnglishStopwords) list.words_.emplace(w);
    return list;
  }

  /// One word per line; blank lines and surrounding whitespace are ignored.
  static StopwordList from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read stopword file: " + path);
    StopwordList list;
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = line.find_last_not_of(" \t\r");
      list.words_.insert(line.substr(first, last - first + 1));
    }
    return list;
  }

  bool contains(const std::string& word) const { return words_.count(word) != 0; }
  std::size_t size() const { return words_.size(); }

private:
  std::unordered_set<std::string> words_;
};

} // namespace rallycast
