#pragma once

// Porter (1980) suffix-stripping stemmer, original algorithm without the
// later "logi"/"bli" amendments. Input is expected to be lowercase ASCII.

#include <array>
#include <string>
#include <string_view>
#include <utility>

namespace rallycast {

namespace detail {

class PorterWord {
public:
  explicit PorterWord(std::string w) : w_(std::move(w)) {}

  std::string release() { return std::move(w_); }

  bool ends_with(std::string_view suffix) const {
    return w_.size() >= suffix.size() &&
           std::string_view(w_).substr(w_.size() - suffix.size()) == suffix;
  }

  // Measure of the prefix w_[0, len): the m in [C](VC)^m[V].
  int measure(std::size_t len) const {
    int m = 0;
    std::size_t i = 0;
    while (i < len && consonant(i)) ++i;
    while (i < len) {
      while (i < len && !consonant(i)) ++i;
      if (i >= len) break;
      while (i < len && consonant(i)) ++i;
      ++m;
    }
    return m;
  }

  bool has_vowel(std::size_t len) const {
    for (std::size_t i = 0; i < len; ++i)
      if (!consonant(i)) return true;
    return false;
  }

  bool double_consonant(std::size_t len) const {
    return len >= 2 && w_[len - 1] == w_[len - 2] && consonant(len - 1);
  }

  // *o: stem ends consonant-vowel-consonant, last consonant not w, x or y.
  bool cvc(std::size_t len) const {
    if (len < 3) return false;
    if (!consonant(len - 1) || consonant(len - 2) || !consonant(len - 3)) return false;
    const char c = w_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  std::size_t size() const { return w_.size(); }
  char back() const { return w_.back(); }
  char at(std::size_t i) const { return w_[i]; }

  void replace_suffix(std::size_t suffix_len, std::string_view with) {
    w_.resize(w_.size() - suffix_len);
    w_.append(with);
  }

private:
  bool consonant(std::size_t i) const {
    switch (w_[i]) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
      return false;
    case 'y':
      return i == 0 || !consonant(i - 1);
    default:
      return true;
    }
  }

  std::string w_;
};

struct SuffixRule {
  std::string_view suffix;
  std::string_view replacement;
};

// Applies the first rule whose suffix matches, if the remaining stem has
// measure > min_measure. A matching suffix ends the step even when the
// condition fails.
template <std::size_t N>
inline void apply_measured_rules(PorterWord& w, const std::array<SuffixRule, N>& rules,
                                 int min_measure) {
  for (const auto& rule : rules) {
    if (!w.ends_with(rule.suffix)) continue;
    const std::size_t stem_len = w.size() - rule.suffix.size();
    if (w.measure(stem_len) > min_measure) w.replace_suffix(rule.suffix.size(), rule.replacement);
    return;
  }
}

inline void step1a(PorterWord& w) {
  if (w.ends_with("sses")) w.replace_suffix(4, "ss");
  else if (w.ends_with("ies")) w.replace_suffix(3, "i");
  else if (w.ends_with("ss")) return;
  else if (w.ends_with("s")) w.replace_suffix(1, "");
}

inline void step1b(PorterWord& w) {
  if (w.ends_with("eed")) {
    if (w.measure(w.size() - 3) > 0) w.replace_suffix(3, "ee");
    return;
  }
  std::size_t cut = 0;
  if (w.ends_with("ed") && w.has_vowel(w.size() - 2)) cut = 2;
  else if (w.ends_with("ing") && w.has_vowel(w.size() - 3)) cut = 3;
  if (cut == 0) return;

  w.replace_suffix(cut, "");
  if (w.ends_with("at") || w.ends_with("bl") || w.ends_with("iz")) {
    w.replace_suffix(0, "e");
  } else if (w.double_consonant(w.size())) {
    const char c = w.back();
    if (c != 'l' && c != 's' && c != 'z') w.replace_suffix(1, "");
  } else if (w.measure(w.size()) == 1 && w.cvc(w.size())) {
    w.replace_suffix(0, "e");
  }
}

inline void step1c(PorterWord& w) {
  if (w.ends_with("y") && w.has_vowel(w.size() - 1)) w.replace_suffix(1, "i");
}

inline void step2(PorterWord& w) {
  static constexpr std::array<SuffixRule, 20> rules{{
      {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},  {"anci", "ance"},
      {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},    {"entli", "ent"},
      {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
      {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
      {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},  {"biliti", "ble"},
  }};
  // Table order puts "ational" before "tional" and "ization" before "ation".
  apply_measured_rules(w, rules, 0);
}

inline void step3(PorterWord& w) {
  static constexpr std::array<SuffixRule, 7> rules{{
      {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
      {"ical", "ic"},  {"ful", ""},   {"ness", ""},
  }};
  apply_measured_rules(w, rules, 0);
}

inline void step4(PorterWord& w) {
  static constexpr std::array<std::string_view, 19> suffixes{
      "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
      "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize"};
  // Longest match wins: "ement" over "ment" over "ent".
  std::string_view match;
  for (auto s : suffixes)
    if (w.ends_with(s) && s.size() > match.size()) match = s;
  if (match.empty()) return;

  const std::size_t stem_len = w.size() - match.size();
  if (w.measure(stem_len) <= 1) return;
  if (match == "ion") {
    const char c = w.at(stem_len - 1);
    if (c != 's' && c != 't') return;
  }
  w.replace_suffix(match.size(), "");
}

inline void step5(PorterWord& w) {
  if (w.ends_with("e")) {
    const std::size_t stem_len = w.size() - 1;
    const int m = w.measure(stem_len);
    if (m > 1 || (m == 1 && !w.cvc(stem_len))) w.replace_suffix(1, "");
  }
  if (w.back() == 'l' && w.double_consonant(w.size()) && w.measure(w.size()) > 1)
    w.replace_suffix(1, "");
}

} // namespace detail

/// Stems a lowercase ASCII word. Short words are stemmed too ("as" -> "a",
/// "s" -> ""), matching the original algorithm.
inline std::string porter_stem(std::string_view word) {
  if (word.empty()) return {};
  detail::PorterWord w{std::string(word)};
  detail::step1a(w);
  if (w.size() == 0) return {};
  detail::step1b(w);
  detail::step1c(w);
  detail::step2(w);
  detail::step3(w);
  detail::step4(w);
  detail::step5(w);
  return w.release();
}

} // namespace rallycast
