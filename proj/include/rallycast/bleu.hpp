#pragma once

// Unsmoothed corpus-free BLEU for a single candidate against one or more
// references, plus top-k averaging.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "rallycast/error.hpp"
#include "rallycast/text_corpus.hpp"

namespace rallycast {

using Tokens = std::vector<std::string>;

namespace detail {

inline std::map<Tokens, std::size_t> ngram_counts(const Tokens& tokens, std::size_t n) {
  std::map<Tokens, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

} // namespace detail

/// Clipped n-gram matches over candidate n-grams; 0 when the candidate has
/// no n-grams of this order.
inline double modified_precision(const Tokens& candidate, const std::vector<Tokens>& references,
                                 std::size_t n) {
  if (n < 1) throw UsageError("n-gram order must be >= 1");
  if (references.empty()) throw UsageError("at least one reference is required");
  const auto cand = detail::ngram_counts(candidate, n);
  std::size_t total = 0;
  for (const auto& [gram, c] : cand) total += c;
  if (total == 0) return 0.0;

  std::map<Tokens, std::size_t> max_ref;
  for (const auto& ref : references)
    for (const auto& [gram, c] : detail::ngram_counts(ref, n)) {
      auto& m = max_ref[gram];
      m = std::max(m, c);
    }
  std::size_t clipped = 0;
  for (const auto& [gram, c] : cand) {
    auto it = max_ref.find(gram);
    if (it != max_ref.end()) clipped += std::min(c, it->second);
  }
  return static_cast<double>(clipped) / static_cast<double>(total);
}

struct BleuReport {
  std::vector<double> precisions; // p_1..p_N
  double brevity_penalty = 1.0;
  std::vector<double> cumulative; // BLEU-1..BLEU-N
};

/// BP uses the reference length closest to the candidate (shorter on ties).
inline BleuReport bleu(const Tokens& candidate, const std::vector<Tokens>& references,
                       std::size_t max_n = 4) {
  if (candidate.empty()) throw UsageError("BLEU candidate is empty");
  if (references.empty()) throw UsageError("at least one reference is required");
  if (max_n < 1) throw UsageError("max_n must be >= 1");

  const auto c = static_cast<long>(candidate.size());
  long r = static_cast<long>(references.front().size());
  for (const auto& ref : references) {
    const auto len = static_cast<long>(ref.size());
    if (std::labs(len - c) < std::labs(r - c) || (std::labs(len - c) == std::labs(r - c) && len < r))
      r = len;
  }

  BleuReport report;
  report.brevity_penalty = c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const double p = modified_precision(candidate, references, n);
    report.precisions.push_back(p);
    if (p == 0.0) zero = true;
    else log_sum += std::log(p);
    report.cumulative.push_back(zero ? 0.0 : report.brevity_penalty * std::exp(log_sum / static_cast<double>(n)));
  }
  return report;
}

/// BLEU on raw text, tokenized by lowercased word splitting.
inline BleuReport bleu(const std::string& candidate, const std::vector<std::string>& references,
                       std::size_t max_n = 4) {
  std::vector<Tokens> refs;
  for (const auto& r : references) refs.push_back(surface_tokens(r));
  return bleu(surface_tokens(candidate), refs, max_n);
}

struct TopKBleu {
  std::vector<double> cumulative; // mean BLEU-n
  std::vector<double> precisions; // mean p_n
  std::size_t count = 0;
};

inline constexpr std::size_t kBleuTopK = 5;

/// Arithmetic mean over the first min(top_k, |candidates|) candidates. A
/// candidate without words scores zero.
inline TopKBleu evaluate_topk(const std::vector<std::string>& candidates, const std::string& reference,
                              std::size_t max_n = 4, std::size_t top_k = kBleuTopK) {
  if (candidates.empty()) throw UsageError("no candidates to evaluate");
  TopKBleu out{std::vector<double>(max_n, 0.0), std::vector<double>(max_n, 0.0), 0};
  out.count = std::min(top_k, candidates.size());
  const std::vector<Tokens> refs{surface_tokens(reference)};
  for (std::size_t i = 0; i < out.count; ++i) {
    const Tokens cand = surface_tokens(candidates[i]);
    if (cand.empty()) continue;
    const BleuReport r = bleu(cand, refs, max_n);
    for (std::size_t n = 0; n < max_n; ++n) {
      out.cumulative[n] += r.cumulative[n];
      out.precisions[n] += r.precisions[n];
    }
  }
  for (std::size_t n = 0; n < max_n; ++n) {
    out.cumulative[n] /= static_cast<double>(out.count);
    out.precisions[n] /= static_cast<double>(out.count);
  }
  return out;
}

} // namespace rallycast
