#pragma once

// Raw per-window scores -> smoothed per-window label pairs -> phrase set.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rallycast/lexicon.hpp"
#include "rallycast/mrf.hpp"
#include "rallycast/nms.hpp"
#include "rallycast/platt.hpp"
#include "rallycast/transitions.hpp"

namespace rallycast {

struct PhraseRef {
  Side side = Side::upper;
  std::size_t phrase_id = 0;

  bool operator==(const PhraseRef&) const = default;
};

struct DecodeOptions {
  BpOptions bp;
  /// Defaults to window_size / (2 * window_stride).
  std::optional<std::size_t> nms_radius;
  bool smoothing = true;
  /// Experimental: suppress non-maximal per-phrase scores before building the MRF.
  bool nms_before_mrf = false;
  double prob_clamp = kDefaultProbClamp;
};

struct DecodeResult {
  LabelSequence labels;
  std::vector<PhraseRef> phrases;
  bool converged = true;
  double energy = 0.0;
};

inline std::size_t default_nms_radius(const ScoreSequence& seq) {
  if (seq.window_stride == 0) throw DataError("window_stride must be >= 1");
  return seq.window_size / (2 * seq.window_stride);
}

/// Per-window argmax on each side, lowest index on ties.
inline LabelSequence argmax_labels(const ScoreSequence& probs) {
  LabelSequence out(probs.num_windows());
  for (std::size_t t = 0; t < out.size(); ++t) {
    const auto u = probs.upper.row(t), l = probs.lower.row(t);
    out[t] = {static_cast<std::size_t>(std::max_element(u.begin(), u.end()) - u.begin()),
              static_cast<std::size_t>(std::max_element(l.begin(), l.end()) - l.begin())};
  }
  return out;
}

/// Ordered, deduplicated phrases among the winning labels that survive
/// temporal NMS on their calibrated scores.
inline std::vector<PhraseRef> phrase_set(const ScoreSequence& probs, const LabelSequence& labels,
                                         std::size_t radius) {
  std::vector<DetectionEvent> events;
  events.reserve(2 * labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    events.push_back({labels[t].first, Side::upper, t, probs.upper(t, labels[t].first)});
    events.push_back({labels[t].second, Side::lower, t, probs.lower(t, labels[t].second)});
  }
  std::vector<PhraseRef> out;
  for (const auto& e : temporal_nms(events, radius)) {
    const PhraseRef ref{e.side, e.phrase_id};
    if (std::find(out.begin(), out.end(), ref) == out.end()) out.push_back(ref);
  }
  return out;
}

inline ScoreSequence suppress_non_maxima(const ScoreSequence& probs, std::size_t radius, double floor) {
  ScoreSequence out = probs;
  for (Side s : {Side::upper, Side::lower}) {
    const Matrix& m = probs.scores(s);
    std::vector<DetectionEvent> events;
    for (std::size_t t = 0; t < m.rows; ++t)
      for (std::size_t j = 0; j < m.cols; ++j) events.push_back({j, s, t, m(t, j)});
    Matrix& dst = out.scores(s);
    std::fill(dst.data.begin(), dst.data.end(), floor);
    for (const auto& e : temporal_nms(events, radius)) dst(e.window, e.phrase_id) = e.prob;
  }
  return out;
}

/// Decodes already-calibrated probabilities.
inline DecodeResult decode_calibrated(const ScoreSequence& probs, const TransitionModel& trans,
                                      const DecodeOptions& opts = {}) {
  probs.validate();
  const std::size_t radius = opts.nms_radius.value_or(default_nms_radius(probs));
  DecodeResult out;
  if (opts.smoothing) {
    const ScoreSequence input =
        opts.nms_before_mrf ? suppress_non_maxima(probs, radius, opts.prob_clamp) : probs;
    const LadderMrf mrf = build_mrf(input, trans, opts.prob_clamp);
    const BpResult bp = loopy_bp(mrf, opts.bp);
    out.labels = bp.assignment.label_pairs();
    out.converged = bp.converged;
    out.energy = bp.assignment.energy;
  } else {
    out.labels = argmax_labels(probs);
  }
  out.phrases = phrase_set(probs, out.labels, radius);
  return out;
}

/// calibrate -> build_mrf -> loopy_bp -> phrase set.
inline DecodeResult decode_phrases(const ScoreSequence& raw, const PlattModel& platt,
                                   const TransitionModel& trans, const DecodeOptions& opts = {}) {
  return decode_calibrated(calibrate(raw, platt), trans, opts);
}

inline std::vector<std::string> phrase_strings(const std::vector<PhraseRef>& phrases,
                                               const PhraseLexicon& lexicon) {
  std::vector<std::string> out;
  out.reserve(phrases.size());
  for (const auto& p : phrases) out.push_back(lexicon.phrase(p.side, p.phrase_id));
  return out;
}

} // namespace rallycast
