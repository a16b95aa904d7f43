#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "rallycast/lexicon.hpp"

namespace rallycast {

struct DetectionEvent {
  std::size_t phrase_id = 0;
  Side side = Side::upper;
  std::size_t window = 0;
  double prob = 0.0;

  bool operator==(const DetectionEvent&) const = default;
};

/// Greedy temporal non-maximum suppression within each (side, phrase) track.
/// Events are visited by descending prob (earlier window first on ties); an
/// event survives unless a survivor of its track lies within +-radius windows.
/// Output is ordered by window, then side, then phrase id.
inline std::vector<DetectionEvent> temporal_nms(std::span<const DetectionEvent> events,
                                                std::size_t radius) {
  std::map<std::pair<int, std::size_t>, std::vector<DetectionEvent>> tracks;
  for (const auto& e : events) tracks[{static_cast<int>(e.side), e.phrase_id}].push_back(e);

  std::vector<DetectionEvent> kept;
  for (auto& [key, track] : tracks) {
    std::stable_sort(track.begin(), track.end(), [](const auto& x, const auto& y) {
      if (x.prob != y.prob) return x.prob > y.prob;
      return x.window < y.window;
    });
    std::vector<std::size_t> taken;
    for (const auto& e : track) {
      const bool suppressed = std::any_of(taken.begin(), taken.end(), [&](std::size_t w) {
        return (w > e.window ? w - e.window : e.window - w) <= radius;
      });
      if (suppressed) continue;
      taken.push_back(e.window);
      kept.push_back(e);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& x, const auto& y) {
    return std::tuple(x.window, static_cast<int>(x.side), x.phrase_id) <
           std::tuple(y.window, static_cast<int>(y.side), y.phrase_id);
  });
  return kept;
}

} // namespace rallycast
