#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rallycast/error.hpp"
#include "rallycast/matrix.hpp"

namespace rallycast {

/// Player half of the court: upper is the far side of the net.
enum class Side { upper = 0, lower = 1 };

inline const char* to_string(Side s) { return s == Side::upper ? "upper" : "lower"; }

class PhraseLexicon {
public:
  PhraseLexicon() = default;
  PhraseLexicon(std::vector<std::string> upper, std::vector<std::string> lower)
      : upper_(std::move(upper)), lower_(std::move(lower)) {
    check(upper_, "upper");
    check(lower_, "lower");
  }

  const std::vector<std::string>& upper() const { return upper_; }
  const std::vector<std::string>& lower() const { return lower_; }
  const std::vector<std::string>& side(Side s) const { return s == Side::upper ? upper_ : lower_; }
  std::size_t size(Side s) const { return side(s).size(); }

  const std::string& phrase(Side s, std::size_t id) const {
    const auto& v = side(s);
    if (id >= v.size()) throw DataError("phrase id " + std::to_string(id) + " out of range");
    return v[id];
  }

  std::optional<std::size_t> find(Side s, const std::string& phrase) const {
    const auto& v = side(s);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] == phrase) return i;
    return std::nullopt;
  }

private:
  static void check(const std::vector<std::string>& v, const char* name) {
    if (v.empty()) throw DataError(std::string(name) + " lexicon is empty");
    std::unordered_set<std::string> seen;
    for (const auto& p : v)
      if (!seen.insert(p).second) throw DataError(std::string("duplicate ") + name + " phrase: " + p);
  }

  std::vector<std::string> upper_;
  std::vector<std::string> lower_;
};

/// Per-window classifier scores for one video. Rows are windows.
struct ScoreSequence {
  std::string video_id;
  std::size_t window_stride = 1;
  std::size_t window_size = 30;
  Matrix upper; // T x U
  Matrix lower; // T x L

  std::size_t num_windows() const { return upper.rows; }
  const Matrix& scores(Side s) const { return s == Side::upper ? upper : lower; }
  Matrix& scores(Side s) { return s == Side::upper ? upper : lower; }

  void validate() const {
    if (upper.rows < 1) throw DataError(video_id + ": score sequence has no windows");
    if (upper.rows != lower.rows)
      throw DataError(video_id + ": upper and lower scores differ in window count");
    if (window_stride < 1) throw DataError(video_id + ": window_stride must be >= 1");
    for (const Matrix* m : {&upper, &lower})
      for (double x : m->data)
        if (!std::isfinite(x)) throw DataError(video_id + ": non-finite score");
  }

  void validate(const PhraseLexicon& lexicon) const {
    validate();
    if (upper.cols != lexicon.size(Side::upper) || lower.cols != lexicon.size(Side::lower))
      throw DataError(video_id + ": score columns do not match the lexicon");
  }
};

/// (upper label, lower label) for one window.
using LabelPair = std::pair<std::size_t, std::size_t>;
using LabelSequence = std::vector<LabelPair>;

} // namespace rallycast
