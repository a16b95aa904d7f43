#pragma once

#include <cstddef>
#include <vector>

#include "rallycast/error.hpp"
#include "rallycast/lexicon.hpp"
#include "rallycast/matrix.hpp"

namespace rallycast {

/// Window-to-window label transition probabilities for the two players.
/// p11: upper->upper, p12: upper->lower, p22: lower->lower, p21: lower->upper.
/// Rows index the label at window t, columns the label at window t+1.
struct TransitionModel {
  Matrix p11; // U x U
  Matrix p12; // U x L
  Matrix p22; // L x L
  Matrix p21; // L x U
  double smoothing_alpha = 1.0;

  std::size_t upper_labels() const { return p11.rows; }
  std::size_t lower_labels() const { return p22.rows; }
};

/// Additive-smoothed transition frequencies over consecutive window pairs:
/// (count + alpha) / (row_total + alpha * row_width).
inline TransitionModel estimate_transitions(const std::vector<LabelSequence>& sequences,
                                            std::size_t upper_labels, std::size_t lower_labels,
                                            double alpha) {
  if (!(alpha > 0.0)) throw UsageError("transition smoothing alpha must be > 0");
  if (upper_labels < 1 || lower_labels < 1) throw UsageError("lexicon sides must be non-empty");

  TransitionModel m{Matrix(upper_labels, upper_labels), Matrix(upper_labels, lower_labels),
                    Matrix(lower_labels, lower_labels), Matrix(lower_labels, upper_labels), alpha};
  std::size_t pairs = 0;
  for (const auto& seq : sequences) {
    for (const auto& [u, l] : seq)
      if (u >= upper_labels || l >= lower_labels)
        throw DataError("training label outside the lexicon");
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
      const auto [u0, l0] = seq[t];
      const auto [u1, l1] = seq[t + 1];
      m.p11(u0, u1) += 1.0;
      m.p12(u0, l1) += 1.0;
      m.p22(l0, l1) += 1.0;
      m.p21(l0, u1) += 1.0;
      ++pairs;
    }
  }
  if (pairs == 0) throw DataError("training data has no consecutive window pairs");

  for (Matrix* p : {&m.p11, &m.p12, &m.p22, &m.p21}) {
    for (std::size_t r = 0; r < p->rows; ++r) {
      double total = 0.0;
      for (double c : p->row(r)) total += c;
      const double denom = total + alpha * static_cast<double>(p->cols);
      for (double& c : p->row(r)) c = (c + alpha) / denom;
    }
  }
  return m;
}

} // namespace rallycast
