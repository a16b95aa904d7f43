#pragma once

// Platt scaling of raw classifier margins into probabilities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rallycast/error.hpp"
#include "rallycast/lexicon.hpp"

namespace rallycast {

struct PlattParams {
  double a = -1.0;
  double b = 0.0;

  /// p(s) = 1 / (1 + exp(a*s + b)), evaluated without overflow.
  double operator()(double s) const {
    const double z = a * s + b;
    if (z >= 0.0) {
      const double e = std::exp(-z);
      return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
  }
};

struct PlattFitOptions {
  int max_iters = 200;
  double grad_tol = 1e-8;
  double min_step = 1e-10;
  double hessian_ridge = 1e-12;
};

/// Negative log-likelihood of Platt's regularized targets under (a, b).
inline double platt_objective(std::span<const double> scores, std::span<const double> targets,
                              double a, double b) {
  double f = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double z = scores[i] * a + b;
    if (z >= 0.0) f += targets[i] * z + std::log1p(std::exp(-z));
    else f += (targets[i] - 1.0) * z + std::log1p(std::exp(z));
  }
  return f;
}

/// Targets (N+ + 1)/(N+ + 2) for positives and 1/(N- + 2) for negatives.
inline std::vector<double> platt_targets(std::span<const std::uint8_t> labels) {
  const auto pos = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](auto l) { return l != 0; }));
  const auto neg = static_cast<double>(labels.size()) - pos;
  std::vector<double> t(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    t[i] = labels[i] ? (pos + 1.0) / (pos + 2.0) : 1.0 / (neg + 2.0);
  return t;
}

/// Newton's method with backtracking line search (Lin, Lin & Weng's
/// formulation of Platt's fit).
/// Labels are binary: nonzero marks a positive example.
inline PlattParams platt_fit(std::span<const double> scores, std::span<const std::uint8_t> labels,
                             const PlattFitOptions& opts = {}) {
  if (scores.size() != labels.size()) throw UsageError("platt_fit: scores and labels differ in length");
  const auto pos = std::count_if(labels.begin(), labels.end(), [](auto l) { return l != 0; });
  const auto neg = static_cast<std::ptrdiff_t>(labels.size()) - pos;
  if (pos == 0 || neg == 0) throw DataError("platt_fit needs both positive and negative examples");

  const auto targets = platt_targets(labels);
  double a = 0.0;
  double b = std::log((neg + 1.0) / (pos + 1.0));
  double fval = platt_objective(scores, targets, a, b);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    double h11 = opts.hessian_ridge, h22 = opts.hessian_ridge, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double z = scores[i] * a + b;
      double p, q;
      if (z >= 0.0) {
        const double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = targets[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::hypot(g1, g2) < opts.grad_tol) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;

    double step = 1.0;
    while (step >= opts.min_step) {
      const double na = a + step * da, nb = b + step * db;
      const double nf = platt_objective(scores, targets, na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < opts.min_step) break; // line search stalled at the optimum's resolution
  }
  return {a, b};
}

/// One sigmoid per phrase and side.
struct PlattModel {
  std::vector<PlattParams> upper;
  std::vector<PlattParams> lower;

  const std::vector<PlattParams>& side(Side s) const { return s == Side::upper ? upper : lower; }
  std::vector<PlattParams>& side(Side s) { return s == Side::upper ? upper : lower; }
};

/// Elementwise sigmoid; column j of each side uses that side's j-th parameters.
inline ScoreSequence calibrate(const ScoreSequence& seq, const PlattModel& model) {
  ScoreSequence out = seq;
  for (Side s : {Side::upper, Side::lower}) {
    const auto& params = model.side(s);
    Matrix& m = out.scores(s);
    if (params.size() != m.cols)
      throw DataError(std::string("Platt model covers ") + std::to_string(params.size()) + " " +
                      to_string(s) + " phrases, scores have " + std::to_string(m.cols));
    for (std::size_t t = 0; t < m.rows; ++t)
      for (std::size_t j = 0; j < m.cols; ++j) m(t, j) = params[j](m(t, j));
  }
  return out;
}

struct PlattModelOptions {
  /// Phrases with fewer positive windows than this use the pooled side fit.
  std::size_t min_positives = 5;
  PlattFitOptions fit;
};

/// Fits per-phrase sigmoids from labelled training sequences (one-vs-rest on
/// the window's true label), falling back to one pooled sigmoid per side.
inline PlattModel fit_platt_model(const std::vector<ScoreSequence>& sequences,
                                  const std::vector<LabelSequence>& labels,
                                  const PlattModelOptions& opts = {}) {
  if (sequences.empty() || sequences.size() != labels.size())
    throw DataError("calibration needs one label sequence per score sequence");
  PlattModel model;
  for (Side s : {Side::upper, Side::lower}) {
    const std::size_t width = sequences.front().scores(s).cols;
    std::vector<std::vector<double>> col_scores(width);
    std::vector<std::vector<std::uint8_t>> col_labels(width);
    std::vector<double> pooled_scores;
    std::vector<std::uint8_t> pooled_labels;
    for (std::size_t v = 0; v < sequences.size(); ++v) {
      const Matrix& m = sequences[v].scores(s);
      if (m.cols != width) throw DataError("calibration sequences disagree on lexicon size");
      if (labels[v].size() != m.rows)
        throw DataError(sequences[v].video_id + ": label count does not match window count");
      for (std::size_t t = 0; t < m.rows; ++t) {
        const std::size_t truth = s == Side::upper ? labels[v][t].first : labels[v][t].second;
        if (truth >= width) throw DataError(sequences[v].video_id + ": label out of range");
        for (std::size_t j = 0; j < width; ++j) {
          col_scores[j].push_back(m(t, j));
          col_labels[j].push_back(j == truth);
          pooled_scores.push_back(m(t, j));
          pooled_labels.push_back(j == truth);
        }
      }
    }
    const PlattParams pooled = platt_fit(pooled_scores, pooled_labels, opts.fit);
    auto& params = model.side(s);
    for (std::size_t j = 0; j < width; ++j) {
      const auto pos = static_cast<std::size_t>(
          std::count(col_labels[j].begin(), col_labels[j].end(), std::uint8_t{1}));
      if (pos < opts.min_positives || pos == col_labels[j].size()) {
        params.push_back(pooled);
        continue;
      }
      params.push_back(platt_fit(col_scores[j], col_labels[j], opts.fit));
    }
  }
  return model;
}

} // namespace rallycast
