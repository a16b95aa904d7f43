#pragma once

// Two-chain ("ladder") pairwise MRF over per-window phrase labels and its
// MAP solvers: synchronous min-sum loopy belief propagation and exhaustive
// enumeration for small instances.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "rallycast/error.hpp"
#include "rallycast/lexicon.hpp"
#include "rallycast/matrix.hpp"
#include "rallycast/transitions.hpp"

namespace rallycast {

enum class EdgeFamily { upper_upper, lower_lower, upper_lower, lower_upper };

/// Pairwise term between window t (from) and window t+1 (to);
/// cost(label_from, label_to).
struct MrfEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  EdgeFamily family = EdgeFamily::upper_upper;
  Matrix cost;
};

/// Node 2t is the upper player at window t, node 2t+1 the lower player.
/// Consecutive windows are joined by four edges (upper-upper, lower-lower,
/// upper-lower, lower-upper), so the graph has cycles once T >= 2.
class LadderMrf {
public:
  LadderMrf(std::size_t windows, std::size_t upper_labels, std::size_t lower_labels)
      : windows_(windows), upper_labels_(upper_labels), lower_labels_(lower_labels) {
    if (windows < 1 || upper_labels < 1 || lower_labels < 1)
      throw UsageError("MRF needs at least one window and one label per side");
    unary_.resize(2 * windows);
    for (std::size_t n = 0; n < unary_.size(); ++n) unary_[n].assign(labels(n), 0.0);
    for (std::size_t t = 0; t + 1 < windows; ++t) {
      const std::size_t u0 = node(t, Side::upper), l0 = node(t, Side::lower);
      const std::size_t u1 = node(t + 1, Side::upper), l1 = node(t + 1, Side::lower);
      edges_.push_back({u0, u1, EdgeFamily::upper_upper, Matrix(upper_labels, upper_labels)});
      edges_.push_back({l0, l1, EdgeFamily::lower_lower, Matrix(lower_labels, lower_labels)});
      edges_.push_back({u0, l1, EdgeFamily::upper_lower, Matrix(upper_labels, lower_labels)});
      edges_.push_back({l0, u1, EdgeFamily::lower_upper, Matrix(lower_labels, upper_labels)});
    }
  }

  static std::size_t node(std::size_t window, Side side) {
    return 2 * window + (side == Side::lower ? 1 : 0);
  }

  std::size_t num_windows() const { return windows_; }
  std::size_t num_nodes() const { return unary_.size(); }
  std::size_t labels(std::size_t node) const { return node % 2 == 0 ? upper_labels_ : lower_labels_; }
  std::size_t labels(Side s) const { return s == Side::upper ? upper_labels_ : lower_labels_; }

  std::vector<double>& unary(std::size_t node) { return unary_[node]; }
  const std::vector<double>& unary(std::size_t node) const { return unary_[node]; }

  std::vector<MrfEdge>& edges() { return edges_; }
  const std::vector<MrfEdge>& edges() const { return edges_; }

private:
  std::size_t windows_;
  std::size_t upper_labels_;
  std::size_t lower_labels_;
  std::vector<std::vector<double>> unary_;
  std::vector<MrfEdge> edges_;
};

inline constexpr double kDefaultProbClamp = 1e-6;

/// Unary cost 1 - p(label | window) from calibrated probabilities clamped to
/// [clamp, 1 - clamp]; each edge family carries 1 - p from its transition
/// matrix.
inline LadderMrf build_mrf(const ScoreSequence& probs, const TransitionModel& trans,
                           double clamp = kDefaultProbClamp) {
  const std::size_t T = probs.num_windows();
  const std::size_t U = probs.upper.cols, L = probs.lower.cols;
  if (T < 1 || probs.lower.rows != T) throw DataError("score sequence has inconsistent windows");
  if (trans.p11.rows != U || trans.p11.cols != U || trans.p12.rows != U || trans.p12.cols != L ||
      trans.p22.rows != L || trans.p22.cols != L || trans.p21.rows != L || trans.p21.cols != U)
    throw DataError("transition model dimensions do not match the score sequence");

  LadderMrf mrf(T, U, L);
  for (std::size_t t = 0; t < T; ++t) {
    for (Side s : {Side::upper, Side::lower}) {
      auto& unary = mrf.unary(LadderMrf::node(t, s));
      const auto row = probs.scores(s).row(t);
      for (std::size_t j = 0; j < row.size(); ++j) {
        const double p = row[j];
        if (!(p >= 0.0 && p <= 1.0)) throw DataError("calibrated probability outside [0, 1]");
        unary[j] = 1.0 - std::clamp(p, clamp, 1.0 - clamp);
      }
    }
  }
  for (auto& e : mrf.edges()) {
    const Matrix* p = nullptr;
    switch (e.family) {
    case EdgeFamily::upper_upper: p = &trans.p11; break;
    case EdgeFamily::lower_lower: p = &trans.p22; break;
    case EdgeFamily::upper_lower: p = &trans.p12; break;
    case EdgeFamily::lower_upper: p = &trans.p21; break;
    }
    for (std::size_t i = 0; i < p->data.size(); ++i) e.cost.data[i] = 1.0 - p->data[i];
  }
  return mrf;
}

struct Assignment {
  std::vector<std::size_t> labels; // per node
  double energy = 0.0;

  LabelSequence label_pairs() const {
    LabelSequence out(labels.size() / 2);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = {labels[2 * t], labels[2 * t + 1]};
    return out;
  }
};

/// Sum of unary and pairwise costs under a full labelling.
inline double evaluate_energy(const LadderMrf& mrf, std::span<const std::size_t> labels) {
  if (labels.size() != mrf.num_nodes()) throw UsageError("assignment does not cover every node");
  double e = 0.0;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] >= mrf.labels(n)) throw UsageError("assignment label out of range");
    e += mrf.unary(n)[labels[n]];
  }
  for (const auto& edge : mrf.edges()) e += edge.cost(labels[edge.from], labels[edge.to]);
  return e;
}

inline constexpr double kExactMapGuard = 1e7;

/// Exhaustive minimum over all labellings, visited in lexicographic order so
/// the lowest such labelling wins ties.
inline Assignment exact_map(const LadderMrf& mrf, double guard = kExactMapGuard) {
  double states = 1.0;
  for (std::size_t n = 0; n < mrf.num_nodes(); ++n) states *= static_cast<double>(mrf.labels(n));
  if (states > guard) throw UsageError("exact MAP state space exceeds the enumeration guard");

  std::vector<std::size_t> cur(mrf.num_nodes(), 0);
  Assignment best{cur, evaluate_energy(mrf, cur)};
  while (true) {
    std::size_t n = cur.size();
    while (n > 0) {
      --n;
      if (++cur[n] < mrf.labels(n)) break;
      cur[n] = 0;
      if (n == 0) return best;
    }
    const double e = evaluate_energy(mrf, cur);
    if (e < best.energy - 1e-12) best = {cur, e};
  }
}

struct BpOptions {
  int max_iters = 200;
  double damping = 0.5;
  double tol = 1e-6;
};

struct BpResult {
  Assignment assignment;
  bool converged = false;
  int iterations = 0;
};

/// Synchronous min-sum loopy BP. Messages are damped, normalized to a zero
/// minimum, and iterated until the largest change drops below tol. Labels
/// are per-node belief argmins (lowest index on ties). The returned labelling
/// is the lowest-energy one decoded across all iterations.
inline BpResult loopy_bp(const LadderMrf& mrf, const BpOptions& opts = {}) {
  if (!(opts.damping >= 0.0 && opts.damping < 1.0)) throw UsageError("BP damping must be in [0, 1)");
  const auto& edges = mrf.edges();
  const std::size_t num_nodes = mrf.num_nodes();

  // Message 2e flows from->to along edge e, message 2e+1 flows to->from.
  std::vector<std::vector<double>> msg(2 * edges.size());
  std::vector<std::vector<std::size_t>> incoming(num_nodes);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    msg[2 * e].assign(mrf.labels(edges[e].to), 0.0);
    msg[2 * e + 1].assign(mrf.labels(edges[e].from), 0.0);
    incoming[edges[e].to].push_back(2 * e);
    incoming[edges[e].from].push_back(2 * e + 1);
  }

  auto beliefs = [&](const std::vector<std::vector<double>>& m) {
    std::vector<std::vector<double>> b(num_nodes);
    for (std::size_t n = 0; n < num_nodes; ++n) {
      b[n] = mrf.unary(n);
      for (std::size_t id : incoming[n])
        for (std::size_t x = 0; x < b[n].size(); ++x) b[n][x] += m[id][x];
    }
    return b;
  };
  auto decode = [&](const std::vector<std::vector<double>>& b) {
    Assignment a;
    a.labels.resize(num_nodes);
    for (std::size_t n = 0; n < num_nodes; ++n)
      a.labels[n] = static_cast<std::size_t>(std::min_element(b[n].begin(), b[n].end()) - b[n].begin());
    a.energy = evaluate_energy(mrf, a.labels);
    return a;
  };

  BpResult result;
  result.assignment = decode(beliefs(msg));
  std::vector<std::vector<double>> next = msg;
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    const auto b = beliefs(msg);
    double delta = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto& edge = edges[e];
      for (int dir = 0; dir < 2; ++dir) {
        const std::size_t id = 2 * e + dir;
        const std::size_t src = dir == 0 ? edge.from : edge.to;
        const auto& reverse = msg[id ^ 1];
        auto& out = next[id];
        std::fill(out.begin(), out.end(), std::numeric_limits<double>::infinity());
        for (std::size_t xs = 0; xs < b[src].size(); ++xs) {
          const double h = b[src][xs] - reverse[xs];
          for (std::size_t xd = 0; xd < out.size(); ++xd) {
            const double c = dir == 0 ? edge.cost(xs, xd) : edge.cost(xd, xs);
            out[xd] = std::min(out[xd], h + c);
          }
        }
        const double lo = *std::min_element(out.begin(), out.end());
        for (std::size_t x = 0; x < out.size(); ++x) {
          const double v = opts.damping * msg[id][x] + (1.0 - opts.damping) * (out[x] - lo);
          delta = std::max(delta, std::abs(v - msg[id][x]));
          out[x] = v;
        }
      }
    }
    std::swap(msg, next);
    result.iterations = iter;

    Assignment a = decode(beliefs(msg));
    if (a.energy < result.assignment.energy) result.assignment = std::move(a);
    if (delta < opts.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

} // namespace rallycast
