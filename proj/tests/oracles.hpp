#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls the code it checks beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "rallycast/lsi.hpp"
#include "rallycast/mrf.hpp"
#include "rallycast/retrieval.hpp"

namespace oracle {

using rallycast::Matrix;

// ---- MRF ----------------------------------------------------------------

/// Random ladder MRF with costs in [0, 1). With constant_rungs, the
/// upper-lower and lower-upper edges carry one constant value so the graph
/// splits into two independent chains.
inline rallycast::LadderMrf random_mrf(std::mt19937_64& rng, std::size_t T, std::size_t U, std::size_t L,
                                       bool constant_rungs) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  rallycast::LadderMrf mrf(T, U, L);
  for (std::size_t n = 0; n < mrf.num_nodes(); ++n)
    for (double& x : mrf.unary(n)) x = u(rng);
  const double rung = u(rng);
  for (auto& e : mrf.edges()) {
    const bool is_rung = e.family == rallycast::EdgeFamily::upper_lower ||
                         e.family == rallycast::EdgeFamily::lower_upper;
    for (double& x : e.cost.data) x = constant_rungs && is_rung ? rung : u(rng);
  }
  return mrf;
}

/// Min-sum dynamic programming over one chain: unary[t][x] and
/// pair[t](x_t, x_{t+1}). Returns the optimal labels.
inline std::vector<std::size_t> viterbi(const std::vector<std::vector<double>>& unary,
                                        const std::vector<const Matrix*>& pair) {
  const std::size_t T = unary.size();
  std::vector<std::vector<double>> cost(T);
  std::vector<std::vector<std::size_t>> back(T);
  cost[0] = unary[0];
  for (std::size_t t = 1; t < T; ++t) {
    const std::size_t K = unary[t].size();
    cost[t].assign(K, std::numeric_limits<double>::infinity());
    back[t].assign(K, 0);
    for (std::size_t x = 0; x < K; ++x)
      for (std::size_t p = 0; p < cost[t - 1].size(); ++p) {
        const double c = cost[t - 1][p] + (*pair[t - 1])(p, x) + unary[t][x];
        if (c < cost[t][x]) {
          cost[t][x] = c;
          back[t][x] = p;
        }
      }
  }
  std::vector<std::size_t> out(T);
  out[T - 1] = static_cast<std::size_t>(std::min_element(cost[T - 1].begin(), cost[T - 1].end()) -
                                        cost[T - 1].begin());
  for (std::size_t t = T - 1; t > 0; --t) out[t - 1] = back[t][out[t]];
  return out;
}

/// Node labels from decoding the upper and lower chains separately.
inline std::vector<std::size_t> two_chain_viterbi(const rallycast::LadderMrf& mrf) {
  const std::size_t T = mrf.num_windows();
  std::vector<std::size_t> labels(2 * T);
  for (auto side : {rallycast::Side::upper, rallycast::Side::lower}) {
    const auto family = side == rallycast::Side::upper ? rallycast::EdgeFamily::upper_upper
                                                       : rallycast::EdgeFamily::lower_lower;
    std::vector<std::vector<double>> unary;
    std::vector<const Matrix*> pair;
    for (std::size_t t = 0; t < T; ++t) unary.push_back(mrf.unary(rallycast::LadderMrf::node(t, side)));
    for (const auto& e : mrf.edges())
      if (e.family == family) pair.push_back(&e.cost);
    const auto chain = viterbi(unary, pair);
    for (std::size_t t = 0; t < T; ++t) labels[rallycast::LadderMrf::node(t, side)] = chain[t];
  }
  return labels;
}

// ---- BLEU ---------------------------------------------------------------

inline std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string w;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      w += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    } else if (!w.empty()) {
      out.push_back(w);
      w.clear();
    }
  }
  if (!w.empty()) out.push_back(w);
  return out;
}

struct Bleu {
  std::vector<double> p;
  double bp = 1.0;
  std::vector<double> cumulative;
};

/// Textbook BLEU: clipped n-gram precision against the per-n-gram maximum
/// over references, brevity penalty from the closest reference length
/// (shorter on ties), no smoothing.
inline Bleu bleu(const std::vector<std::string>& cand, const std::vector<std::vector<std::string>>& refs, int N) {
  auto grams = [](const std::vector<std::string>& toks, int n) {
    std::unordered_map<std::string, int> m;
    for (int i = 0; i + n <= static_cast<int>(toks.size()); ++i) {
      std::string key;
      for (int j = 0; j < n; ++j) key += toks[i + j] + '|';
      ++m[key];
    }
    return m;
  };
  Bleu out;
  const int c = static_cast<int>(cand.size());
  int best = -1;
  for (const auto& r : refs) {
    const int len = static_cast<int>(r.size());
    if (best < 0 || std::abs(len - c) < std::abs(best - c) || (std::abs(len - c) == std::abs(best - c) && len < best))
      best = len;
  }
  out.bp = c >= best ? 1.0 : std::exp(1.0 - double(best) / double(c));
  double logsum = 0.0;
  bool dead = false;
  for (int n = 1; n <= N; ++n) {
    const auto cg = grams(cand, n);
    std::unordered_map<std::string, int> maxref;
    for (const auto& r : refs)
      for (const auto& [g, k] : grams(r, n)) maxref[g] = std::max(maxref[g], k);
    int num = 0, den = 0;
    for (const auto& [g, k] : cg) {
      den += k;
      auto it = maxref.find(g);
      num += std::min(k, it == maxref.end() ? 0 : it->second);
    }
    const double p = den == 0 ? 0.0 : double(num) / double(den);
    out.p.push_back(p);
    if (p == 0.0) dead = true;
    else logsum += std::log(p);
    out.cumulative.push_back(dead ? 0.0 : out.bp * std::exp(logsum / n));
  }
  return out;
}

// ---- Linear algebra -----------------------------------------------------

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows, m.cols);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) e(r, c) = m(r, c);
  return e;
}

/// Sparse non-negative matrix with roughly `density` nonzeros.
inline rallycast::TermDocMatrix random_term_doc(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                                double density = 0.4) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  rallycast::TermDocMatrix m{rows, cols, {}};
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (u(rng) < density) m.entries.push_back({r, c, u(rng)});
  if (m.entries.empty()) m.entries.push_back({0, 0, 1.0});
  return m;
}

// ---- Retrieval ----------------------------------------------------------

/// Highest coverage over every single-sentence selection.
inline std::size_t max_coverage(const rallycast::Query& q, const std::vector<rallycast::Commentary>& corpus) {
  std::size_t best = 0;
  for (const auto& doc : corpus) {
    std::size_t cov = 0;
    for (const auto& w : q.words)
      cov += std::find(doc.tokens.begin(), doc.tokens.end(), w) != doc.tokens.end();
    best = std::max(best, cov);
  }
  return best;
}

/// Cosine of Sigma^-1 U^T q against every document, computed from the model's
/// stored factors with dense Eigen algebra and a tf-idf query rebuilt from the
/// dictionary by hand.
inline std::vector<double> cosine_scan(const rallycast::Query& q, const rallycast::LsiIndex& index) {
  const auto& m = index.model;
  const auto& d = index.dictionary;
  Eigen::VectorXd qv = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.rows));
  for (const auto& w : q.words)
    if (auto id = d.id(w))
      qv(static_cast<Eigen::Index>(*id)) +=
          std::log((1.0 + double(d.num_docs())) / (1.0 + double(d.doc_freq(*id)))) + 1.0;
  if (qv.norm() > 0) qv /= qv.norm();
  const Eigen::MatrixXd U = to_eigen(m.term_factors), V = to_eigen(m.doc_factors);
  Eigen::VectorXd s(static_cast<Eigen::Index>(m.k));
  for (std::size_t i = 0; i < m.k; ++i) s(static_cast<Eigen::Index>(i)) = m.singular_values[i];
  const Eigen::VectorXd latent = (U.transpose() * qv).cwiseQuotient(s);
  std::vector<double> out;
  for (Eigen::Index j = 0; j < V.rows(); ++j) {
    const Eigen::VectorXd v = V.row(j).transpose();
    const double den = latent.norm() * v.norm();
    out.push_back(den == 0 ? 0.0 : latent.dot(v) / den);
  }
  return out;
}

/// Six documents: "automobil" and "car" never share a document but both
/// co-occur with "engin"; three fruit documents form an unrelated topic.
inline std::vector<std::string> synonymy_fixture() {
  return {"car engine", "automobile engine", "car engine motor",
          "banana apple", "apple orchard", "banana orchard fruit"};
}

// ---- Platt --------------------------------------------------------------

/// Golden-section minimum of a unimodal function on [lo, hi].
template <typename F>
double golden_min(F f, double lo, double hi, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi, c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d; d = c; fd = fc; c = b - g * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd; d = a + g * (b - a); fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

/// Platt negative log-likelihood minimized by nested golden-section search
/// (the objective is jointly convex in a and b).
inline std::pair<double, double> platt_golden(const std::vector<double>& s, const std::vector<int>& y,
                                              double range = 60.0) {
  double pos = 0, neg = 0;
  for (int v : y) (v ? pos : neg) += 1;
  auto nll = [&](double a, double b) {
    double f = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double t = y[i] ? (pos + 1) / (pos + 2) : 1 / (neg + 2);
      const double p = 1.0 / (1.0 + std::exp(a * s[i] + b));
      f -= t * std::log(p) + (1 - t) * std::log(1 - p);
    }
    return f;
  };
  auto best_b = [&](double a) { return golden_min([&](double b) { return nll(a, b); }, -range, range); };
  const double a = golden_min([&](double a) { return nll(a, best_b(a)); }, -range, range);
  return {a, best_b(a)};
}

// ---- Files and processes -------------------------------------------------

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path = std::filesystem::temp_directory_path() / ("rallycast-" + tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

struct ProcessResult {
  int exit_code = -1;
  std::string output; // stdout and stderr interleaved
};

/// Runs a shell command line and captures its combined output.
inline ProcessResult run(const std::string& cmd) {
  ProcessResult r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string quote(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

} // namespace oracle
