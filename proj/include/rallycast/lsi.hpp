#pragma once

// Latent semantic index: a truncated SVD of the term-document tf-idf matrix
// with Deerwester-style query fold-in.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rallycast/error.hpp"
#include "rallycast/matrix.hpp"
#include "rallycast/text_corpus.hpp"

namespace rallycast {

struct TermDocEntry {
  std::size_t term = 0;
  std::size_t doc = 0;
  double weight = 0.0;
};

struct TermDocMatrix {
  std::size_t rows = 0; // terms
  std::size_t cols = 0; // documents
  std::vector<TermDocEntry> entries;

  Matrix to_dense() const {
    Matrix m(rows, cols);
    for (const auto& e : entries) m(e.term, e.doc) += e.weight;
    return m;
  }
};

/// Column j is the normalized tf-idf vector of corpus[j].
inline TermDocMatrix build_term_doc_matrix(const std::vector<Commentary>& corpus,
                                           const Dictionary& dict) {
  TermDocMatrix m{dict.size(), corpus.size(), {}};
  for (std::size_t j = 0; j < corpus.size(); ++j)
    for (auto [term, w] : tfidf(corpus[j], dict).entries) m.entries.push_back({term, j, w});
  return m;
}

struct ThinSvd {
  Matrix left;   // m x r, orthonormal columns
  std::vector<double> singular_values; // r, non-increasing
  Matrix right;  // n x r, orthonormal columns
};

/// One-sided (Hestenes) Jacobi SVD of a dense m x n matrix. All min(m, n)
/// singular triplets are returned; columns belonging to zero singular values
/// are left unnormalized and must be discarded by the caller.
inline ThinSvd jacobi_svd(const Matrix& a, int max_sweeps = 80) {
  const bool transposed = a.rows < a.cols;
  const std::size_t p = transposed ? a.cols : a.rows; // long side
  const std::size_t q = transposed ? a.rows : a.cols; // orthogonalized columns

  // Column-major working copy so column rotations touch contiguous memory.
  std::vector<std::vector<double>> w(q, std::vector<double>(p));
  for (std::size_t r = 0; r < a.rows; ++r)
    for (std::size_t c = 0; c < a.cols; ++c) {
      if (transposed) w[r][c] = a(r, c);
      else w[c][r] = a(r, c);
    }
  std::vector<std::vector<double>> v(q, std::vector<double>(q, 0.0));
  for (std::size_t i = 0; i < q; ++i) v[i][i] = 1.0;

  const double tol = 8.0 * std::numeric_limits<double>::epsilon();
  // Columns of a rank-deficient input shrink to rounding noise whose relative
  // orthogonality never settles; below this squared norm they count as zero.
  double frob2 = 0.0;
  for (double x : a.data) frob2 += x * x;
  const double negligible = 1e-26 * frob2;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t i = 0; i + 1 < q; ++i) {
      for (std::size_t j = i + 1; j < q; ++j) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          alpha += w[i][k] * w[i][k];
          beta += w[j][k] * w[j][k];
          gamma += w[i][k] * w[j][k];
        }
        if (alpha <= negligible || beta <= negligible) continue;
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < p; ++k) {
          const double wi = w[i][k], wj = w[j][k];
          w[i][k] = c * wi - s * wj;
          w[j][k] = s * wi + c * wj;
        }
        for (std::size_t k = 0; k < q; ++k) {
          const double vi = v[i][k], vj = v[j][k];
          v[i][k] = c * vi - s * vj;
          v[j][k] = s * vi + c * vj;
        }
      }
    }
  }
  if (!converged) throw NumericalError("Jacobi SVD did not converge");

  std::vector<double> sigma(q);
  for (std::size_t i = 0; i < q; ++i) {
    double sq = 0.0;
    for (double x : w[i]) sq += x * x;
    sigma[i] = std::sqrt(sq);
  }
  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  // W = U_w diag(sigma) V_w^T with U_w = w / sigma. Undo the transpose.
  ThinSvd out{Matrix(a.rows, q), std::vector<double>(q), Matrix(a.cols, q)};
  for (std::size_t c = 0; c < q; ++c) {
    const std::size_t src = order[c];
    const double sg = sigma[src];
    out.singular_values[c] = sg;
    for (std::size_t k = 0; k < p; ++k) {
      const double u = sg > 0.0 ? w[src][k] / sg : w[src][k];
      if (transposed) out.right(k, c) = u;
      else out.left(k, c) = u;
    }
    for (std::size_t k = 0; k < q; ++k) {
      if (transposed) out.left(k, c) = v[src][k];
      else out.right(k, c) = v[src][k];
    }
  }
  return out;
}

struct LatentVector {
  std::vector<double> coords;
};

struct LsiModel {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t k = 0;
  Matrix term_factors;                 // rows x k
  std::vector<double> singular_values; // k, non-increasing
  Matrix doc_factors;                  // cols x k

  LatentVector doc_vector(std::size_t doc) const {
    auto r = doc_factors.row(doc);
    return {std::vector<double>(r.begin(), r.end())};
  }
};

/// Relative cutoff below which singular values count as numerically zero.
inline constexpr double kSingularValueCutoff = 1e-10;
inline constexpr std::size_t kDefaultLsiRank = 100;

/// Rank-k truncated SVD. Without an explicit rank, k = min(100, rows, cols).
/// The fitted rank is further capped at the numerical rank. Each term-factor
/// column is signed so that its largest-magnitude entry is positive.
inline LsiModel fit_lsi(const TermDocMatrix& matrix, std::optional<std::size_t> rank = {}) {
  const std::size_t max_rank = std::min(matrix.rows, matrix.cols);
  const std::size_t k = rank.value_or(std::min(kDefaultLsiRank, max_rank));
  if (k < 1 || k > max_rank)
    throw UsageError("LSI rank " + std::to_string(k) + " outside [1, " +
                     std::to_string(max_rank) + "]");
  for (const auto& e : matrix.entries)
    if (!std::isfinite(e.weight) || e.weight < 0.0)
      throw DataError("term-document weights must be finite and non-negative");

  const Matrix dense = matrix.to_dense();
  if (std::all_of(dense.data.begin(), dense.data.end(), [](double x) { return x == 0.0; }))
    throw DataError("term-document matrix is all zero");

  const ThinSvd svd = jacobi_svd(dense);
  const double cutoff = kSingularValueCutoff * svd.singular_values.front();
  std::size_t kept = 0;
  while (kept < k && kept < svd.singular_values.size() && svd.singular_values[kept] > cutoff)
    ++kept;

  LsiModel model{matrix.rows, matrix.cols, kept, Matrix(matrix.rows, kept), {}, Matrix(matrix.cols, kept)};
  model.singular_values.assign(svd.singular_values.begin(), svd.singular_values.begin() + kept);
  for (std::size_t c = 0; c < kept; ++c) {
    std::size_t pivot = 0;
    for (std::size_t r = 1; r < matrix.rows; ++r)
      if (std::abs(svd.left(r, c)) > std::abs(svd.left(pivot, c))) pivot = r;
    const double sign = svd.left(pivot, c) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < matrix.rows; ++r) model.term_factors(r, c) = sign * svd.left(r, c);
    for (std::size_t r = 0; r < matrix.cols; ++r) model.doc_factors(r, c) = sign * svd.right(r, c);
  }
  return model;
}

/// Fold-in Sigma^-1 U^T q of a dense term-space vector.
inline LatentVector project(const LsiModel& model, std::span<const double> query) {
  if (query.size() != model.rows)
    throw UsageError("query has " + std::to_string(query.size()) + " terms, model expects " +
                     std::to_string(model.rows));
  LatentVector out{std::vector<double>(model.k, 0.0)};
  for (std::size_t r = 0; r < model.rows; ++r) {
    if (query[r] == 0.0) continue;
    for (std::size_t c = 0; c < model.k; ++c) out.coords[c] += model.term_factors(r, c) * query[r];
  }
  for (std::size_t c = 0; c < model.k; ++c) out.coords[c] /= model.singular_values[c];
  return out;
}

inline LatentVector project(const LsiModel& model, const TfIdfVector& query) {
  LatentVector out{std::vector<double>(model.k, 0.0)};
  for (auto [term, w] : query.entries) {
    if (term >= model.rows)
      throw UsageError("query term id " + std::to_string(term) + " outside model dictionary");
    for (std::size_t c = 0; c < model.k; ++c) out.coords[c] += model.term_factors(term, c) * w;
  }
  for (std::size_t c = 0; c < model.k; ++c) out.coords[c] /= model.singular_values[c];
  return out;
}

/// Cosine similarity; 0 when either side is the zero vector.
inline double latent_similarity(const LatentVector& a, const LatentVector& b) {
  if (a.coords.size() != b.coords.size())
    throw UsageError("latent vectors differ in rank");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    dot += a.coords[i] * b.coords[i];
    na += a.coords[i] * a.coords[i];
    nb += b.coords[i] * b.coords[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// Model file layout (text, one record per line, values as C99 hex floats):
//   rallycast-lsi 1
//   <rows> <cols> <k>
//   <k singular values>
//   <rows lines of k term-factor values>   (row-major U_k)
//   <cols lines of k doc-factor values>    (row-major V_k)

inline std::string hex_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

inline void save_lsi(const LsiModel& model, std::ostream& out) {
  out << "rallycast-lsi 1\n" << model.rows << ' ' << model.cols << ' ' << model.k << '\n';
  auto write_row = [&](std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? " " : "") << hex_double(values[i]);
    out << '\n';
  };
  write_row(model.singular_values);
  for (std::size_t r = 0; r < model.rows; ++r) write_row(model.term_factors.row(r));
  for (std::size_t r = 0; r < model.cols; ++r) write_row(model.doc_factors.row(r));
}

inline LsiModel load_lsi(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "rallycast-lsi" || version != 1)
    throw DataError("not a rallycast LSI model file");
  LsiModel model;
  if (!(in >> model.rows >> model.cols >> model.k) || model.k > std::min(model.rows, model.cols))
    throw DataError("malformed LSI model header");
  auto read = [&]() {
    std::string tok;
    if (!(in >> tok)) throw DataError("truncated LSI model file");
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(x))
      throw DataError("bad number in LSI model file: " + tok);
    return x;
  };
  model.singular_values.resize(model.k);
  for (auto& s : model.singular_values) s = read();
  model.term_factors = Matrix(model.rows, model.k);
  for (auto& x : model.term_factors.data) x = read();
  model.doc_factors = Matrix(model.cols, model.k);
  for (auto& x : model.doc_factors.data) x = read();
  for (std::size_t i = 0; i < model.k; ++i)
    if (!(model.singular_values[i] > 0.0) || (i && model.singular_values[i] > model.singular_values[i - 1]))
      throw DataError("LSI singular values must be positive and non-increasing");
  return model;
}

/// Dictionary plus fitted factors over one corpus.
struct LsiIndex {
  Dictionary dictionary;
  LsiModel model;

  LatentVector doc_vector(std::size_t doc) const { return model.doc_vector(doc); }
};

inline LsiIndex build_lsi_index(const std::vector<Commentary>& corpus,
                                std::optional<std::size_t> rank = {}) {
  LsiIndex index{build_dictionary(corpus), {}};
  index.model = fit_lsi(build_term_doc_matrix(corpus, index.dictionary), rank);
  return index;
}

} // namespace rallycast
