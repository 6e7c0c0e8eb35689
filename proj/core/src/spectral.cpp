#include "qwem/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "qwem/error.hpp"
#include "qwem/rng.hpp"

namespace qwem {

namespace {

constexpr Eigen::Index kDenseSolverLimit = 4096;

void check_symmetric(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw UsageError("eigh: matrix is not square");
  const double scale = M.cwiseAbs().maxCoeff();
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(scale, 1e-300))
    throw DataError("eigh: input is not symmetric (max asymmetry " +
                    std::to_string(asym) + ")");
}

// Largest-magnitude entry positive; ties broken by lowest index.
void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double a = std::abs(vectors(r, c));
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (vectors(best, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

SpectralDecomposition dense_eigh(const Eigen::MatrixXd& M, int top_k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
  if (solver.info() != Eigen::Success)
    throw DataError("eigh: dense eigensolver failed to converge");
  const Eigen::Index n = M.rows();
  const Eigen::Index k = top_k == kEighAll ? n : std::min<Eigen::Index>(top_k, n);

  SpectralDecomposition out;
  out.source_dim = n;
  out.values.resize(k);
  out.vectors.resize(n, k);
  // Eigen returns ascending order; take the tail reversed.
  for (Eigen::Index c = 0; c < k; ++c) {
    out.values(c) = solver.eigenvalues()(n - 1 - c);
    out.vectors.col(c) = solver.eigenvectors().col(n - 1 - c);
  }
  fix_signs(out.vectors);
  return out;
}

// Blocked subspace iteration with Rayleigh-Ritz refinement on a shifted
// matrix (M + cI with c = ||M||_1 guarantees positive definiteness, so the
// top-k eigenvalues of the shift are the algebraically largest of M).
SpectralDecomposition iterative_eigh(const Eigen::MatrixXd& M, int top_k) {
  const Eigen::Index n = M.rows();
  const Eigen::Index k = std::min<Eigen::Index>(top_k, n);
  const Eigen::Index block = std::min<Eigen::Index>(n, k + std::max<Eigen::Index>(8, k / 4));

  const double shift = M.cwiseAbs().rowwise().sum().maxCoeff();

  Rng rng(0x5eedu + static_cast<std::uint64_t>(n) * 1315423911u);
  Eigen::MatrixXd X(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = rng.normal();

  const double tol = 1e-10;
  Eigen::VectorXd ritz_prev = Eigen::VectorXd::Zero(block);
  Eigen::MatrixXd Q;
  Eigen::VectorXd ritz;
  Eigen::MatrixXd vectors;
  for (int iter = 0; iter < 500; ++iter) {
    // Power step on M + shift*I keeps all target eigenvalues positive.
    Eigen::MatrixXd Y = M * X + shift * X;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
    // Rayleigh-Ritz on the original matrix.
    Eigen::MatrixXd T = Q.transpose() * (M * Q);
    T = 0.5 * (T + T.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(T);
    if (small.info() != Eigen::Success)
      throw DataError("eigh: Rayleigh-Ritz projection failed");
    ritz.resize(block);
    vectors.resize(n, block);
    for (Eigen::Index c = 0; c < block; ++c) {
      ritz(c) = small.eigenvalues()(block - 1 - c);
      vectors.col(c) = Q * small.eigenvectors().col(block - 1 - c);
    }
    const double scale = std::max(std::abs(ritz(0)), 1e-300);
    if ((ritz.head(k) - ritz_prev.head(k)).cwiseAbs().maxCoeff() <= tol * scale &&
        iter > 2) {
      break;
    }
    ritz_prev = ritz;
    X = vectors;
  }

  SpectralDecomposition out;
  out.source_dim = n;
  out.values = ritz.head(k);
  out.vectors = vectors.leftCols(k);
  fix_signs(out.vectors);
  return out;
}

}  // namespace

SpectralDecomposition eigh(const Eigen::MatrixXd& M, int top_k) {
  check_symmetric(M);
  if (top_k != kEighAll && top_k <= 0) throw UsageError("eigh: top_k must be positive");
  Eigen::MatrixXd sym = 0.5 * (M + M.transpose());  // scrub roundoff asymmetry
  if (top_k == kEighAll || M.rows() <= kDenseSolverLimit || top_k >= M.rows() / 4)
    return dense_eigh(sym, top_k);
  return iterative_eigh(sym, top_k);
}

Eigen::MatrixXd factorize_target(const Eigen::MatrixXd& M, int d) {
  if (d < 1 || d > M.rows())
    throw UsageError("factorize_target: d must be in [1, V]");
  SpectralDecomposition spec = eigh(M, d);
  if (spec.values(d - 1) < 0.0) {
    // Count the non-negative part of the spectrum so the caller can choose a
    // feasible rank; needs the full spectrum.
    SpectralDecomposition full = eigh(M, kEighAll);
    Eigen::Index nonneg = 0;
    for (Eigen::Index i = 0; i < full.values.size(); ++i)
      if (full.values(i) >= 0.0) ++nonneg;
    throw DataError("factorize_target: eigenvalue " + std::to_string(d) +
                    " is negative; the target has " + std::to_string(nonneg) +
                    " non-negative eigenvalues, so d must not exceed that");
  }
  return spec.vectors.leftCols(d) *
         spec.values.head(d).cwiseSqrt().asDiagonal();
}

double requiv_distance(const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W2) {
  if (W1.rows() != W2.rows() || W1.cols() != W2.cols())
    throw UsageError("requiv_distance: shape mismatch");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W1.transpose() * W2,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd U = svd.matrixU() * svd.matrixV().transpose();
  return (W1 * U - W2).norm();
}

Eigen::MatrixXd subspace_overlap(const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W2,
                                 int k) {
  if (k < 1 || k > W1.cols() || k > W2.cols())
    throw UsageError("subspace_overlap: k exceeds embedding dimension");
  if (W1.rows() != W2.rows())
    throw UsageError("subspace_overlap: row-space dimensions differ");
  Eigen::BDCSVD<Eigen::MatrixXd> s1(W1, Eigen::ComputeThinU);
  Eigen::BDCSVD<Eigen::MatrixXd> s2(W2, Eigen::ComputeThinU);
  const double tol1 = 1e-12 * s1.singularValues()(0);
  const double tol2 = 1e-12 * s2.singularValues()(0);
  if (s1.singularValues()(k - 1) <= tol1 || s2.singularValues()(k - 1) <= tol2)
    throw DataError("subspace_overlap: rank below requested k = " + std::to_string(k));
  const Eigen::MatrixXd overlap =
      s1.matrixU().leftCols(k).transpose() * s2.matrixU().leftCols(k);
  return overlap.array().square();
}

int count_near_degenerate_gaps(const SpectralDecomposition& spec) {
  const Eigen::Index n = spec.values.size();
  if (n < 2) return 0;
  const double scale = std::max(std::abs(spec.values(0)), 1e-300);
  int hits = 0;
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    if (std::abs(spec.values(i) - spec.values(i + 1)) < 1e-10 * scale) ++hits;
  return hits;
}

}  // namespace qwem
