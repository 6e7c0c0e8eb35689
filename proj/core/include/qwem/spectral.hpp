#pragma once

#include <Eigen/Dense>

namespace qwem {

struct SpectralDecomposition {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // orthonormal columns, one per eigenvalue
  Eigen::Index source_dim = 0;   // V
};

inline constexpr int kEighAll = -1;

// Top-k eigenpairs of a symmetric matrix, descending, with a deterministic
// sign convention (each vector's largest-magnitude entry positive; ties go to
// the lowest index). Full tridiagonalization-based decomposition for
// V <= 4096 or top_k = ALL; seeded blocked subspace iteration with
// Rayleigh-Ritz refinement when top_k << V beyond that. Asymmetric input
// (beyond 1e-10 * max|M|) is an error.
SpectralDecomposition eigh(const Eigen::MatrixXd& M, int top_k = kEighAll);

// W = V*_{[:,:d]} Lambda^{1/2}: the canonical member of the minimizing
// equivalence class, with identity right-orthogonal factor. Requires the
// top-d eigenvalues to be non-negative; the error reports how many
// eigenvalues are non-negative so callers can pick a feasible d.
Eigen::MatrixXd factorize_target(const Eigen::MatrixXd& M, int d);

// min over orthogonal U of ||W1 U - W2||_F via orthogonal Procrustes
// (SVD of W1^T W2).
double requiv_distance(const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W2);

// (U1^T U2) squared elementwise, where U1, U2 are the top-k left singular
// vectors of each input: squared overlaps of the k leading latent directions.
Eigen::MatrixXd subspace_overlap(const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W2,
                                 int k);

// Smallest relative spectral gap among the computed eigenvalues; the theory
// assumes distinct values, so near-degeneracies (< 1e-10 * lambda_1) are
// worth reporting. Returns the count of such gaps.
int count_near_degenerate_gaps(const SpectralDecomposition& spec);

}  // namespace qwem
