#pragma once

#include <Eigen/Dense>
#include <string>

#include "qwem/corpus.hpp"
#include "qwem/reweight.hpp"

namespace qwem {

struct TargetMatrix {
  Eigen::MatrixXd M;         // dense symmetric V x V
  GKind g_kind = GKind::kGeneral;
  double g = 0.0;            // aggregate weight when G_ij is constant
  Eigen::VectorXd g_vec;     // per-word weight vector when G is rank-1
  std::string provenance;    // reweight description + stats fingerprint
  int floored_entries = 0;   // PMI targets: count of -inf entries floored
};

// M*_ij = (psi+ P_ij - psi- P_i P_j) / ((psi+ P_ij + psi- P_i P_j) / 2).
// Zero-denominator entries (P_ij = 0 together with P_i P_j = 0) are stored
// as 0; under SETTING1 a zero-count pair with positive marginals lands at
// exactly -2, the attainable lower bound. Asymmetric configs are rejected.
TargetMatrix build_mstar(const SkipGramStats& stats, const ReweightConfig& config);

// PMI_ij = log(psi+ P_ij / (psi- P_i P_j)), with zero-count pairs floored at
// `floor` (default -20) and the floored count recorded. positive_clip applies
// max(0, .) entrywise (PPMI).
TargetMatrix build_pmi(const SkipGramStats& stats, const ReweightConfig& config,
                       bool positive_clip, double floor = -20.0);

// log(1 + 2x/(2-x)) - (x + x^3/12 + x^5/80); the remainder of the series
// relating the relative-deviation target to PMI (seventh order in x).
double pmi_series_residual(double x);

// Rank-1-weighted factorization (G = g g^T): returns
// Gamma^{-1} V*_{Gamma,[:,:d]} Lambda^{1/2} with Gamma = diag(g)^{1/2}.
Eigen::MatrixXd weighted_minimizer(const TargetMatrix& target, int d);

}  // namespace qwem
