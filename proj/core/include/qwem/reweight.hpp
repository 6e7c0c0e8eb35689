#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qwem/corpus.hpp"

namespace qwem {

enum class ReweightScheme {
  kUnit,           // psi+ = psi- = 1
  kSetting1,       // psi+ = psi- = 1/(P_ij + P_i P_j), so G_ij = 1
  kDynamicWindow,  // psi+_ij = (L - d_ij) / sum (L - d) P, psi- = 1
  kSubsample,      // psi+ = psi- = P_acc(i) P_acc(j)
  kNegsample,      // psi-_ij = k P_j^{-1/4} / (V^{-1} sum P^{-1/4}), psi+ = 1
};

struct ReweightConfig {
  std::vector<ReweightScheme> schemes;  // >1 entry = composite (factors multiply)
  double negsample_k = 5.0;             // negative-sample rate
  double negsample_exponent = 0.75;     // negative-distribution power

  static ReweightConfig single(ReweightScheme s) { return {{s}, 5.0, 0.75}; }
  bool has(ReweightScheme s) const;
  bool symmetric() const;  // NEGSAMPLE breaks psi-_ij = psi-_ji
  std::string describe() const;
};

ReweightConfig parse_reweight(const std::string& text);  // e.g. "setting1+subsample"

// How the aggregate weight G_ij = psi+ P_ij + psi- P_i P_j behaves, which
// determines whether the unweighted (constant g) or rank-1 factorization
// path applies.
enum class GKind { kConstant, kRankOne, kGeneral };

// Entrywise evaluators for psi+/psi-. All per-word tables are precomputed at
// construction; per-pair quantities (P_ij, d_ij) are supplied by the caller.
class Reweighting {
 public:
  Reweighting(const ReweightConfig& config, const SkipGramStats& stats);

  // d_ij is required only by the dynamic-window factor; pass any value (it is
  // ignored) for pairs under other schemes. For uncounted pairs (P_ij = 0)
  // the dynamic-window factor is defined as 0 (it only ever multiplies P_ij).
  double psi_pos(std::uint32_t i, std::uint32_t j, double p_ij, double d_ij) const;
  double psi_neg(std::uint32_t i, std::uint32_t j, double p_ij) const;

  GKind g_kind() const { return g_kind_; }
  double g_constant() const { return g_constant_; }        // valid when kConstant
  const std::vector<double>& g_vector() const { return g_vec_; }  // valid when kRankOne
  const ReweightConfig& config() const { return config_; }
  double subsample_accept(std::uint32_t i) const { return p_acc_[i]; }
  // Negative j-marginal tilt P_j^exponent (unnormalized), used when folding
  // NEGSAMPLE into the sampling distribution.
  double negsample_tilt(std::uint32_t j) const;

 private:
  ReweightConfig config_;
  std::vector<double> p_word_;
  std::vector<double> p_acc_;        // subsample acceptance per word
  std::vector<double> neg_weight_;   // P_j^{-1/4} style factor per word
  double neg_norm_ = 1.0;            // V^{-1} sum_j P_j^{exponent-1}
  double dyn_norm_ = 1.0;            // sum (L - d_ij) P_ij over ordered pairs
  int L_ = 0;
  GKind g_kind_ = GKind::kGeneral;
  double g_constant_ = 0.0;
  std::vector<double> g_vec_;
};

}  // namespace qwem
