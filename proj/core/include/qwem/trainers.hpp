#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qwem/corpus.hpp"
#include "qwem/dynamics.hpp"
#include "qwem/reweight.hpp"
#include "qwem/rng.hpp"
#include "qwem/target.hpp"

namespace qwem {

enum class LossKind { kSgns, kQwem };
enum class LrSchedule {
  kConstant,
  kStep,  // learning rate drops by 10x for the last quarter of training
};
enum class InitKind {
  kNormal,      // i.i.d. N(0, sigma2) entries
  kW2vDefault,  // i.i.d. uniform on [-0.5/d, 0.5/d], the historical scheme
};

struct TrainConfig {
  int d = 200;
  LossKind loss = LossKind::kQwem;
  ReweightConfig reweight = ReweightConfig::single(ReweightScheme::kSetting1);
  std::int64_t batch_pos = 50000;  // positive pairs per step
  std::int64_t batch_neg = 50000;  // negative pairs per step
  double lr = 0.5;                 // 0 is allowed and leaves W unchanged
  LrSchedule lr_schedule = LrSchedule::kConstant;
  std::int64_t steps = 1000;
  InitKind init = InitKind::kNormal;
  double init_sigma2 = 1e-6;
  std::uint64_t seed = 1;
  std::int64_t probe_pairs = 1000000;  // fixed sample size for loss probes

  std::string describe() const;   // canonical, feeds the config checksum
  std::string checksum() const;
};

struct EmbeddingMatrix {
  Eigen::MatrixXd W;        // V x d, row i is word i's embedding
  std::string provenance;   // e.g. "qwem_sgd config=fnv1a64:..."
};

struct PairBatch {
  std::vector<std::uint32_t> i, j;
  std::size_t size() const { return i.size(); }
};

struct SampledPairs {
  PairBatch pos, neg;
  Eigen::VectorXd psi_pos;  // per-pair reweighting for the positive term
  Eigen::VectorXd psi_neg;  // per-pair reweighting, importance-corrected when
                            // part of the weight is folded into the sampler
};

// Alias-table sampler over the pair and unigram distributions. Positives are
// ordered draws from P(.,.); negatives draw i from the unigram distribution
// and j from the unigram distribution tilted by the negative-sampling
// exponent when that scheme is active, with the tilt compensated inside
// psi_neg so the weighted expectation is unchanged.
class PairSampler {
 public:
  PairSampler(const SkipGramStats& stats, const Reweighting& reweight);
  SampledPairs sample(std::int64_t n_pos, std::int64_t n_neg, Rng& rng) const;

 private:
  const SkipGramStats& stats_;
  const Reweighting& reweight_;
  AliasTable pos_cells_;
  AliasTable neg_i_;
  AliasTable neg_j_;
  std::vector<double> neg_j_importance_;  // P_j / q_j per word
};

// One-shot convenience wrapper around PairSampler.
SampledPairs sample_pairs(const SkipGramStats& stats, const Reweighting& reweight,
                          std::int64_t n_pos, std::int64_t n_neg, Rng& rng);

// Minibatch loss and tied-weight gradient. The estimate is the mean of
// psi+ * log(1 + e^{-w_i.w_j}) over positives plus the mean of
// psi- * log(1 + e^{w_i.w_j}) over negatives; every pair contributes to the
// gradient of both of its rows.
std::pair<double, Eigen::MatrixXd> loss_and_grad_sgns(
    const Eigen::MatrixXd& W, const PairBatch& pos, const PairBatch& neg,
    const Eigen::VectorXd& psi_pos, const Eigen::VectorXd& psi_neg);

// Quartic counterpart: psi+ * ((w_i.w_j)^2/4 - w_i.w_j) over positives and
// psi- * ((w_i.w_j)^2/4 + w_i.w_j) over negatives.
std::pair<double, Eigen::MatrixXd> loss_and_grad_qwem(
    const Eigen::MatrixXd& W, const PairBatch& pos, const PairBatch& neg,
    const Eigen::VectorXd& psi_pos, const Eigen::VectorXd& psi_neg);

struct TrainResult {
  EmbeddingMatrix embedding;
  DynamicsTrace trace;              // probe-time records
  std::vector<double> loss_stderr;  // per probe, standard error of the probe mean
};

// Plain minibatch SGD. At each step in `probe_steps` (0 = before the first
// update, config.steps = after the last) it records the loss on a fixed
// held-out pair sample, the top-d singular values of W, and, when `target`
// is given, alignment overlaps with the target's leading eigenvectors.
// Trace times are reported in flow-time units: each step advances time by
// 2 * g * lr, with g the constant aggregate weight when the reweighting has
// one and 1 otherwise. Deterministic given seed and thread count.
TrainResult train(const SkipGramStats& stats, const TrainConfig& config,
                  const std::vector<std::int64_t>& probe_steps,
                  const TargetMatrix* target = nullptr);

}  // namespace qwem
