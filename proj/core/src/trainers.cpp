#include "qwem/trainers.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "qwem/error.hpp"
#include "qwem/spectral.hpp"
#include "qwem/text_io.hpp"
#include "qwem/threads.hpp"

namespace qwem {

namespace {

const char* loss_name(LossKind k) { return k == LossKind::kSgns ? "sgns" : "qwem"; }

// log(1 + e^z) without overflow for any finite z.
double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

// d/dz log(1 + e^z) = 1 / (1 + e^{-z}).
double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct BatchTerms {
  double loss = 0.0;
  Eigen::MatrixXd grad;
};

// Shared accumulation loop: `value` maps a pair's score x to its loss term,
// `slope` to d(term)/dx. Contributions are averaged over the batch, and each
// pair's slope feeds both tied rows. Blocks of pairs are processed by
// separate workers into private buffers that are summed in fixed order, so
// the result does not depend on the worker count.
template <typename ValueFn, typename SlopeFn>
BatchTerms accumulate(const Eigen::MatrixXd& W, const PairBatch& batch,
                      const Eigen::VectorXd& psi, ValueFn value, SlopeFn slope) {
  if (batch.i.size() != batch.j.size())
    throw UsageError("pair batch index vectors must have equal length");
  if (static_cast<std::size_t>(psi.size()) != batch.size())
    throw UsageError("need one reweighting entry per sampled pair");

  BatchTerms out;
  out.grad = Eigen::MatrixXd::Zero(W.rows(), W.cols());
  if (batch.size() == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  const std::size_t workers = std::max<std::size_t>(1, thread_count());
  const std::size_t nblocks = std::min(workers, batch.size());
  std::vector<double> block_loss(nblocks, 0.0);
  std::vector<Eigen::MatrixXd> block_grad(
      nblocks, Eigen::MatrixXd::Zero(W.rows(), W.cols()));

  parallel_for_blocks(nblocks, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      const std::size_t lo = batch.size() * b / nblocks;
      const std::size_t hi = batch.size() * (b + 1) / nblocks;
      for (std::size_t n = lo; n < hi; ++n) {
        const auto i = batch.i[n];
        const auto j = batch.j[n];
        if (i >= W.rows() || j >= W.rows())
          throw UsageError("pair index outside the embedding matrix");
        const double x = W.row(i).dot(W.row(j));
        const double w = psi(static_cast<Eigen::Index>(n)) * inv_n;
        block_loss[b] += w * value(x);
        const double coeff = w * slope(x);
        block_grad[b].row(i) += coeff * W.row(j);
        block_grad[b].row(j) += coeff * W.row(i);
      }
    }
  });
  for (std::size_t b = 0; b < nblocks; ++b) {
    out.loss += block_loss[b];
    out.grad += block_grad[b];
  }
  return out;
}

}  // namespace

std::string TrainConfig::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "loss=" << loss_name(loss) << " d=" << d
     << " reweight=" << reweight.describe() << " batch_pos=" << batch_pos
     << " batch_neg=" << batch_neg << " lr=" << lr << " lr_schedule="
     << (lr_schedule == LrSchedule::kConstant ? "constant" : "step")
     << " steps=" << steps << " init="
     << (init == InitKind::kNormal ? "normal" : "w2v_default")
     << " init_sigma2=" << init_sigma2 << " seed=" << seed
     << " probe_pairs=" << probe_pairs;
  return os.str();
}

std::string TrainConfig::checksum() const { return string_checksum(describe()); }

PairSampler::PairSampler(const SkipGramStats& stats, const Reweighting& reweight)
    : stats_(stats), reweight_(reweight) {
  if (stats.cells.empty()) throw DataError("cannot sample pairs from empty statistics");

  // Ordered-pair mass of each symmetric cell: off-diagonal cells carry both
  // orientations.
  std::vector<double> cell_mass(stats.cells.size());
  for (std::size_t c = 0; c < stats.cells.size(); ++c) {
    const PairCell& cell = stats.cells[c];
    cell_mass[c] = static_cast<double>(cell.count) * (cell.i == cell.j ? 1.0 : 2.0);
  }
  pos_cells_ = AliasTable(cell_mass);

  std::vector<double> unigram(stats.V);
  for (std::uint32_t w = 0; w < stats.V; ++w) unigram[w] = stats.unigram_p(w);
  neg_i_ = AliasTable(unigram);

  neg_j_importance_.assign(stats.V, 1.0);
  if (reweight.config().has(ReweightScheme::kNegsample)) {
    std::vector<double> tilted(stats.V);
    double z = 0.0;
    for (std::uint32_t w = 0; w < stats.V; ++w) {
      tilted[w] = reweight.negsample_tilt(w);
      z += tilted[w];
    }
    for (std::uint32_t w = 0; w < stats.V; ++w) {
      // P_j / q_j with q_j = tilted_j / z; folded into psi_neg.
      neg_j_importance_[w] = tilted[w] > 0.0 ? unigram[w] * z / tilted[w] : 0.0;
    }
    neg_j_ = AliasTable(tilted);
  } else {
    neg_j_ = AliasTable(unigram);
  }
}

SampledPairs PairSampler::sample(std::int64_t n_pos, std::int64_t n_neg,
                                 Rng& rng) const {
  if (n_pos < 0 || n_neg < 0) throw UsageError("pair counts must be non-negative");
  SampledPairs out;
  out.pos.i.reserve(static_cast<std::size_t>(n_pos));
  out.pos.j.reserve(static_cast<std::size_t>(n_pos));
  out.psi_pos.resize(n_pos);
  for (std::int64_t n = 0; n < n_pos; ++n) {
    const PairCell& cell = stats_.cells[pos_cells_.sample(rng)];
    std::uint32_t a = cell.i, b = cell.j;
    if (a != b && rng.uniform01() < 0.5) std::swap(a, b);
    out.pos.i.push_back(a);
    out.pos.j.push_back(b);
    const double p_ij =
        static_cast<double>(cell.count) / static_cast<double>(stats_.pair_total);
    out.psi_pos(n) = reweight_.psi_pos(a, b, p_ij, stats_.mean_sep(cell));
  }

  out.neg.i.reserve(static_cast<std::size_t>(n_neg));
  out.neg.j.reserve(static_cast<std::size_t>(n_neg));
  out.psi_neg.resize(n_neg);
  for (std::int64_t n = 0; n < n_neg; ++n) {
    const auto i = static_cast<std::uint32_t>(neg_i_.sample(rng));
    const auto j = static_cast<std::uint32_t>(neg_j_.sample(rng));
    out.neg.i.push_back(i);
    out.neg.j.push_back(j);
    out.psi_neg(n) =
        reweight_.psi_neg(i, j, stats_.joint_p(i, j)) * neg_j_importance_[j];
  }
  return out;
}

SampledPairs sample_pairs(const SkipGramStats& stats, const Reweighting& reweight,
                          std::int64_t n_pos, std::int64_t n_neg, Rng& rng) {
  return PairSampler(stats, reweight).sample(n_pos, n_neg, rng);
}

std::pair<double, Eigen::MatrixXd> loss_and_grad_sgns(
    const Eigen::MatrixXd& W, const PairBatch& pos, const PairBatch& neg,
    const Eigen::VectorXd& psi_pos, const Eigen::VectorXd& psi_neg) {
  BatchTerms p = accumulate(
      W, pos, psi_pos, [](double x) { return softplus(-x); },
      [](double x) { return -logistic(-x); });
  BatchTerms n = accumulate(
      W, neg, psi_neg, [](double x) { return softplus(x); },
      [](double x) { return logistic(x); });
  return {p.loss + n.loss, p.grad + n.grad};
}

std::pair<double, Eigen::MatrixXd> loss_and_grad_qwem(
    const Eigen::MatrixXd& W, const PairBatch& pos, const PairBatch& neg,
    const Eigen::VectorXd& psi_pos, const Eigen::VectorXd& psi_neg) {
  BatchTerms p = accumulate(
      W, pos, psi_pos, [](double x) { return 0.25 * x * x - x; },
      [](double x) { return 0.5 * x - 1.0; });
  BatchTerms n = accumulate(
      W, neg, psi_neg, [](double x) { return 0.25 * x * x + x; },
      [](double x) { return 0.5 * x + 1.0; });
  return {p.loss + n.loss, p.grad + n.grad};
}

TrainResult train(const SkipGramStats& stats, const TrainConfig& config,
                  const std::vector<std::int64_t>& probe_steps,
                  const TargetMatrix* target) {
  if (config.d < 1) throw UsageError("embedding dimension must be >= 1");
  if (config.batch_pos < 1 || config.batch_neg < 1)
    throw UsageError("batch pair counts must be >= 1");
  if (config.lr < 0.0) throw UsageError("learning rate must be non-negative");
  if (config.steps < 0) throw UsageError("step count must be non-negative");
  if (config.init == InitKind::kNormal && !(config.init_sigma2 > 0.0))
    throw UsageError("initialization variance must be positive");
  if (config.probe_pairs < 1) throw UsageError("probe sample must be non-empty");
  for (std::size_t n = 0; n + 1 < probe_steps.size(); ++n)
    if (probe_steps[n + 1] <= probe_steps[n])
      throw UsageError("probe steps must be strictly increasing");
  if (!probe_steps.empty() &&
      (probe_steps.front() < 0 || probe_steps.back() > config.steps))
    throw UsageError("probe steps must lie in [0, steps]");

  const int V = static_cast<int>(stats.V);
  Rng rng(config.seed);

  Eigen::MatrixXd W(V, config.d);
  if (config.init == InitKind::kNormal) {
    const double sigma = std::sqrt(config.init_sigma2);
    for (int i = 0; i < V; ++i)
      for (int k = 0; k < config.d; ++k) W(i, k) = sigma * rng.normal();
  } else {
    const double half = 0.5 / static_cast<double>(config.d);
    for (int i = 0; i < V; ++i)
      for (int k = 0; k < config.d; ++k)
        W(i, k) = (2.0 * rng.uniform01() - 1.0) * half;
  }

  const Reweighting reweight(config.reweight, stats);
  const PairSampler sampler(stats, reweight);

  // Fixed held-out sample for loss probes, drawn once up front.
  const SampledPairs probe_sample =
      sampler.sample(config.probe_pairs, config.probe_pairs, rng);

  // Eigenvectors of the target, for alignment probes.
  Eigen::MatrixXd vstar;
  if (target != nullptr) {
    const int want = V <= 1024 ? kEighAll : config.d;
    vstar = eigh(target->M, want).vectors;
  }

  const auto loss_and_grad = config.loss == LossKind::kSgns ? loss_and_grad_sgns
                                                            : loss_and_grad_qwem;
  const double g_scalar =
      reweight.g_kind() == GKind::kConstant ? reweight.g_constant() : 1.0;
  const std::int64_t step_drop = (config.steps * 3 + 3) / 4;  // ceil(0.75*steps)

  TrainResult result;
  result.trace.seed = config.seed;
  result.trace.sigma2 = config.init == InitKind::kNormal ? config.init_sigma2
                                                         : 1.0 / (12.0 * config.d * config.d);
  const int n_probes = static_cast<int>(probe_steps.size());
  result.trace.mode_variance.resize(n_probes, config.d);
  result.trace.alignment =
      target != nullptr ? Eigen::MatrixXd::Zero(n_probes, config.d)
                        : Eigen::MatrixXd::Constant(n_probes, config.d, 0.0);

  std::size_t next_probe = 0;
  double flow_time = 0.0;
  const auto record_probe = [&](std::int64_t step) {
    if (next_probe >= probe_steps.size() || probe_steps[next_probe] != step) return;
    // Probe loss: mean and standard error over the fixed held-out sample.
    // Recomputed per pair (rather than via loss_and_grad) to get the spread.
    double mean = 0.0, m2 = 0.0;
    std::int64_t n_terms = 0;
    const auto fold = [&](double term) {
      ++n_terms;
      const double delta = term - mean;
      mean += delta / static_cast<double>(n_terms);
      m2 += delta * (term - mean);
    };
    for (std::size_t n = 0; n < probe_sample.pos.size(); ++n) {
      const double x =
          W.row(probe_sample.pos.i[n]).dot(W.row(probe_sample.pos.j[n]));
      const double term = config.loss == LossKind::kSgns ? softplus(-x)
                                                         : 0.25 * x * x - x;
      fold(probe_sample.psi_pos(static_cast<Eigen::Index>(n)) * term);
    }
    for (std::size_t n = 0; n < probe_sample.neg.size(); ++n) {
      const double x =
          W.row(probe_sample.neg.i[n]).dot(W.row(probe_sample.neg.j[n]));
      const double term = config.loss == LossKind::kSgns ? softplus(x)
                                                         : 0.25 * x * x + x;
      fold(probe_sample.psi_neg(static_cast<Eigen::Index>(n)) * term);
    }
    // Loss is (mean pos term) + (mean neg term) = 2 * overall mean here
    // because both halves of the fixed sample have the same size.
    result.trace.times.push_back(flow_time);
    result.trace.loss.push_back(2.0 * mean);
    const double var_of_mean =
        n_terms > 1 ? m2 / static_cast<double>(n_terms - 1) / static_cast<double>(n_terms)
                    : 0.0;
    result.loss_stderr.push_back(2.0 * std::sqrt(var_of_mean));

    Eigen::BDCSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeThinU);
    const int row = static_cast<int>(next_probe);
    for (int k = 0; k < config.d; ++k) {
      const double s = svd.singularValues()(k);
      result.trace.mode_variance(row, k) = s * s;
      if (target != nullptr) {
        const int cols = std::min(k + 1, static_cast<int>(vstar.cols()));
        result.trace.alignment(row, k) =
            (vstar.leftCols(cols).transpose() * svd.matrixU().col(k)).squaredNorm();
      }
    }
    ++next_probe;
  };

  record_probe(0);
  for (std::int64_t step = 0; step < config.steps; ++step) {
    const double lr = config.lr_schedule == LrSchedule::kStep && step >= step_drop
                          ? 0.1 * config.lr
                          : config.lr;
    const SampledPairs batch =
        sampler.sample(config.batch_pos, config.batch_neg, rng);
    const auto [loss, grad] =
        loss_and_grad(W, batch.pos, batch.neg, batch.psi_pos, batch.psi_neg);
    (void)loss;
    W.noalias() -= lr * grad;
    if (!W.allFinite())
      throw DataError("training diverged: non-finite embedding after step " +
                      std::to_string(step + 1));
    flow_time += 2.0 * g_scalar * lr;
    record_probe(step + 1);
  }

  result.embedding.W = std::move(W);
  result.embedding.provenance =
      std::string(loss_name(config.loss)) + "_sgd config=" + config.checksum();
  return result;
}

}  // namespace qwem
