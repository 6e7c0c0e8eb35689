#include "qwem/target.hpp"

#include <cmath>
#include <sstream>

#include "qwem/error.hpp"
#include "qwem/spectral.hpp"
#include "qwem/threads.hpp"

namespace qwem {

namespace {

std::string stats_fingerprint(const SkipGramStats& stats) {
  std::ostringstream ss;
  ss << "sgs{V=" << stats.V << ",L=" << stats.L << ",pairs=" << stats.cells.size()
     << ",pair_total=" << stats.pair_total << "}";
  return ss.str();
}

}  // namespace

TargetMatrix build_mstar(const SkipGramStats& stats, const ReweightConfig& config) {
  if (!config.symmetric())
    throw UsageError(
        "build_mstar: asymmetric reweighting (negsample) has no symmetric target; "
        "use the weighted path or a symmetric scheme");
  const Reweighting rw(config, stats);
  const std::uint32_t V = stats.V;

  TargetMatrix out;
  out.M.resize(V, V);
  out.g_kind = rw.g_kind();
  if (rw.g_kind() == GKind::kConstant) out.g = rw.g_constant();
  if (rw.g_kind() == GKind::kRankOne)
    out.g_vec = Eigen::Map<const Eigen::VectorXd>(rw.g_vector().data(), V);
  out.provenance = config.describe() + " " + stats_fingerprint(stats);

  // Baseline pass: value taken by pairs that never co-occurred (P_ij = 0).
  // The formula then reads (0 - b)/(b/2) = -2 whenever b = psi- P_i P_j > 0;
  // a fully degenerate entry (b = 0 too) is stored as 0.
  parallel_for_blocks(V, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t i = r0; i < r1; ++i) {
      for (std::size_t j = 0; j < V; ++j) {
        const double pipj = stats.unigram_p(static_cast<std::uint32_t>(i)) *
                            stats.unigram_p(static_cast<std::uint32_t>(j));
        const double b = rw.psi_neg(static_cast<std::uint32_t>(i),
                                    static_cast<std::uint32_t>(j), 0.0) *
                         pipj;
        out.M(i, j) = b > 0.0 ? -2.0 : 0.0;
      }
    }
  });

  // Counted pairs overwrite the baseline.
  for (const auto& c : stats.cells) {
    const double p_ij = static_cast<double>(c.count) / static_cast<double>(stats.pair_total);
    const double d_ij = stats.mean_sep(c);
    const double a = rw.psi_pos(c.i, c.j, p_ij, d_ij) * p_ij;
    const double b = rw.psi_neg(c.i, c.j, p_ij) * stats.unigram_p(c.i) * stats.unigram_p(c.j);
    const double denom = 0.5 * (a + b);
    const double value = denom > 0.0 ? (a - b) / denom : 0.0;
    out.M(c.i, c.j) = value;
    out.M(c.j, c.i) = value;
  }
  return out;
}

TargetMatrix build_pmi(const SkipGramStats& stats, const ReweightConfig& config,
                       bool positive_clip, double floor) {
  const Reweighting rw(config, stats);
  const std::uint32_t V = stats.V;

  TargetMatrix out;
  out.M.setConstant(V, V, floor);
  out.provenance = std::string(positive_clip ? "ppmi " : "pmi ") + config.describe() +
                   " " + stats_fingerprint(stats);

  // Every entry starts at the floor; counted pairs with a finite above-floor
  // log overwrite it. floored_entries = entries left at (or clipped to) the
  // floor, i.e. the -inf pathology the floor is papering over.
  long long kept = 0;
  auto place = [&](std::uint32_t i, std::uint32_t j, double a, double b) {
    if (a > 0.0 && b > 0.0) {
      const double v = std::log(a / b);
      if (v > floor) {
        out.M(i, j) = v;
        ++kept;
      }
    }
  };
  for (const auto& c : stats.cells) {
    const double p_ij = static_cast<double>(c.count) / static_cast<double>(stats.pair_total);
    const double d_ij = stats.mean_sep(c);
    const double a = rw.psi_pos(c.i, c.j, p_ij, d_ij) * p_ij;
    const double pipj = stats.unigram_p(c.i) * stats.unigram_p(c.j);
    place(c.i, c.j, a, rw.psi_neg(c.i, c.j, p_ij) * pipj);
    if (c.i != c.j) place(c.j, c.i, a, rw.psi_neg(c.j, c.i, p_ij) * pipj);
  }
  out.floored_entries = static_cast<int>(
      static_cast<long long>(V) * static_cast<long long>(V) - kept);
  if (positive_clip) out.M = out.M.cwiseMax(0.0);
  return out;
}

double pmi_series_residual(double x) {
  if (!(std::abs(x) < 2.0))
    throw UsageError("pmi_series_residual: |x| must be < 2 (log divergence)");
  const double lhs = std::log1p(2.0 * x / (2.0 - x));
  const double series = x + x * x * x / 12.0 + x * x * x * x * x / 80.0;
  return lhs - series;
}

Eigen::MatrixXd weighted_minimizer(const TargetMatrix& target, int d) {
  const Eigen::Index V = target.M.rows();
  Eigen::VectorXd gvec;
  if (target.g_kind == GKind::kRankOne) {
    gvec = target.g_vec;
  } else if (target.g_kind == GKind::kConstant) {
    // Constant G_ij = g is the rank-1 case with g_vec = sqrt(g) * ones.
    gvec = Eigen::VectorXd::Constant(V, std::sqrt(target.g));
  } else {
    throw UsageError(
        "weighted_minimizer: aggregate weight G is not rank-1; the general "
        "weighted factorization is not solvable in closed form");
  }
  for (Eigen::Index i = 0; i < V; ++i) {
    if (!(gvec(i) > 0.0))
      throw DataError("weighted_minimizer: non-positive weight for word id " +
                      std::to_string(i));
  }
  const Eigen::VectorXd gamma = gvec.cwiseSqrt();
  const Eigen::MatrixXd scaled = gamma.asDiagonal() * target.M * gamma.asDiagonal();
  SpectralDecomposition spec = eigh(scaled, d);
  for (int k = 0; k < d; ++k) {
    if (spec.values(k) < 0.0)
      throw DataError("weighted_minimizer: eigenvalue " + std::to_string(k + 1) +
                      " of the weighted target is negative (" +
                      std::to_string(spec.values(k)) + ")");
  }
  const Eigen::VectorXd sqrt_lambda = spec.values.head(d).cwiseSqrt();
  return gamma.cwiseInverse().asDiagonal() *
         (spec.vectors.leftCols(d) * sqrt_lambda.asDiagonal());
}

}  // namespace qwem
