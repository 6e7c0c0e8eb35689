#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qwem/corpus.hpp"
#include "qwem/eval.hpp"

namespace qwem {

struct TaskVectorSet {
  std::string category;
  Eigen::MatrixXd R;         // N x d', row n = w_a(n) - w_b(n)
  Eigen::MatrixXd gram;      // R R^T
  Eigen::VectorXd spectrum;  // eigenvalues of gram, descending
};

// Difference vectors between word pairs, with columns truncated to the
// leading truncate_to coordinates. Truncation is only meaningful when the
// columns are ordered by decreasing target eigenvalue (spectral provenance);
// rows are not normalized.
TaskVectorSet build_task_vectors(const Eigen::MatrixXd& W,
                                 const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
                                 int truncate_to, std::string category = "");

// Same, with vocabulary lookup; an out-of-vocabulary word is an error naming
// the word.
TaskVectorSet build_task_vectors(const Eigen::MatrixXd& W, const Vocabulary& vocab,
                                 const std::vector<std::pair<std::string, std::string>>& pairs,
                                 int truncate_to, std::string category = "");

// The distinct (a, b) and (a2, b2) pairs of one analogy category, in first
// appearance order; these are the rows task vectors are built from.
std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_from_category(
    const AnalogyCategory& category);

struct MPFit {
  double sigma2 = 0.0;        // population variance of mean-centered entries
  int d_eff = 0;              // fitted effective dimension
  double gamma = 0.0;         // N / d_eff
  double lambda_minus = 0.0;  // sigma2 (1 - sqrt(gamma))^2
  double lambda_plus = 0.0;   // sigma2 (1 + sqrt(gamma))^2
  double ks = 0.0;            // Kolmogorov-Smirnov distance of the best fit
  bool top_excluded = false;  // top eigenvalue treated as a spike
};

// CDF of the Marchenko-Pastur law with scale sigma2 and ratio gamma <= 1,
// evaluated by quadrature (exposed for testing the fit).
double mp_cdf(double lambda, double sigma2, double gamma);

// Density of the same law; zero outside the support.
double mp_pdf(double lambda, double sigma2, double gamma);

// Fits the bulk of the centered Gram spectrum to the Marchenko-Pastur law by
// grid search over the effective dimension d_eff in {N, ..., d'}; the top
// eigenvalue is excluded from the bulk whenever it exceeds the candidate
// upper edge. Ties prefer the smallest d_eff.
MPFit mp_fit(const TaskVectorSet& tv);

// lambda_max(G) * rank(G) / Tr(G); rank counts eigenvalues above
// rank_tol * lambda_max.
double spike_snr(const TaskVectorSet& tv, double rank_tol = 1e-8);

// (1^T G 1) / (N * lambda_max(G)): the share of the leading eigenvalue
// captured by the uniform direction, in [0, 1].
double signal_in_mean(const TaskVectorSet& tv);

struct SnrSweepRow {
  std::string category;
  int d_trunc = 0;
  double snr = 0.0;
  double signal_in_mean = 0.0;
  double accuracy = 0.0;  // category analogy accuracy on the truncated model
};

// For each analogy category and each truncation d' in d_grid: spike SNR and
// mean-signal share of the category's task vectors plus the category's
// analogy accuracy under the truncated embedding.
std::vector<SnrSweepRow> snr_sweep(const Eigen::MatrixXd& W_spectral,
                                   const AnalogySet& data,
                                   const std::vector<int>& d_grid,
                                   double rank_tol = 1e-8);

struct Histogram {
  std::vector<double> edges;          // nbins + 1 edges
  std::vector<std::uint64_t> counts;  // nbins counts
};

// Equal-width histogram over [min, max] of the values.
Histogram histogram(const std::vector<double>& values, int nbins);

}  // namespace qwem
