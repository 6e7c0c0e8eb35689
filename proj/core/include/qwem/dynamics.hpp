#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qwem/spectral.hpp"

namespace qwem {

struct DynamicsTrace {
  std::vector<double> times;      // strictly increasing flow times
  Eigen::MatrixXd mode_variance;  // len(times) x d, s_k^2(t)
  std::vector<double> loss;       // (1/4)||WW^T - M||_F^2 along the trace
  Eigen::MatrixXd alignment;      // len(times) x d, squared overlap of the
                                  // k-th latent direction with the top-k
                                  // target eigenspace
  std::uint64_t seed = 0;
  double sigma2 = 0.0;
};

// s_k^2(t) = s0sq * lambda * e^{lambda t} / (lambda + s0sq (e^{lambda t} - 1)),
// evaluated in the overflow-safe form with e^{-lambda t}; saturates at lambda.
double sigmoidal_variance(double lambda, double s0sq, double t);

// tau_k = (1/lambda) ln(lambda / s0sq); the mode must start unsaturated.
double characteristic_time(double lambda, double s0sq);

// Closed-form trajectory from an initialization aligned with the top-d target
// eigenvectors. The loss uses every eigenvalue present in `spec` for the
// unfit tail, so pass the full decomposition when absolute loss matters.
DynamicsTrace aligned_flow(const SpectralDecomposition& spec,
                           const Eigen::VectorXd& S0, int d,
                           const std::vector<double>& time_grid);

// Classical 4th-order one-step integration of dW/dt = (1/2)(M - WW^T)W with
// adaptive step halving whenever a step would increase the loss; more than 20
// halvings for one step is treated as divergence. step <= 0 selects the
// default 0.01 / lambda_1.
DynamicsTrace integrate_flow(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W0,
                             const std::vector<double>& time_grid, double step = 0.0);

struct OffdiagonalPeak {
  double peak = 0.0;    // max_t R_ij^2(t), small-initialization approximation
  double t_peak = 0.0;  // (1/lambda_i) log(lambda_i lambda_j / (sigma^2 (lambda_i - lambda_j)))
};

// Peak of the off-diagonal coupling R_ij^2 during training from scale-sigma
// initialization: (lambda_i lambda_j/(lambda_i - lambda_j))^{lambda_j/lambda_i}
// * sigma^{2(lambda_i - lambda_j)/lambda_i}. Valid for lambda_j << lambda_i;
// equal rates are a singularity of the formula.
OffdiagonalPeak offdiagonal_peak(double lambda_i, double lambda_j, double sigma2);

// The exact closed form whose maximum the formula above approximates: all
// initial amplitudes at sigma^2, two sigmoidal factors and an exponential.
double offdiagonal_coupling_sq(double lambda_i, double lambda_j, double sigma2,
                               double t);

struct SilentAlignmentRun {
  double sigma2 = 0.0;
  double tau1 = 0.0;       // lambda_1^{-1} ln(lambda_1 / sigma^2)
  double sup_distance = 0.0;    // sup over the rescaled grid of
                                // requiv_distance(W, W*) / ||W*(inf)||_F
  double final_distance = 0.0;  // requiv_distance to the spectral factorization
};

struct SilentAlignmentReport {
  std::vector<SilentAlignmentRun> runs;
  std::string note;  // records the sigma^2-vs-realized-scale convention
};

// For each sigma^2: integrates from W0 with i.i.d. N(0, sigma^2) entries
// (same generator seed, so initializations share the same shape), rescales
// time by tau_1, and compares against the aligned-flow trajectory started
// from W0's singular values. The rescaled grid defaults to 241 points on
// [0, 6]; density matters, because the distance is sharply peaked around the
// per-mode transition times.
SilentAlignmentReport silent_alignment_experiment(
    const Eigen::MatrixXd& M, int d, const std::vector<double>& sigma2_list,
    std::uint64_t seed, std::vector<double> rescaled_grid = {});

// Number of separated loss-drop events in a trace: maximal runs of steps
// whose per-step decrease exceeds rel_threshold times the largest per-step
// decrease. A stepwise trace with plateaus yields one event per escape.
int count_loss_drops(const std::vector<double>& loss, double rel_threshold = 0.05);

// First trace time at which mode k's variance reaches lambda_k / 2.
std::vector<double> half_saturation_times(const DynamicsTrace& trace,
                                          const Eigen::VectorXd& lambda);

// Trace CSV: t, loss, s1sq..sdsq, align1..alignd.
void write_trace_csv(const DynamicsTrace& trace, const std::string& path);

}  // namespace qwem
