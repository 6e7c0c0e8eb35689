#include "qwem/dynamics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>

#include "qwem/error.hpp"
#include "qwem/rng.hpp"
#include "qwem/text_io.hpp"

namespace qwem {

namespace {

constexpr int kMaxHalvings = 20;

// Quarter squared Frobenius distance between WW^T and M, computed without
// forming the V x V product: ||WW^T - M||^2 = ||M||^2 - 2 tr(W^T M W) + ||W^T W||^2.
double flow_loss(const Eigen::MatrixXd& M, double mnorm2, const Eigen::MatrixXd& W) {
  const Eigen::MatrixXd MW = M * W;
  const Eigen::MatrixXd gram = W.transpose() * W;
  const double cross = (W.array() * MW.array()).sum();
  return 0.25 * (mnorm2 - 2.0 * cross + gram.squaredNorm());
}

Eigen::MatrixXd flow_rhs(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W) {
  return 0.5 * (M * W - W * (W.transpose() * W));
}

Eigen::MatrixXd rk4_step(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W,
                         double h) {
  const Eigen::MatrixXd k1 = flow_rhs(M, W);
  const Eigen::MatrixXd k2 = flow_rhs(M, W + 0.5 * h * k1);
  const Eigen::MatrixXd k3 = flow_rhs(M, W + 0.5 * h * k2);
  const Eigen::MatrixXd k4 = flow_rhs(M, W + h * k3);
  return W + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

class FlowStepper {
 public:
  FlowStepper(const Eigen::MatrixXd& M, double step)
      : M_(M), mnorm2_(M.squaredNorm()), h_(step) {}

  double loss(const Eigen::MatrixXd& W) const { return flow_loss(M_, mnorm2_, W); }

  // Advances W in place from t_from to t_to. A step that raises the loss
  // beyond rounding noise is retried at half size; the reduced step sticks
  // for the remainder of the call.
  void advance(Eigen::MatrixXd& W, double t_from, double t_to) {
    if (t_to < t_from) throw UsageError("flow integration time must not decrease");
    double remaining = t_to - t_from;
    if (remaining == 0.0) return;
    double h = std::min(h_, remaining);
    double current = loss(W);
    int halvings = 0;
    while (remaining > 0.0) {
      const double h_try = std::min(h, remaining);
      Eigen::MatrixXd trial = rk4_step(M_, W, h_try);
      const double next = loss(trial);
      if (!std::isfinite(next) || next > current + 1e-12 * (1.0 + std::abs(current))) {
        if (++halvings > kMaxHalvings)
          throw DataError("flow integration diverged: loss still increases after " +
                          std::to_string(kMaxHalvings) + " step halvings");
        h = 0.5 * h_try;
        continue;
      }
      W.swap(trial);
      current = next;
      remaining -= h_try;
    }
  }

 private:
  const Eigen::MatrixXd& M_;
  double mnorm2_;
  double h_;
};

void check_time_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw UsageError("time grid must not be empty");
  if (grid.front() < 0.0) throw UsageError("time grid must start at t >= 0");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (grid[i + 1] <= grid[i])
      throw UsageError("time grid must be strictly increasing");
  for (double t : grid)
    if (!std::isfinite(t)) throw UsageError("time grid must be finite");
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) /
                                                static_cast<double>(n - 1);
  return out;
}

}  // namespace

double sigmoidal_variance(double lambda, double s0sq, double t) {
  if (s0sq < 0.0) throw UsageError("initial mode variance must be non-negative");
  if (t < 0.0) throw UsageError("sigmoidal_variance requires t >= 0");
  if (s0sq == 0.0) return 0.0;
  if (lambda == 0.0) return s0sq / (1.0 + s0sq * t);
  if (lambda > 0.0) {
    // e^{-lambda t} <= 1 keeps this form finite for arbitrarily large t.
    const double decay = std::exp(-lambda * t);
    return s0sq * lambda / ((lambda - s0sq) * decay + s0sq);
  }
  // Decaying mode: the e^{+lambda t} form stays finite instead.
  const double grow = std::exp(lambda * t);
  return s0sq * lambda * grow / ((lambda - s0sq) + s0sq * grow);
}

double characteristic_time(double lambda, double s0sq) {
  if (lambda <= 0.0) throw UsageError("characteristic time needs lambda > 0");
  if (s0sq <= 0.0) throw UsageError("characteristic time needs s0sq > 0");
  if (s0sq >= lambda)
    throw UsageError("characteristic time is defined for unsaturated modes (s0sq < lambda)");
  return std::log(lambda / s0sq) / lambda;
}

DynamicsTrace aligned_flow(const SpectralDecomposition& spec,
                           const Eigen::VectorXd& S0, int d,
                           const std::vector<double>& time_grid) {
  check_time_grid(time_grid);
  if (d < 1) throw UsageError("aligned_flow requires d >= 1");
  if (spec.values.size() < d)
    throw UsageError("aligned_flow needs at least d eigenvalues");
  if (S0.size() != d)
    throw UsageError("aligned_flow requires one initial singular value per mode");
  for (int k = 0; k < d; ++k) {
    if (spec.values(k) < 0.0)
      throw DataError("aligned_flow requires a PSD top-d eigenvalue block");
    if (S0(k) < 0.0) throw UsageError("initial singular values must be non-negative");
  }

  double tail = 0.0;
  for (int k = d; k < spec.values.size(); ++k) tail += spec.values(k) * spec.values(k);

  const int T = static_cast<int>(time_grid.size());
  DynamicsTrace trace;
  trace.times = time_grid;
  trace.mode_variance.resize(T, d);
  trace.alignment = Eigen::MatrixXd::Ones(T, d);
  trace.loss.resize(static_cast<std::size_t>(T));
  for (int ti = 0; ti < T; ++ti) {
    double misfit = tail;
    for (int k = 0; k < d; ++k) {
      const double s2 = sigmoidal_variance(spec.values(k), S0(k) * S0(k), time_grid[ti]);
      trace.mode_variance(ti, k) = s2;
      const double gap = s2 - spec.values(k);
      misfit += gap * gap;
    }
    trace.loss[static_cast<std::size_t>(ti)] = 0.25 * misfit;
  }
  return trace;
}

DynamicsTrace integrate_flow(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W0,
                             const std::vector<double>& time_grid, double step) {
  check_time_grid(time_grid);
  if (M.rows() != M.cols()) throw UsageError("flow target matrix must be square");
  if (W0.rows() != M.rows())
    throw UsageError("initialization row count must match the target matrix");
  if (W0.cols() < 1) throw UsageError("initialization needs at least one column");

  const int V = static_cast<int>(M.rows());
  const int d = static_cast<int>(W0.cols());
  const int want = V <= 1024 ? kEighAll : d;
  const SpectralDecomposition spec = eigh(M, want);

  double h = step;
  if (h <= 0.0) {
    if (spec.values(0) <= 0.0)
      throw UsageError("default step needs a positive leading eigenvalue; pass step explicitly");
    h = 0.01 / spec.values(0);
  }

  FlowStepper stepper(M, h);
  const int T = static_cast<int>(time_grid.size());
  DynamicsTrace trace;
  trace.times = time_grid;
  trace.mode_variance.resize(T, d);
  trace.alignment.resize(T, d);
  trace.loss.resize(static_cast<std::size_t>(T));

  Eigen::MatrixXd W = W0;
  double t_prev = 0.0;
  for (int ti = 0; ti < T; ++ti) {
    stepper.advance(W, t_prev, time_grid[ti]);
    t_prev = time_grid[ti];
    trace.loss[static_cast<std::size_t>(ti)] = stepper.loss(W);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeThinU);
    for (int k = 0; k < d; ++k) {
      const double s = svd.singularValues()(k);
      trace.mode_variance(ti, k) = s * s;
      const int cols = std::min(k + 1, static_cast<int>(spec.vectors.cols()));
      trace.alignment(ti, k) =
          (spec.vectors.leftCols(cols).transpose() * svd.matrixU().col(k)).squaredNorm();
    }
  }
  return trace;
}

double offdiagonal_coupling_sq(double lambda_i, double lambda_j, double sigma2,
                               double t) {
  if (sigma2 <= 0.0) throw UsageError("offdiagonal coupling needs sigma2 > 0");
  if (lambda_i <= 0.0 || lambda_j <= 0.0)
    throw UsageError("offdiagonal coupling needs positive eigenvalues");
  if (t < 0.0) throw UsageError("offdiagonal coupling needs t >= 0");
  // log(lambda + sigma2 (e^x - 1)) = x + log(sigma2 + (lambda - sigma2) e^{-x}).
  const auto log_denom = [sigma2](double lambda, double x) {
    return x + std::log(sigma2 + (lambda - sigma2) * std::exp(-x));
  };
  const double log_aj = std::log(lambda_j) - log_denom(lambda_j, lambda_j * t);
  const double log_ai = std::log(lambda_i) - log_denom(lambda_i, lambda_i * t);
  return std::exp(std::log(sigma2) + lambda_j * t + 2.0 * log_aj + log_ai);
}

OffdiagonalPeak offdiagonal_peak(double lambda_i, double lambda_j, double sigma2) {
  if (sigma2 <= 0.0) throw UsageError("offdiagonal peak needs sigma2 > 0");
  if (lambda_i <= 0.0 || lambda_j <= 0.0)
    throw UsageError("offdiagonal peak needs positive eigenvalues");
  if (lambda_i == lambda_j)
    throw UsageError("offdiagonal peak is singular for equal eigenvalues");
  if (lambda_j > lambda_i) std::swap(lambda_i, lambda_j);
  OffdiagonalPeak out;
  const double ratio = lambda_j / lambda_i;
  out.peak = std::exp(ratio * std::log(lambda_i * lambda_j / (lambda_i - lambda_j)) +
                      (1.0 - ratio) * std::log(sigma2));
  out.t_peak =
      std::log(lambda_i * lambda_j / (sigma2 * (lambda_i - lambda_j))) / lambda_i;
  return out;
}

SilentAlignmentReport silent_alignment_experiment(
    const Eigen::MatrixXd& M, int d, const std::vector<double>& sigma2_list,
    std::uint64_t seed, std::vector<double> rescaled_grid) {
  if (M.rows() != M.cols()) throw UsageError("target matrix must be square");
  const int V = static_cast<int>(M.rows());
  if (d < 1 || d > V) throw UsageError("embedding dimension out of range");
  if (sigma2_list.empty()) throw UsageError("need at least one initialization scale");
  for (double s2 : sigma2_list)
    if (!(s2 > 0.0)) throw UsageError("initialization scales must be positive");
  if (rescaled_grid.empty()) rescaled_grid = linspace(0.0, 6.0, 241);
  check_time_grid(rescaled_grid);

  const SpectralDecomposition spec = eigh(M, kEighAll);
  if (spec.values(0) <= 0.0)
    throw DataError("silent alignment needs a positive leading eigenvalue");
  for (int k = 0; k < d; ++k)
    if (spec.values(k) < 0.0)
      throw DataError("silent alignment needs a PSD top-d eigenvalue block");

  const Eigen::MatrixXd Wfinal =
      spec.vectors.leftCols(d) * spec.values.head(d).cwiseSqrt().asDiagonal();
  const double wstar_norm = Wfinal.norm();

  SilentAlignmentReport report;
  report.note =
      "sigma2 is the entry variance of the random initialization; the time "
      "rescaling uses it directly, while the reference trajectory starts "
      "from the realized singular values";

  for (double sigma2 : sigma2_list) {
    // Same seed for every scale: the initializations share one shape matrix.
    Rng rng(seed);
    const double sigma = std::sqrt(sigma2);
    Eigen::MatrixXd W0(V, d);
    for (int i = 0; i < V; ++i)
      for (int j = 0; j < d; ++j) W0(i, j) = sigma * rng.normal();

    Eigen::BDCSVD<Eigen::MatrixXd> svd0(W0);
    const Eigen::VectorXd S0 = svd0.singularValues().head(d);

    SilentAlignmentRun run;
    run.sigma2 = sigma2;
    run.tau1 = characteristic_time(spec.values(0), sigma2);

    FlowStepper stepper(M, 0.01 / spec.values(0));
    Eigen::MatrixXd W = W0;
    double t_prev = 0.0;
    for (double scaled : rescaled_grid) {
      const double t = scaled * run.tau1;
      stepper.advance(W, t_prev, t);
      t_prev = t;
      Eigen::MatrixXd Wref(V, d);
      for (int k = 0; k < d; ++k) {
        const double s2 = sigmoidal_variance(spec.values(k), S0(k) * S0(k), t);
        Wref.col(k) = spec.vectors.col(k) * std::sqrt(s2);
      }
      run.sup_distance =
          std::max(run.sup_distance, requiv_distance(W, Wref) / wstar_norm);
    }
    run.final_distance = requiv_distance(W, Wfinal);
    report.runs.push_back(run);
  }
  return report;
}

int count_loss_drops(const std::vector<double>& loss, double rel_threshold) {
  if (loss.size() < 2) return 0;
  double max_drop = 0.0;
  for (std::size_t i = 0; i + 1 < loss.size(); ++i)
    max_drop = std::max(max_drop, loss[i] - loss[i + 1]);
  if (max_drop <= 0.0) return 0;
  int events = 0;
  bool inside = false;
  for (std::size_t i = 0; i + 1 < loss.size(); ++i) {
    const bool active = loss[i] - loss[i + 1] > rel_threshold * max_drop;
    if (active && !inside) ++events;
    inside = active;
  }
  return events;
}

std::vector<double> half_saturation_times(const DynamicsTrace& trace,
                                          const Eigen::VectorXd& lambda) {
  const int d = static_cast<int>(trace.mode_variance.cols());
  if (lambda.size() < d)
    throw UsageError("need one target eigenvalue per traced mode");
  std::vector<double> out(static_cast<std::size_t>(d),
                          std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < d; ++k) {
    for (std::size_t ti = 0; ti < trace.times.size(); ++ti) {
      if (trace.mode_variance(static_cast<int>(ti), k) >= 0.5 * lambda(k)) {
        out[static_cast<std::size_t>(k)] = trace.times[ti];
        break;
      }
    }
  }
  return out;
}

void write_trace_csv(const DynamicsTrace& trace, const std::string& path) {
  const int d = static_cast<int>(trace.mode_variance.cols());
  std::ostringstream os;
  os.precision(17);
  os << "t,loss";
  for (int k = 1; k <= d; ++k) os << ",s" << k << "sq";
  for (int k = 1; k <= d; ++k) os << ",align" << k;
  os << "\n";
  for (std::size_t ti = 0; ti < trace.times.size(); ++ti) {
    os << trace.times[ti] << "," << trace.loss[ti];
    for (int k = 0; k < d; ++k) os << "," << trace.mode_variance(static_cast<int>(ti), k);
    for (int k = 0; k < d; ++k) os << "," << trace.alignment(static_cast<int>(ti), k);
    os << "\n";
  }
  write_text_file(path, os.str());
}

}  // namespace qwem
