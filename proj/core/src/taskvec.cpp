#include "qwem/taskvec.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <set>

#include "qwem/error.hpp"
#include "qwem/spectral.hpp"

namespace qwem {

namespace {

TaskVectorSet finish_task_vectors(Eigen::MatrixXd R, std::string category) {
  TaskVectorSet tv;
  tv.category = std::move(category);
  tv.R = std::move(R);
  tv.gram = tv.R * tv.R.transpose();
  tv.spectrum = eigh(tv.gram, kEighAll).values;
  return tv;
}

void require_nonzero_gram(const TaskVectorSet& tv, const char* what) {
  if (tv.spectrum.size() == 0 || !(tv.spectrum(0) > 0.0))
    throw DataError(std::string(what) + " is undefined for a zero Gram matrix");
}

}  // namespace

TaskVectorSet build_task_vectors(
    const Eigen::MatrixXd& W,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
    int truncate_to, std::string category) {
  if (pairs.empty()) throw UsageError("need at least one word pair");
  if (truncate_to < 1 || truncate_to > W.cols())
    throw UsageError("truncation width must lie in [1, d]");
  const auto V = static_cast<std::uint32_t>(W.rows());
  Eigen::MatrixXd R(static_cast<Eigen::Index>(pairs.size()), truncate_to);
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    const auto [a, b] = pairs[n];
    if (a >= V || b >= V)
      throw UsageError("word pair references a row outside the embedding");
    R.row(static_cast<Eigen::Index>(n)) =
        W.row(a).head(truncate_to) - W.row(b).head(truncate_to);
  }
  return finish_task_vectors(std::move(R), std::move(category));
}

TaskVectorSet build_task_vectors(
    const Eigen::MatrixXd& W, const Vocabulary& vocab,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    int truncate_to, std::string category) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ids;
  ids.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    const auto ia = vocab.lookup(a);
    if (!ia) throw DataError("word not in vocabulary: " + a);
    const auto ib = vocab.lookup(b);
    if (!ib) throw DataError("word not in vocabulary: " + b);
    ids.emplace_back(*ia, *ib);
  }
  return build_task_vectors(W, ids, truncate_to, std::move(category));
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_from_category(
    const AnalogyCategory& category) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const AnalogyTuple& t : category.tuples) {
    for (const auto& p : {std::pair{t.a, t.b}, std::pair{t.a2, t.b2}}) {
      if (seen.insert(p).second) out.push_back(p);
    }
  }
  return out;
}

double mp_cdf(double lambda, double sigma2, double gamma) {
  if (!(sigma2 > 0.0)) throw UsageError("MP law needs sigma2 > 0");
  if (!(gamma > 0.0) || gamma > 1.0) throw UsageError("MP law here needs 0 < gamma <= 1");
  const double sq = std::sqrt(gamma);
  const double lo = sigma2 * (1.0 - sq) * (1.0 - sq);
  const double hi = sigma2 * (1.0 + sq) * (1.0 + sq);
  if (lambda <= lo) return 0.0;
  if (lambda >= hi) return 1.0;
  // Substituting lambda(theta) = lo + (hi - lo) sin^2(theta) removes both
  // inverse-square-root edge singularities of the density, leaving a smooth
  // integrand for composite Simpson quadrature.
  const double span = hi - lo;
  const double theta_max = std::asin(std::sqrt((lambda - lo) / span));
  const int n = 256;  // Simpson intervals (even)
  const double h = theta_max / n;
  const auto integrand = [&](double theta) {
    const double st = std::sin(theta), ct = std::cos(theta);
    const double lam = lo + span * st * st;
    // gamma = 1 puts the lower edge at 0; the theta = 0 limit is finite.
    if (lam == 0.0) return span / (2.0 * std::numbers::pi * sigma2 * gamma);
    return span * span * st * st * ct * ct /
           (2.0 * std::numbers::pi * sigma2 * gamma * lam);
  };
  double sum = integrand(0.0) + integrand(theta_max);
  for (int k = 1; k < n; ++k)
    sum += integrand(h * k) * (k % 2 == 1 ? 4.0 : 2.0);
  return std::min(1.0, sum * h / 3.0 * 2.0);
}

double mp_pdf(double lambda, double sigma2, double gamma) {
  if (!(sigma2 > 0.0)) throw UsageError("MP law needs sigma2 > 0");
  if (!(gamma > 0.0) || gamma > 1.0) throw UsageError("MP law here needs 0 < gamma <= 1");
  const double sq = std::sqrt(gamma);
  const double lo = sigma2 * (1.0 - sq) * (1.0 - sq);
  const double hi = sigma2 * (1.0 + sq) * (1.0 + sq);
  if (lambda <= lo || lambda >= hi) return 0.0;
  return std::sqrt((hi - lambda) * (lambda - lo)) /
         (2.0 * std::numbers::pi * sigma2 * gamma * lambda);
}

MPFit mp_fit(const TaskVectorSet& tv) {
  const auto N = static_cast<int>(tv.R.rows());
  const auto d = static_cast<int>(tv.R.cols());
  if (N < 8) throw UsageError("MP fit needs at least 8 task vectors");
  if (d < N) throw UsageError("MP fit grid needs d' >= N");

  const Eigen::RowVectorXd mean = tv.R.colwise().mean();
  const Eigen::MatrixXd Rc = tv.R.rowwise() - mean;
  const double sigma2 = Rc.squaredNorm() / (static_cast<double>(N) * d);
  if (!(sigma2 > 0.0)) throw DataError("MP fit needs non-identical task vectors");

  const Eigen::VectorXd spec = eigh(Rc * Rc.transpose(), kEighAll).values;
  std::vector<double> nonzero;
  for (int k = 0; k < spec.size(); ++k)
    if (spec(k) > 1e-12 * spec(0)) nonzero.push_back(spec(k));
  if (nonzero.empty()) throw DataError("MP fit needs a nonzero centered spectrum");
  std::sort(nonzero.begin(), nonzero.end());

  MPFit best;
  bool have_best = false;
  for (int cand = N; cand <= d; ++cand) {
    const double gamma = static_cast<double>(N) / cand;
    const double sq = std::sqrt(gamma);
    const double hi = sigma2 * (1.0 + sq) * (1.0 + sq);
    std::size_t n_bulk = nonzero.size();
    bool excluded = false;
    if (n_bulk > 1 && nonzero.back() / cand > hi) {
      --n_bulk;  // spike convention: drop the top eigenvalue from the bulk
      excluded = true;
    }
    double ks = 0.0;
    for (std::size_t k = 0; k < n_bulk; ++k) {
      const double F = mp_cdf(nonzero[k] / cand, sigma2, gamma);
      const double lo_step = static_cast<double>(k) / static_cast<double>(n_bulk);
      const double hi_step = static_cast<double>(k + 1) / static_cast<double>(n_bulk);
      ks = std::max({ks, std::abs(F - lo_step), std::abs(F - hi_step)});
    }
    if (!have_best || ks < best.ks) {
      have_best = true;
      best.sigma2 = sigma2;
      best.d_eff = cand;
      best.gamma = gamma;
      best.lambda_minus = sigma2 * (1.0 - sq) * (1.0 - sq);
      best.lambda_plus = hi;
      best.ks = ks;
      best.top_excluded = excluded;
    }
  }
  return best;
}

double spike_snr(const TaskVectorSet& tv, double rank_tol) {
  require_nonzero_gram(tv, "spike SNR");
  const double lmax = tv.spectrum(0);
  int rank = 0;
  double trace = 0.0;
  for (int k = 0; k < tv.spectrum.size(); ++k) {
    if (tv.spectrum(k) > rank_tol * lmax) ++rank;
    trace += std::max(0.0, tv.spectrum(k));
  }
  return lmax * rank / trace;
}

double signal_in_mean(const TaskVectorSet& tv) {
  require_nonzero_gram(tv, "signal share of the mean");
  const double quad = tv.gram.sum();
  const auto N = static_cast<double>(tv.gram.rows());
  return quad / (N * tv.spectrum(0));
}

std::vector<SnrSweepRow> snr_sweep(const Eigen::MatrixXd& W_spectral,
                                   const AnalogySet& data,
                                   const std::vector<int>& d_grid,
                                   double rank_tol) {
  if (d_grid.empty()) throw UsageError("need at least one truncation width");
  std::vector<SnrSweepRow> rows;
  for (const AnalogyCategory& category : data.categories) {
    const auto pairs = pairs_from_category(category);
    if (pairs.empty()) continue;
    AnalogySet single;
    single.categories.push_back(category);
    for (int d_trunc : d_grid) {
      const TaskVectorSet tv =
          build_task_vectors(W_spectral, pairs, d_trunc, category.name);
      SnrSweepRow row;
      row.category = category.name;
      row.d_trunc = d_trunc;
      row.snr = spike_snr(tv, rank_tol);
      row.signal_in_mean = signal_in_mean(tv);
      row.accuracy =
          analogy_accuracy(W_spectral.leftCols(d_trunc), single, AnalogyNorm::kFull)
              .accuracy;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

Histogram histogram(const std::vector<double>& values, int nbins) {
  if (values.empty()) throw UsageError("histogram needs values");
  if (nbins < 1) throw UsageError("histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) hi = lo + 1.0;  // single-value degenerate range
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(nbins) + 1);
  h.counts.assign(static_cast<std::size_t>(nbins), 0);
  for (int k = 0; k <= nbins; ++k)
    h.edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / nbins;
  for (double v : values) {
    int bin = static_cast<int>((v - lo) / (hi - lo) * nbins);
    bin = std::clamp(bin, 0, nbins - 1);
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

}  // namespace qwem
