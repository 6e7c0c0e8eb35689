#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "qwem/error.hpp"
#include "qwem/rng.hpp"
#include "qwem/taskvec.hpp"
#include "test_support.hpp"

using namespace qwem;

namespace {

using Pairs = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

TaskVectorSet from_rows(const Eigen::MatrixXd& rows) {
  // Pack prebuilt difference rows through the library constructor: stack
  // [rows; 0] and pair each row against the final zero row.
  Eigen::MatrixXd W(rows.rows() + 1, rows.cols());
  W.topRows(rows.rows()) = rows;
  W.row(rows.rows()).setZero();
  Pairs pairs;
  for (int n = 0; n < rows.rows(); ++n)
    pairs.push_back({static_cast<std::uint32_t>(n),
                     static_cast<std::uint32_t>(rows.rows())});
  return build_task_vectors(W, pairs, static_cast<int>(rows.cols()));
}

}  // namespace

TEST_CASE("task vectors are row differences with the advertised Gram data") {
  Eigen::MatrixXd W(4, 3);
  W << 1, 2, 3,
       0, 2, 1,
       5, 0, 0,
       1, 1, 1;
  TaskVectorSet tv = build_task_vectors(W, Pairs{{0, 1}, {2, 3}}, 3, "cat");
  CHECK(tv.category == "cat");
  REQUIRE(tv.R.rows() == 2);
  REQUIRE(tv.R.cols() == 3);
  CHECK(tv.R.row(0).isApprox(W.row(0) - W.row(1)));
  CHECK(tv.R.row(1).isApprox(W.row(2) - W.row(3)));
  CHECK(tv.gram.isApprox(tv.R * tv.R.transpose(), 1e-12));
  REQUIRE(tv.spectrum.size() == 2);
  CHECK(tv.spectrum(0) >= tv.spectrum(1));
  CHECK(tv.spectrum.sum() == doctest::Approx(tv.gram.trace()).epsilon(1e-12));

  // Truncation keeps the leading coordinates only.
  TaskVectorSet cut = build_task_vectors(W, Pairs{{0, 1}, {2, 3}}, 2);
  CHECK(cut.R.cols() == 2);
  CHECK(cut.R.row(0).isApprox((W.row(0) - W.row(1)).head(2)));

  // a = b gives the zero vector.
  TaskVectorSet zero = build_task_vectors(W, Pairs{{1, 1}}, 3);
  CHECK(zero.R.row(0).norm() == 0.0);

  CHECK_THROWS_AS(build_task_vectors(W, Pairs{}, 3), UsageError);
  CHECK_THROWS_AS(build_task_vectors(W, Pairs{{0, 1}}, 0), UsageError);
  CHECK_THROWS_AS(build_task_vectors(W, Pairs{{0, 1}}, 4), UsageError);
  CHECK_THROWS_AS(build_task_vectors(W, Pairs{{0, 9}}, 3), UsageError);
}

TEST_CASE("vocabulary-addressed task vectors reject unknown words") {
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(3, 3);
  Vocabulary v;
  v.words = {"alpha", "beta", "gamma"};
  for (std::uint32_t k = 0; k < 3; ++k) v.id_of[v.words[k]] = k;
  TaskVectorSet tv = build_task_vectors(
      W, v, {{std::string("alpha"), std::string("beta")}}, 3, "named");
  CHECK(tv.R.row(0).isApprox(W.row(0) - W.row(1)));
  CHECK_THROWS_WITH_AS(
      build_task_vectors(W, v, {{std::string("alpha"), std::string("delta")}}, 3),
      doctest::Contains("delta"), DataError);
}

TEST_CASE("category pairs are deduplicated in first-appearance order") {
  AnalogyCategory cat;
  cat.name = "caps";
  cat.tuples = {{0, 1, 2, 3}, {0, 1, 4, 5}, {2, 3, 0, 1}, {4, 5, 6, 7}};
  auto pairs = pairs_from_category(cat);
  REQUIRE(pairs.size() == 4);
  CHECK(pairs[0] == std::pair<std::uint32_t, std::uint32_t>{0, 1});
  CHECK(pairs[1] == std::pair<std::uint32_t, std::uint32_t>{2, 3});
  CHECK(pairs[2] == std::pair<std::uint32_t, std::uint32_t>{4, 5});
  CHECK(pairs[3] == std::pair<std::uint32_t, std::uint32_t>{6, 7});
}

TEST_CASE("spike SNR anchors") {
  // Gram diag(3,1,0): lambda_max 3, rank 2, trace 4 -> snr 1.5.
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(3, 3);
  rows(0, 0) = std::sqrt(3.0);
  rows(1, 1) = 1.0;
  CHECK(spike_snr(from_rows(rows)) == doctest::Approx(1.5).epsilon(1e-12));

  // Orthonormal rows: gram = I, snr = 1 (flat spectrum, no spike).
  CHECK(spike_snr(from_rows(Eigen::MatrixXd::Identity(4, 4))) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Identical rows: rank 1, snr = 1.
  Eigen::MatrixXd same(5, 2);
  same.rowwise() = Eigen::RowVector2d(1.0, 2.0);
  CHECK(spike_snr(from_rows(same)) == doctest::Approx(1.0).epsilon(1e-12));

  // One strong shared direction plus noise: snr grows with N.
  Rng rng(5);
  Eigen::MatrixXd noisy(16, 40);
  for (int n = 0; n < 16; ++n)
    for (int j = 0; j < 40; ++j)
      noisy(n, j) = (j == 0 ? 3.0 : 0.0) + 0.05 * rng.normal();
  CHECK(spike_snr(from_rows(noisy)) > 4.0);

  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 2);
  CHECK_THROWS_AS(spike_snr(from_rows(zero)), DataError);
}

TEST_CASE("mean-signal share anchors") {
  // Equal rows: G = ||v||^2 11^T, 1^T G 1 = N^2 ||v||^2, lambda_max = N ||v||^2.
  Eigen::MatrixXd same(6, 3);
  same.rowwise() = Eigen::RowVector3d(1.0, -2.0, 0.5);
  CHECK(signal_in_mean(from_rows(same)) == doctest::Approx(1.0).epsilon(1e-10));

  // Rows summing to zero put nothing in the uniform direction.
  Eigen::MatrixXd anti(2, 2);
  anti << 1, 3,
         -1, -3;
  CHECK(signal_in_mean(from_rows(anti)) == doctest::Approx(0.0).epsilon(1e-12));

  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd r = test::random_gaussian(10, 20, rng);
    const double share = signal_in_mean(from_rows(r));
    CHECK(share >= 0.0);
    CHECK(share <= 1.0 + 1e-12);
  }
}

TEST_CASE("Marchenko-Pastur law: support, normalization, monotonicity") {
  // sigma2 = 1, gamma = 1: support [0, 4].
  CHECK(mp_cdf(0.0, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(mp_cdf(4.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(mp_cdf(10.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(mp_pdf(-0.5, 1.0, 1.0) == 0.0);
  CHECK(mp_pdf(4.5, 1.0, 1.0) == 0.0);

  // The density integrates to one (trapezoid over the support).
  for (double gamma : {1.0, 0.5, 0.25}) {
    const double lo = 1.0 * std::pow(1.0 - std::sqrt(gamma), 2);
    const double hi = 1.0 * std::pow(1.0 + std::sqrt(gamma), 2);
    const int n = 20000;
    double mass = 0.0;
    for (int k = 0; k < n; ++k) {
      const double a = lo + (hi - lo) * k / n;
      const double b = lo + (hi - lo) * (k + 1) / n;
      mass += 0.5 * (mp_pdf(a, 1.0, gamma) + mp_pdf(b, 1.0, gamma)) * (b - a);
    }
    // gamma = 1 has an inverse-square-root endpoint where the trapezoid
    // rule converges slowly; the cdf check above covers the exact mass.
    CHECK(mass == doctest::Approx(1.0).epsilon(gamma == 1.0 ? 1e-2 : 2e-3));
  }

  // CDF is nondecreasing and consistent with the density.
  double prev = -1.0;
  for (int k = 0; k <= 50; ++k) {
    const double x = 4.0 * k / 50.0;
    const double c = mp_cdf(x, 1.0, 1.0);
    CHECK(c >= prev - 1e-12);
    prev = c;
  }
  // Scale covariance: lambda -> s * lambda with sigma2 -> s * sigma2.
  CHECK(mp_cdf(1.0, 1.0, 0.5) == doctest::Approx(mp_cdf(3.0, 3.0, 0.5)).epsilon(1e-9));

  CHECK_THROWS_AS(mp_cdf(1.0, 0.0, 0.5), UsageError);
  CHECK_THROWS_AS(mp_cdf(1.0, 1.0, 1.5), UsageError);
  CHECK_THROWS_AS(mp_pdf(1.0, -1.0, 0.5), UsageError);
}

TEST_CASE("MP fit recovers the effective dimension of white task vectors") {
  Rng rng(21);
  const int N = 32, d = 512;
  int good = 0;
  for (int seed = 0; seed < 3; ++seed) {
    Eigen::MatrixXd rows(N, d);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < d; ++j) rows(i, j) = rng.normal();
    MPFit fit = mp_fit(from_rows(rows));
    CHECK(fit.ks < 0.15);
    CHECK(fit.sigma2 > 0.0);
    CHECK(fit.lambda_plus > fit.lambda_minus);
    CHECK(fit.gamma == doctest::Approx(static_cast<double>(N) / fit.d_eff));
    if (std::abs(fit.d_eff - d) <= 0.25 * d) ++good;
  }
  CHECK(good >= 2);
}

TEST_CASE("a planted rank-one direction is excluded from the MP bulk as a spike") {
  // The fit centers by the mean task vector, so the planted component must
  // vary across rows to survive centering: alternate its sign.
  Rng rng(33);
  const int N = 32, d = 512;
  Eigen::MatrixXd rows(N, d);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < d; ++j)
      rows(i, j) = rng.normal() + (j == 0 ? (i % 2 ? 8.0 : -8.0) : 0.0);
  MPFit fit = mp_fit(from_rows(rows));
  CHECK(fit.top_excluded);
  // The spike inflates sigma2 a little, so only ask for a loose bulk fit.
  CHECK(fit.ks < 0.3);
}

TEST_CASE("MP fit is invariant to row order and right-orthogonal maps") {
  Rng rng(44);
  const int N = 16, d = 96;
  Eigen::MatrixXd rows(N, d);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < d; ++j) rows(i, j) = rng.normal();
  MPFit base = mp_fit(from_rows(rows));

  Eigen::MatrixXd perm = rows;
  perm.row(0).swap(perm.row(N - 1));
  perm.row(3).swap(perm.row(7));
  MPFit p = mp_fit(from_rows(perm));
  CHECK(p.d_eff == base.d_eff);
  CHECK(p.ks == doctest::Approx(base.ks).epsilon(1e-9));

  Eigen::MatrixXd U = test::random_orthogonal(d, rng);
  MPFit r = mp_fit(from_rows(rows * U));
  CHECK(r.d_eff == base.d_eff);
  CHECK(r.ks == doctest::Approx(base.ks).epsilon(1e-6));
  CHECK(r.sigma2 == doctest::Approx(base.sigma2).epsilon(1e-6));
}

TEST_CASE("MP fit input validation") {
  Rng rng(3);
  Eigen::MatrixXd few = test::random_gaussian(4, 64, rng);
  CHECK_THROWS_AS(mp_fit(from_rows(few)), UsageError);
  Eigen::MatrixXd narrow = test::random_gaussian(16, 8, rng);
  CHECK_THROWS_AS(mp_fit(from_rows(narrow)), UsageError);
  // Identical rows center to zero. Integer entries keep the column means
  // exact so the centered matrix is exactly zero.
  Eigen::MatrixXd same(12, 64);
  same.rowwise() = Eigen::RowVectorXd::LinSpaced(64, 0.0, 63.0);
  CHECK_THROWS_AS(mp_fit(from_rows(same)), DataError);
}

TEST_CASE("snr sweep covers every category and truncation") {
  Rng rng(7);
  Eigen::MatrixXd W = test::random_gaussian(40, 8, rng);
  AnalogySet set;
  set.categories.push_back({"one", {{0, 1, 2, 3}, {4, 5, 6, 7}}});
  set.categories.push_back({"two", {{8, 9, 10, 11}}});
  auto table = snr_sweep(W, set, {1, 4, 8});
  REQUIRE(table.size() == 6);
  CHECK(table[0].category == "one");
  CHECK(table[0].d_trunc == 1);
  CHECK(table[5].category == "two");
  CHECK(table[5].d_trunc == 8);
  for (const auto& row : table) {
    CHECK(row.snr >= 1.0 - 1e-12);
    CHECK(row.signal_in_mean >= 0.0);
    CHECK(row.signal_in_mean <= 1.0 + 1e-12);
    CHECK(row.accuracy >= 0.0);
    CHECK(row.accuracy <= 1.0);
  }
  // Width-one task vectors are scalars: the Gram is rank one, snr exactly 1.
  CHECK(table[0].snr == doctest::Approx(1.0).epsilon(1e-12));

  auto again = snr_sweep(W, set, {1, 4, 8});
  for (std::size_t k = 0; k < table.size(); ++k) {
    CHECK(table[k].snr == again[k].snr);
    CHECK(table[k].accuracy == again[k].accuracy);
  }
  CHECK_THROWS_AS(snr_sweep(W, set, {}), UsageError);
}

TEST_CASE("histogram splits the range into equal bins") {
  Histogram h = histogram({0.0, 0.1, 0.5, 0.9, 1.0, 1.0}, 2);
  REQUIRE(h.edges.size() == 3);
  REQUIRE(h.counts.size() == 2);
  CHECK(h.edges.front() == 0.0);
  CHECK(h.edges.back() == 1.0);
  CHECK(h.counts[0] == 2);  // [0, 0.5) holds 0.0 and 0.1
  CHECK(h.counts[1] == 4);  // [0.5, 1.0] holds 0.5, 0.9 and both max values

  Histogram one = histogram({2.0, 2.0}, 3);  // degenerate range
  CHECK(std::accumulate(one.counts.begin(), one.counts.end(), 0ull) == 2);

  CHECK_THROWS_AS(histogram({}, 4), UsageError);
  CHECK_THROWS_AS(histogram({1.0}, 0), UsageError);
}

TEST_CASE("trace of the truncated Gram grows with the truncation width") {
  Rng rng(17);
  Eigen::MatrixXd W = test::random_gaussian(30, 10, rng);
  Pairs pairs;
  for (std::uint32_t k = 0; k + 1 < 20; k += 2) pairs.push_back({k, k + 1});
  double prev = 0.0;
  for (int width : {2, 4, 6, 8, 10}) {
    TaskVectorSet tv = build_task_vectors(W, pairs, width);
    const double tr = tv.gram.trace();
    CHECK(tr >= prev - 1e-12);
    prev = tr;
  }
}
