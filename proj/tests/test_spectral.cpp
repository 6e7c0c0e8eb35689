#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "qwem/error.hpp"
#include "qwem/rng.hpp"
#include "qwem/spectral.hpp"
#include "test_support.hpp"

using namespace qwem;

TEST_CASE("identity matrix decomposes to unit eigenvalues") {
  SpectralDecomposition s = eigh(Eigen::MatrixXd::Identity(3, 3));
  REQUIRE(s.values.size() == 3);
  CHECK(s.values(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.values(2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.source_dim == 3);
  CHECK((s.vectors.transpose() * s.vectors - Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("two-by-two anchor: eigenvalues 3 and 1") {
  Eigen::MatrixXd m(2, 2);
  m << 2, 1, 1, 2;
  SpectralDecomposition s = eigh(m);
  CHECK(s.values(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(s.values(1) == doctest::Approx(1.0).epsilon(1e-14));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(s.vectors(0, 0) == doctest::Approx(r).epsilon(1e-12));
  CHECK(s.vectors(1, 0) == doctest::Approx(r).epsilon(1e-12));
}

TEST_CASE("top-k truncation keeps the leading pair") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 5.0;
  m(1, 1) = -1.0;
  SpectralDecomposition s = eigh(m, 1);
  REQUIRE(s.values.size() == 1);
  CHECK(s.values(0) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(std::abs(s.vectors(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.vectors(0, 0) > 0.0);  // sign convention
}

TEST_CASE("eigh rejects asymmetric input") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 0.5, -0.5, 1;
  CHECK_THROWS_AS(eigh(m), DataError);
}

TEST_CASE("decomposition reconstructs the input and is deterministic") {
  Rng rng(13);
  Eigen::MatrixXd m = test::random_symmetric(12, rng);
  SpectralDecomposition a = eigh(m);
  SpectralDecomposition b = eigh(m);
  CHECK((a.vectors - b.vectors).cwiseAbs().maxCoeff() == 0.0);  // bit identical
  for (int k = 1; k < 12; ++k) CHECK(a.values(k - 1) >= a.values(k));
  const Eigen::MatrixXd rec =
      a.vectors * a.values.asDiagonal() * a.vectors.transpose();
  CHECK((rec - m).norm() <= 1e-8 * m.norm());
  CHECK((a.vectors.transpose() * a.vectors - Eigen::MatrixXd::Identity(12, 12))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  // Sign convention: each column's largest-magnitude entry is positive.
  for (int k = 0; k < 12; ++k) {
    int argmax = 0;
    a.vectors.col(k).cwiseAbs().maxCoeff(&argmax);
    CHECK(a.vectors(argmax, k) > 0.0);
  }
}

TEST_CASE("iterative path agrees with the dense solver") {
  // Above the dense cutoff the solver switches to subspace iteration; compare
  // on a matrix with a clear spectral gap.
  Rng rng(101);
  const int n = 4200;
  Eigen::VectorXd diag(n);
  for (int i = 0; i < n; ++i) diag(i) = 1.0 / (1.0 + i);
  diag(0) = 3.0;
  diag(1) = 2.0;
  diag(2) = 1.4;
  Eigen::MatrixXd m = diag.asDiagonal();
  SpectralDecomposition s = eigh(m, 3);
  REQUIRE(s.values.size() == 3);
  CHECK(s.values(0) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(s.values(1) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.values(2) == doctest::Approx(1.4).epsilon(1e-9));
  for (int k = 0; k < 3; ++k) {
    // Eigenvalues converge quadratically in the residual; 1e-9 relative
    // eigenvalue accuracy corresponds to residuals around 1e-5.
    CHECK((m * s.vectors.col(k) - s.values(k) * s.vectors.col(k)).norm() <
          1e-4 * 3.0);
  }
}

TEST_CASE("factorization of a diagonal target is exact") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
  m(0, 0) = 4.0;
  m(1, 1) = 1.0;
  Eigen::MatrixXd w = factorize_target(m, 2);
  REQUIRE(w.rows() == 3);
  REQUIRE(w.cols() == 2);
  CHECK(w(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(w(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(w(1, 0)) < 1e-12);
  CHECK(std::abs(w(2, 0)) < 1e-12);
  CHECK(std::abs(w(2, 1)) < 1e-12);
}

TEST_CASE("factorization reports the feasible rank on negative eigenvalues") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 5.0;
  m(1, 1) = -1.0;
  CHECK_THROWS_AS(factorize_target(m, 2), DataError);
  try {
    factorize_target(m, 2);
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
  CHECK_NOTHROW(factorize_target(m, 1));
}

TEST_CASE("rank-d factorization is the best rank-d approximation") {
  Rng rng(57);
  Eigen::VectorXd lambda(6);
  lambda << 4.0, 2.5, 1.2, 0.6, 0.2, 0.05;
  Eigen::MatrixXd m = test::psd_with_spectrum(lambda, rng);
  for (int d : {1, 2, 4}) {
    Eigen::MatrixXd w = factorize_target(m, d);
    const double best = (w * w.transpose() - m).squaredNorm();
    // Analytic optimum: the squared tail of the spectrum.
    double tail = 0.0;
    for (int k = d; k < 6; ++k) tail += lambda(k) * lambda(k);
    CHECK(best == doctest::Approx(tail).epsilon(1e-9));
    // No random competitor of the same rank does better.
    for (int trial = 0; trial < 300; ++trial) {
      Eigen::MatrixXd c = test::random_gaussian(6, d, rng);
      CHECK((c * c.transpose() - m).squaredNorm() >= best - 1e-9);
    }
  }
}

TEST_CASE("rotation distance vanishes exactly on the equivalence class") {
  Rng rng(77);
  Eigen::MatrixXd w = test::random_gaussian(5, 2, rng);
  Eigen::MatrixXd u = test::random_orthogonal(2, rng);
  CHECK(requiv_distance(w, w * u) <= 1e-9);
  CHECK(requiv_distance(w, w) <= 1e-12);
}

TEST_CASE("rotation distance anchor: orthogonal unit columns") {
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(3, 1);
  w1(0, 0) = 1.0;
  Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(3, 1);
  w2(0, 0) = 2.0;
  CHECK(requiv_distance(w1, w2) == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::MatrixXd w3 = Eigen::MatrixXd::Zero(3, 1);
  w3(1, 0) = 1.0;
  // Orthogonal directions: the best rotation is a sign, distance sqrt(2).
  CHECK(requiv_distance(w1, w3) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("rotation distance is the minimum over orthogonal right factors") {
  Rng rng(31);
  Eigen::MatrixXd w1 = test::random_gaussian(5, 2, rng);
  Eigen::MatrixXd w2 = test::random_gaussian(5, 2, rng);
  const double d = requiv_distance(w1, w2);
  CHECK(d <= (w1 - w2).norm() + 1e-12);
  // Exhaustive-ish search over 2x2 orthogonals (rotations and reflections).
  double best = 1e300;
  for (int k = 0; k < 20000; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 20000.0;
    Eigen::MatrixXd u(2, 2);
    u << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    best = std::min(best, (w1 * u - w2).norm());
    u.col(1) = -u.col(1);
    best = std::min(best, (w1 * u - w2).norm());
  }
  CHECK(d == doctest::Approx(best).epsilon(1e-6));
  // Pseudometric sanity.
  CHECK(requiv_distance(w2, w1) == doctest::Approx(d).epsilon(1e-10));
  Eigen::MatrixXd w3 = test::random_gaussian(5, 2, rng);
  CHECK(requiv_distance(w1, w3) <=
        d + requiv_distance(w2, w3) + 1e-9);
}

TEST_CASE("subspace overlap separates shared and orthogonal row spaces") {
  Rng rng(19);
  Eigen::MatrixXd w = test::random_gaussian(6, 3, rng);
  Eigen::MatrixXd self = subspace_overlap(w, w, 2);
  CHECK(self(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(self(1, 1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(self(0, 1)) < 1e-10);

  Eigen::MatrixXd u = test::random_orthogonal(3, rng);
  Eigen::MatrixXd rot = subspace_overlap(w, w * u, 3);
  // Same singular subspaces: the overlap matrix sums to k on every row.
  for (int r = 0; r < 3; ++r)
    CHECK(rot.row(r).sum() == doctest::Approx(1.0).epsilon(1e-9));

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 0.5;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(6, 2);
  b(2, 0) = 1.0;
  b(3, 1) = 0.5;
  Eigen::MatrixXd ortho = subspace_overlap(a, b, 2);
  CHECK(ortho.cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(subspace_overlap(a, b, 3), UsageError);
  Eigen::MatrixXd rank1 = Eigen::MatrixXd::Zero(6, 2);
  rank1(0, 0) = 1.0;
  CHECK_THROWS_AS(subspace_overlap(rank1, b, 2), DataError);
}

TEST_CASE("near-degenerate spectra are flagged") {
  SpectralDecomposition s;
  s.values = Eigen::VectorXd(3);
  s.values << 1.0, 1.0, 0.5;
  s.vectors = Eigen::MatrixXd::Identity(3, 3);
  s.source_dim = 3;
  CHECK(count_near_degenerate_gaps(s) >= 1);
  s.values << 3.0, 1.0, 0.5;
  CHECK(count_near_degenerate_gaps(s) == 0);
}
