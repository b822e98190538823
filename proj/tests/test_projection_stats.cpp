#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "lavlev/errors.hpp"
#include "lavlev/projection_stats.hpp"
#include "oracles.hpp"

using namespace lavlev;

namespace {

Matrix eq18() {
  Matrix h(7, 2);
  h << 10, -10, 1, 0, -1, 0, 0, -1, 0, 1, 11, -10, -1, -1;
  return h;
}

}  // namespace

TEST_SUITE("projection_stats") {
  TEST_CASE("chi-square quantiles against quadrature and closed forms") {
    for (int d : {1, 2, 3, 4, 7, 12}) {
      for (double p : {0.05, 0.5, 0.9, 0.975, 0.999}) {
        const double x = chi2_quantile(d, p);
        CHECK(oracle::chi2_cdf(d, x) == doctest::Approx(p).epsilon(1e-6));
      }
    }
    // d = 2 is exponential; d = 1 is a squared normal.
    CHECK(chi2_quantile(2, 0.975) == doctest::Approx(-2.0 * std::log(0.025)).epsilon(1e-12));
    CHECK(std::erf(std::sqrt(chi2_quantile(1, 0.975) / 2.0)) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(std::round(chi2_quantile(1) * 1000) / 1000 == 5.024);
    CHECK(std::round(chi2_quantile(2) * 1000) / 1000 == 7.378);
    CHECK(chi2_quantile(2, 1e-12) < 1e-10);
  }

  TEST_CASE("chi-square quantile is increasing in d and p") {
    for (int d = 1; d < 20; ++d) CHECK(chi2_quantile(d + 1) > chi2_quantile(d));
    for (double p = 0.01; p < 0.98; p += 0.01) CHECK(chi2_quantile(3, p + 0.01) > chi2_quantile(3, p));
  }

  TEST_CASE("chi-square argument checks") {
    CHECK_THROWS_AS(chi2_quantile(0), Error);
    CHECK_THROWS_AS(chi2_quantile(1, 0.0), Error);
    CHECK_THROWS_AS(chi2_quantile(1, 1.0), Error);
  }

  TEST_CASE("median") {
    CHECK(median({3, 1, 2}) == 2);
    CHECK(median({4, 1, 3, 2}) == 2.5);
    CHECK_THROWS_AS(median({}), Error);
  }

  TEST_CASE("3-bus classification, cutoffs and dof") {
    const auto r = compute_ps(make_model(eq18()));
    CHECK(r.flagged == std::vector<bool>{true, false, false, false, false, true, false});
    CHECK(r.dof == std::vector<int>{2, 1, 1, 1, 1, 2, 2});
    CHECK(r.cutoff(0) == doctest::Approx(7.3778).epsilon(1e-4));
    CHECK(r.cutoff(1) == doctest::Approx(5.0239).epsilon(1e-4));
    CHECK(r.ps(1) == doctest::Approx(0.8385).epsilon(1e-3));
    CHECK(r.ps(6) == doctest::Approx(1.677).epsilon(1e-3));
    CHECK(r.defined);
  }

  TEST_CASE("MAD variant misses row 1 of the 3-bus model") {
    PsOptions o;
    o.scale = PsScale::kMad;
    const auto r = compute_ps(make_model(eq18()), o);
    CHECK_FALSE(r.flagged[0]);
    CHECK(r.flagged[5]);
  }

  TEST_CASE("dominant third row is flagged") {
    Matrix h(3, 2);
    h << 1, 0, 0, 1, 100, 100;
    const auto r = compute_ps(make_model(h));
    CHECK(r.flagged == std::vector<bool>{false, false, true});
    CHECK(r.ps(2) == doctest::Approx(83.01).epsilon(1e-3));
  }

  TEST_CASE("identical rows leave the statistic undefined") {
    const auto r = compute_ps(make_model(Matrix::Ones(5, 2)));
    CHECK_FALSE(r.defined);
    CHECK(r.directions_used == 0);
    CHECK(r.directions_skipped_zero_scale == 5);
    CHECK(std::none_of(r.flagged.begin(), r.flagged.end(), [](bool b) { return b; }));
  }

  TEST_CASE("matches the slow reference implementation") {
    std::mt19937_64 rng(83);
    for (int t = 0; t < 100; ++t) {
      const Index n = 1 + t % 4;
      const Index m = n + 2 + static_cast<Index>(rng() % 8);
      const Matrix h = oracle::random_matrix(rng, m, n);
      const auto r = compute_ps(make_model(h));
      CHECK((r.ps - oracle::ps_sn(h)).cwiseAbs().maxCoeff() < 1e-9);
      for (Index i = 0; i < m; ++i) CHECK(r.flagged[static_cast<std::size_t>(i)] == (r.ps(i) > r.cutoff(i)));
    }
  }

  TEST_CASE("row permutation permutes the statistic") {
    std::mt19937_64 rng(89);
    for (int t = 0; t < 50; ++t) {
      const Matrix h = oracle::random_matrix(rng, 9, 3);
      std::vector<Index> perm(9);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Matrix hp(9, 3);
      for (Index i = 0; i < 9; ++i) hp.row(i) = h.row(perm[static_cast<std::size_t>(i)]);
      const auto a = compute_ps(make_model(h));
      const auto b = compute_ps(make_model(hp));
      for (Index i = 0; i < 9; ++i) CHECK(b.ps(i) == doctest::Approx(a.ps(perm[static_cast<std::size_t>(i)])).epsilon(1e-12));
    }
  }

  TEST_CASE("signed coordinate permutations leave the statistic unchanged") {
    std::mt19937_64 rng(97);
    for (int t = 0; t < 50; ++t) {
      const Matrix h = oracle::random_matrix(rng, 8, 3);
      std::vector<Index> perm{0, 1, 2};
      std::shuffle(perm.begin(), perm.end(), rng);
      Matrix q = Matrix::Zero(3, 3);
      for (Index k = 0; k < 3; ++k) q(k, perm[static_cast<std::size_t>(k)]) = rng() % 2 ? 1.0 : -1.0;
      const auto a = compute_ps(make_model(h));
      const auto b = compute_ps(make_model(Matrix(h * q)));
      CHECK((a.ps - b.ps).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}
