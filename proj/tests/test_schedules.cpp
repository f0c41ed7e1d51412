#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ddkl/gff.hpp"
#include "ddkl/schedules.hpp"

using namespace ddkl;

TEST_CASE("linear beta schedule endpoints and products") {
  const auto one = make_linear_beta(1, 0.1, 0.1);
  CHECK(one.betas == std::vector<double>{0.1});
  CHECK(one.alpha_bar(1) == doctest::Approx(0.9).epsilon(1e-15));

  const auto two = make_linear_beta(2, 0.1, 0.2);
  CHECK(two.alpha_bar(1) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(two.alpha_bar(2) == doctest::Approx(0.72).epsilon(1e-15));  // 0.9 * 0.8
  CHECK(two.alpha_bar(0) == 1.0);

  const auto s = make_linear_beta(500, 1e-4, 0.02);
  for (int t = 1; t <= s.length(); ++t) {
    CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
    CHECK(s.alpha_bar(t) > 0.0);
    CHECK(s.alpha_bar(t) < 1.0);
  }
  for (int t = 2; t <= s.length(); ++t) {
    CHECK(s.beta_tilde(t) > 0.0);
    CHECK(s.beta_tilde(t) < s.beta(t));
  }
}

TEST_CASE("linear beta schedule rejects bad input") {
  CHECK_THROWS(make_linear_beta(0, 0.1, 0.2));
  CHECK_THROWS(make_linear_beta(5, 0.2, 0.1));
  CHECK_THROWS(make_linear_beta(5, 0.0, 0.1));
  CHECK_THROWS(make_linear_beta(5, 0.5, 1.0));
  CHECK_THROWS(DiscreteVPSchedule::from_betas({0.1, 0.1}));
}

TEST_CASE("beta integral closed form") {
  const ContinuousVPSchedule s{0.1, 20.0};
  CHECK(beta_integral(s, 0.0) == 0.0);
  CHECK(beta_integral(s, 1.0) == doctest::Approx(10.05).epsilon(1e-14));
  CHECK(beta_integral(s, 0.5) == doctest::Approx(2.5375).epsilon(1e-14));
  CHECK_THROWS(beta_integral(s, 1.5));
  CHECK_THROWS(beta_integral(s, -0.1));
}

TEST_CASE("geometric sigma ladder") {
  const auto s = make_geometric_sigma(0.01, 20.0, 207);
  CHECK(s.gamma == doctest::Approx(std::pow(2000.0, 1.0 / 206.0)).epsilon(1e-14));
  CHECK(s.gamma == doctest::Approx(1.0376).epsilon(2e-4));
  CHECK(s.sigma(1) == 0.01);
  CHECK(s.sigma(207) == 20.0);
  for (int i = 2; i <= s.length(); ++i) {
    CHECK(std::abs(s.sigma(i) / s.sigma(i - 1) - s.gamma) < 1e-12);
  }

  const auto s2 = make_geometric_sigma(0.01, 50.0, 232);
  CHECK(s2.gamma == doctest::Approx(1.0376).epsilon(2e-4));

  const auto tiny = make_geometric_sigma(1.0, 1.5, 2);
  CHECK(tiny.sigma(1) == 1.0);
  CHECK(tiny.sigma(2) == 1.5);
  CHECK(tiny.gamma == doctest::Approx(1.5));

  CHECK_THROWS(make_geometric_sigma(2.0, 1.0, 10));
  CHECK_THROWS(make_geometric_sigma(1.0, 2.0, 1));
}

TEST_CASE("sigma1 tuning is the max whitened pairwise distance") {
  const IdentityCovariance id;
  CHECK(tune_sigma1({{1.0, 2.0}, {1.0, 2.0}}, id) == 0.0);
  CHECK(tune_sigma1({{0.0, 0.0}, {3.0, 4.0}}, id) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(tune_sigma1({{0.0, 0.0}, {3.0, 4.0}, {1.0, 1.0}}, id) ==
        doctest::Approx(5.0).epsilon(1e-14));
  CHECK_THROWS(tune_sigma1({{1.0}}, id));
  CHECK_THROWS(tune_sigma1({{1.0}, {1.0, 2.0}}, id));
}

TEST_CASE("sigma1 on correlated image-like samples lands near 20") {
  // samples built from the field distribution itself: whitened differences
  // are standard normal, so the max pairwise norm approaches
  // 0.25 * sqrt(2 * 3072) ~ 20 for 32x32x3
  const int n = 32, C = 3, N = n * n;
  const auto cov = SpectralCovariance::build(n, 1.0);
  const auto fields = cov.sample_batch(200 * C, 99);
  std::vector<std::vector<double>> samples;
  for (int s = 0; s < 200; ++s) {
    std::vector<double> img;
    img.reserve(C * N);
    for (int c = 0; c < C; ++c) {
      const auto& f = fields[s * C + c];
      for (double v : f) img.push_back(0.5 + 0.25 * v);
    }
    samples.push_back(std::move(img));
  }
  const double s1 = tune_sigma1(samples, cov);
  CHECK(s1 > 10.0);
  CHECK(s1 < 40.0);
}

TEST_CASE("gamma tuning solves the overlap equation") {
  const double g = tune_gamma(3072);
  CHECK(g > 1.035);
  CHECK(g < 1.045);
  CHECK(std::abs(sigma_overlap(g, 3072) - 0.5) < 1e-9);
  // the rounded operating point gives a slightly larger overlap
  CHECK(sigma_overlap(1.0376, 3072) == doctest::Approx(0.56575).epsilon(1e-3));
  // overlap targets near the gamma -> 1 supremum of 2 Phi(3) - 1 force the
  // ratio towards 1
  CHECK(tune_gamma(3072, 0.99) < 1.01);
  CHECK(tune_gamma(3072, 0.99) > 1.0);
  CHECK_THROWS(tune_gamma(3072, 0.9999));  // beyond the reachable overlap
  CHECK_THROWS(tune_gamma(0));
  CHECK_THROWS(tune_gamma(3072, 1.5));
}

TEST_CASE("scale count from ladder endpoints") {
  CHECK(tune_num_scales(20.0, 0.01, 1.0376) == 207);
  CHECK(tune_num_scales(50.0, 0.01, 1.0376) == 232);
  CHECK(tune_num_scales(3.0, 3.0, 1.1) == 1);
  CHECK(tune_num_scales(3.0 * 1.1, 3.0, 1.1) == 2);
  CHECK_THROWS(tune_num_scales(0.01, 20.0, 1.0376));
  CHECK_THROWS(tune_num_scales(20.0, 0.01, 0.9));
}

TEST_CASE("langevin terminal variance ratio") {
  const IdentityCovariance id;
  SUBCASE("no langevin steps leaves the gamma^2 inflation") {
    const auto tv = langevin_terminal_variance(1.0376, 0.0, 0.01, 5, id);
    CHECK(tv.per_mode.size() == 1);
    CHECK(tv.per_mode[0] == doctest::Approx(1.0376 * 1.0376).epsilon(1e-14));
  }
  SUBCASE("reference step constant lands near 1.05") {
    const auto tv = langevin_terminal_variance(1.0376, 6.2e-6, 0.01, 5, id);
    CHECK(tv.per_mode[0] == doctest::Approx(1.0555).epsilon(1e-3));
  }
  SUBCASE("divergent steps are rejected") {
    CHECK_THROWS(langevin_terminal_variance(1.0376, 1.1e-4, 0.01, 5, id));
  }
  SUBCASE("spectral covariances give one ratio per mode") {
    const auto cov = SpectralCovariance::build(8, 1.0);
    const auto tv = langevin_terminal_variance(1.0376, 1e-7, 0.01, 5, cov);
    CHECK(tv.per_mode.size() == 64);
    CHECK(tv.min() > 0.0);
    CHECK(tv.max() >= tv.mean());
  }
}

TEST_CASE("langevin eps tuning") {
  const IdentityCovariance id;
  const double e5 = tune_langevin_eps(1.0376, 0.01, 5, id);
  CHECK(e5 > 5e-6);
  CHECK(e5 < 8e-6);
  const double e1 = tune_langevin_eps(1.0376, 0.01, 1, id);
  CHECK(e1 > e5);  // fewer steps need bigger steps
}
