#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ddkl/samplers.hpp"

using namespace ddkl;
using Vec = std::vector<double>;

TEST_CASE("substep construction") {
  const auto full = make_substeps(10, 10);
  CHECK(full == std::vector<int>{10, 9, 8, 7, 6, 5, 4, 3, 2, 1});

  const auto sub = make_substeps(1000, 100);
  CHECK(sub.size() == 101);
  CHECK(sub.front() == 1000);
  CHECK(sub[1] == 990);
  CHECK(sub[99] == 10);
  CHECK(sub.back() == 1);

  const auto two = make_substeps(1000, 1);
  CHECK(two == std::vector<int>{1000, 1});
  CHECK_THROWS(make_substeps(0, 1));
}

TEST_CASE("ddim step hand values") {
  // abar = [0.8, 0.5]
  const VPProcess p{DiscreteVPSchedule::from_betas({0.2, 0.375}), identity_cov()};
  REQUIRE(p.schedule.alpha_bar(1) == doctest::Approx(0.8).epsilon(1e-15));
  REQUIRE(p.schedule.alpha_bar(2) == doctest::Approx(0.5).epsilon(1e-15));

  const Vec x0 = {1.0}, eps = {1.0};
  const Vec x2 = forward_marginal(p, x0, 2, eps);
  REQUIRE(x2[0] == doctest::Approx(std::sqrt(0.5) + std::sqrt(0.5)).epsilon(1e-14));

  SUBCASE("deterministic update matches the forward marginal") {
    const Vec x1 = ddim_step(p, x2, eps, 2, 1);
    CHECK(x1[0] == doctest::Approx(std::sqrt(0.8) + std::sqrt(0.2)).epsilon(1e-12));
    CHECK(x1[0] == doctest::Approx(1.34164).epsilon(1e-5));
    const Vec want = forward_marginal(p, x0, 1, eps);
    CHECK(x1[0] == doctest::Approx(want[0]).epsilon(1e-14));
  }
  SUBCASE("zero predictor contracts towards the scaled estimate") {
    const Vec x1 = ddim_step(p, x2, Vec{0.0}, 2, 1);
    const Vec xh = x0_estimate(p, x2, Vec{0.0}, 2);
    CHECK(x1[0] == doctest::Approx(std::sqrt(0.8) * xh[0]).epsilon(1e-14));
  }
  SUBCASE("equal indices collapse to the identity") {
    const Vec same = ddim_step(p, x2, eps, 2, 2);
    CHECK(same[0] == doctest::Approx(x2[0]).epsilon(1e-12));
  }
  SUBCASE("t_prev = 0 denoises fully") {
    const Vec x_end = ddim_step(p, x2, eps, 2, 0);
    CHECK(x_end[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("ancestral step") {
  const auto sched = make_linear_beta(10, 0.02, 0.2);
  const VPProcess p{sched, identity_cov()};
  Rng rng(13);
  const Vec x0 = {0.6}, eps = {rng.normal()};
  const int t = 7;
  const Vec x_t = forward_marginal(p, x0, t, eps);
  const Vec zero = {0.0};

  SUBCASE("zero injected noise lands on the posterior mean") {
    const Vec got = ancestral_step(p, x_t, eps, t, false, zero);
    const Vec xh = x0_estimate(p, x_t, eps, t);
    const auto post = posterior(p, x_t, xh, t);
    CHECK(got[0] == doctest::Approx(post.mu_tilde[0]).epsilon(1e-12));
  }
  SUBCASE("variants share the mean and differ only in noise scale") {
    const Vec a = ancestral_step(p, x_t, eps, t, false, zero);
    const Vec b = ancestral_step(p, x_t, eps, t, true, zero);
    CHECK(a[0] == b[0]);
    const Vec z = {1.0};
    const Vec an = ancestral_step(p, x_t, eps, t, false, z);
    const Vec bn = ancestral_step(p, x_t, eps, t, true, z);
    CHECK(an[0] - a[0] == doctest::Approx(std::sqrt(sched.beta_tilde(t))).epsilon(1e-12));
    CHECK(bn[0] - b[0] == doctest::Approx(std::sqrt(sched.beta(t - 1))).epsilon(1e-12));
  }
  SUBCASE("terminal step returns the x0 estimate") {
    const Vec x1 = forward_marginal(p, x0, 1, eps);
    const Vec got = ancestral_step(p, x1, eps, 1, false, zero);
    CHECK(got[0] == doctest::Approx(x0[0]).epsilon(1e-10));
  }
  SUBCASE("bad indices are rejected") {
    CHECK_THROWS(ancestral_step(p, x_t, eps, 11, false, zero));
    CHECK_THROWS(ancestral_step_between(p, x_t, eps, 5, 6, false, zero));
  }
}

TEST_CASE("annealed langevin") {
  const VEProcess p{make_geometric_sigma(0.1, 1.0, 10), identity_cov()};
  SUBCASE("zero step constant freezes the state inside levels") {
    Rng r1(5), r2(5);
    const auto moved = annealed_langevin(
        p, [](const Vec& x, int) { return Vec{-x[0]}; }, 3, 0.0, 1, r1);
    Vec z = {r2.normal()};
    CHECK(moved.x[0] == p.schedule.sigma_max() * z[0]);
  }
  SUBCASE("gaussian oracle reaches the finest-level marginal variance") {
    // data N(0, s^2); the score of the level-i marginal is -x / (s^2 + sigma_i^2)
    const VEProcess q{make_geometric_sigma(0.1, 1.0, 30), identity_cov()};
    const double s2 = 0.04;
    const ScoreFn oracle = [&](const Vec& x, int i) {
      const double sg = q.schedule.sigma(i);
      return Vec{-x[0] / (s2 + sg * sg)};
    };
    const double eps = 1e-3;
    const int chains = 10000, M = 200;
    double acc = 0.0;
    for (int c = 0; c < chains; ++c) {
      Rng rng(derive_seed(77, static_cast<uint64_t>(c)));
      const auto res = annealed_langevin(q, oracle, M, eps, 1, rng);
      acc += res.x[0] * res.x[0];
    }
    const double target = s2 + q.schedule.sigma_min() * q.schedule.sigma_min();
    CHECK(std::abs(acc / chains / target - 1.0) < 0.05);
  }
  SUBCASE("single level reaches the linear-langevin stationary variance") {
    GeometricVESchedule one;
    one.sigmas = {1.0};
    one.gamma = 1.0;
    const VEProcess q{one, identity_cov()};
    const double alpha = 0.05;
    const double pfac = 1.0 - alpha;
    const double stationary = 2.0 * alpha / (1.0 - pfac * pfac);
    const ScoreFn oracle = [](const Vec& x, int) { return Vec{-x[0]}; };
    const int chains = 20000, M = 400;
    double acc = 0.0;
    for (int c = 0; c < chains; ++c) {
      Rng rng(derive_seed(99, static_cast<uint64_t>(c)));
      const auto res = annealed_langevin(q, oracle, M, alpha, 1, rng);
      acc += res.x[0] * res.x[0];
    }
    CHECK(std::abs(acc / chains / stationary - 1.0) < 0.05);
  }
  SUBCASE("non-finite scores abort with level and step") {
    const ScoreFn bad = [](const Vec&, int) {
      return Vec{std::numeric_limits<double>::infinity()};
    };
    Rng rng(1);
    CHECK_THROWS_AS(annealed_langevin(p, bad, 2, 1e-3, 1, rng), std::runtime_error);
  }
}

TEST_CASE("consistent annealed sampling") {
  SUBCASE("hand beta value") {
    // gamma = 1.0376, eps/sigma_min^2 = 0.062:
    // beta = sqrt(1 - 1.0376^2 * 0.938^2) = 0.2296689
    const double g = 1.0376, u = 0.062;
    const double beta = std::sqrt(1.0 - g * g * (1.0 - u) * (1.0 - u));
    CHECK(beta == doctest::Approx(0.2296689).epsilon(1e-6));
  }
  SUBCASE("overly large steps are rejected") {
    const VEProcess p{make_geometric_sigma(0.1, 1.0, 4), identity_cov()};
    Rng rng(2);
    const ScoreFn s = [](const Vec& x, int) { return Vec{-x[0]}; };
    CHECK_THROWS(consistent_annealed(p, s, 0.011, 1, rng));  // eps/sigma_min^2 > 1
  }
  SUBCASE("imaginary beta is rejected, not clamped") {
    GeometricVESchedule wide;
    wide.sigmas = {0.1, 0.2, 0.4};
    wide.gamma = 2.0;
    const VEProcess p{wide, identity_cov()};
    Rng rng(2);
    const ScoreFn s = [](const Vec& x, int) { return Vec{-x[0]}; };
    CHECK_THROWS(consistent_annealed(p, s, 1e-5, 1, rng));  // gamma^2 (1-u)^2 > 1
  }
  SUBCASE("gaussian oracle terminal variance") {
    const VEProcess p{make_geometric_sigma(0.1, 1.0, 120), identity_cov()};
    const double s2 = 0.01;
    const ScoreFn oracle = [&](const Vec& x, int i) {
      const double sg = p.schedule.sigma(i);
      return Vec{-x[0] / (s2 + sg * sg)};
    };
    const double eps = 0.02 * 0.1 * 0.1;
    const int chains = 40000;
    double acc = 0.0;
    for (int c = 0; c < chains; ++c) {
      Rng rng(derive_seed(55, static_cast<uint64_t>(c)));
      const auto res = consistent_annealed(p, oracle, eps, 1, rng, true);
      // inspect the level-1 state, before the final pure-drift update
      const Vec& at_min = res.per_level[res.per_level.size() - 2];
      acc += at_min[0] * at_min[0];
    }
    const double target = s2 + p.schedule.sigma_min() * p.schedule.sigma_min();
    CHECK(std::abs(acc / chains / target - 1.0) < 0.05);
  }
}

TEST_CASE("full chains are seed-deterministic") {
  const auto sched = make_linear_beta(100, 1e-3, 0.1);
  const VPProcess p{sched, identity_cov()};
  const EpsFn eps = [](const Vec& x, int) {
    Vec e(x.size());
    for (size_t i = 0; i < x.size(); ++i) e[i] = 0.2 * x[i];
    return e;
  };
  for (SamplerKind kind :
       {SamplerKind::Ddim, SamplerKind::AncestralTilde, SamplerKind::AncestralBeta}) {
    SamplerSpec spec;
    spec.kind = kind;
    spec.steps = make_substeps(100, 25);
    Rng r1(9), r2(9), r3(10);
    const Vec a = sample_chain(p, spec, eps, 3, r1).x;
    const Vec b = sample_chain(p, spec, eps, 3, r2).x;
    const Vec c = sample_chain(p, spec, eps, 3, r3).x;
    CHECK(a == b);
    CHECK(a != c);
  }
}

TEST_CASE("chain rejects malformed step lists") {
  const VPProcess p{make_linear_beta(10, 0.01, 0.1), identity_cov()};
  const EpsFn eps = [](const Vec& x, int) { return Vec(x.size(), 0.0); };
  Rng rng(1);
  SamplerSpec spec;
  spec.kind = SamplerKind::Ddim;
  spec.steps = {10, 5};  // must end at 1
  CHECK_THROWS(sample_chain(p, spec, eps, 1, rng));
  spec.steps = {10, 10, 1};
  CHECK_THROWS(sample_chain(p, spec, eps, 1, rng));
}

TEST_CASE("blockwise autoregression") {
  const auto sched = make_linear_beta(50, 1e-3, 0.1);
  const VPProcess p{sched, identity_cov()};
  const int frame_dim = 4, pf = 2, kf = 2, ff = 1;

  // denoiser stub whose output depends on the conditioning
  const CondEpsFn eps = [&](const Vec& noisy, const Vec& past, const Vec&, double m_p,
                            double, int) {
    Vec e(noisy.size(), 0.0);
    for (size_t i = 0; i < e.size(); ++i) {
      e[i] = 0.1 * noisy[i] + 0.05 * m_p * past[i % past.size()];
    }
    return e;
  };
  SamplerSpec spec;
  spec.kind = SamplerKind::Ddim;
  spec.steps = make_substeps(50, 10);
  spec.seed = 123;

  Vec past(pf * frame_dim, 0.3);

  SUBCASE("single block produces k frames") {
    const Vec out = blockwise_autoregressive(p, spec, eps, past, pf, kf, ff, frame_dim, 1);
    CHECK(out.size() == static_cast<size_t>(kf * frame_dim));
  }
  SUBCASE("fixed seeds reproduce the whole sequence") {
    const Vec a = blockwise_autoregressive(p, spec, eps, past, pf, kf, ff, frame_dim, 4);
    const Vec b = blockwise_autoregressive(p, spec, eps, past, pf, kf, ff, frame_dim, 4);
    CHECK(a == b);
    CHECK(a.size() == static_cast<size_t>(4 * kf * frame_dim));
    SamplerSpec other = spec;
    other.seed = 124;
    const Vec c = blockwise_autoregressive(p, spec, eps, past, pf, kf, ff, frame_dim, 4);
    const Vec d = blockwise_autoregressive(p, other, eps, past, pf, kf, ff, frame_dim, 4);
    CHECK(c != d);
  }
  SUBCASE("masked conditioning makes blocks independent of the past") {
    Vec other_past(pf * frame_dim, -5.0);
    const Vec a =
        blockwise_autoregressive(p, spec, eps, past, pf, kf, ff, frame_dim, 3, 0.0, 0.0);
    const Vec b = blockwise_autoregressive(p, spec, eps, other_past, pf, kf, ff, frame_dim,
                                           3, 0.0, 0.0);
    CHECK(a == b);
  }
  SUBCASE("short history is rejected") {
    Vec tiny(frame_dim, 0.0);
    CHECK_THROWS(blockwise_autoregressive(p, spec, eps, tiny, pf, kf, ff, frame_dim, 1));
  }
}
