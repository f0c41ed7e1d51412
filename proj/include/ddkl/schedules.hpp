#pragma once

#include <cstdint>
#include <vector>

#include "ddkl/covariance.hpp"

namespace ddkl {

// Discrete variance-preserving ladder: betas strictly increasing in (0,1),
// alpha_bars the running product of (1 - beta). Indices are 1-based to match
// the usual t = 1..L convention; alpha_bar(0) == 1.
struct DiscreteVPSchedule {
  std::vector<double> betas;
  std::vector<double> alpha_bars;

  int length() const { return static_cast<int>(betas.size()); }
  double beta(int t) const;
  double alpha_bar(int t) const;  // accepts t = 0
  // Posterior variance coefficient ((1 - abar_{t-1}) / (1 - abar_t)) * beta_t.
  // Zero at t = 1.
  double beta_tilde(int t) const;

  static DiscreteVPSchedule from_betas(std::vector<double> betas);
};

DiscreteVPSchedule make_linear_beta(int L, double beta_1, double beta_L);

struct ContinuousVPSchedule {
  double beta_min = 0.1;
  double beta_max = 20.0;
  double beta(double t) const { return beta_min + t * (beta_max - beta_min); }
};

// Closed form of the integral of beta over [0, t]; t must lie in [0, 1].
double beta_integral(const ContinuousVPSchedule& s, double t);

// Geometric variance-exploding ladder, index 1 = smallest sigma.
struct GeometricVESchedule {
  std::vector<double> sigmas;
  double gamma = 1.0;  // common ratio sigma_i / sigma_{i-1}

  int length() const { return static_cast<int>(sigmas.size()); }
  double sigma(int i) const;  // 1-based
  double sigma_min() const { return sigmas.front(); }
  double sigma_max() const { return sigmas.back(); }
};

GeometricVESchedule make_geometric_sigma(double sigma_min, double sigma_max, int L);

struct LangevinConfig {
  double eps = 0.0;
  int T = 1;
};

// Standard normal CDF via the complementary error function.
double normal_cdf(double x);

// Largest whitened pairwise distance over the sample set. Exact over all
// pairs up to 2000 samples, random-pair subsample above (seeded).
double tune_sigma1(const std::vector<std::vector<double>>& samples,
                   const CovarianceOperator& cov, uint64_t seed = 0);

// Root of Phi(sqrt(2D)(g-1) + 3g) - Phi(sqrt(2D)(g-1) - 3g) = target on
// g in (1, 2); the expression is strictly decreasing in g.
double tune_gamma(int D, double target = 0.5);

// Evaluates the overlap expression above at a given gamma.
double sigma_overlap(double gamma, int D);

// L = round(1 + ln(sigma1/sigmaL) / ln gamma).
int tune_num_scales(double sigma1, double sigmaL, double gamma);

// Var[x_T] / sigma_i^2 after T Langevin updates at one noise level, in the
// eigenbasis of Sigma. Isotropic covariances yield a single mode.
struct TerminalVariance {
  std::vector<double> per_mode;
  double mean() const;
  double min() const;
  double max() const;
};

TerminalVariance langevin_terminal_variance(double gamma, double eps, double sigma_min,
                                            int T, const CovarianceOperator& cov);

// Step constant that brings the eigenmode-mean terminal-variance ratio
// closest to 1.
double tune_langevin_eps(double gamma, double sigma_min, int T,
                         const CovarianceOperator& cov);

}  // namespace ddkl
