#pragma once

#include <span>
#include <vector>

#include "ddkl/covariance.hpp"
#include "ddkl/schedules.hpp"

namespace ddkl {

// Variance-preserving process: x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) sqrt(Sigma) eps.
// An identity covariance recovers the isotropic formulas through the same code path.
struct VPProcess {
  DiscreteVPSchedule schedule;
  CovPtr cov = identity_cov();
  int levels() const { return schedule.length(); }
};

// Variance-exploding process: x_i = x0 + sigma_i sqrt(Sigma) eps.
struct VEProcess {
  GeometricVESchedule schedule;
  CovPtr cov = identity_cov();
  int levels() const { return schedule.length(); }
};

struct PosteriorParams {
  std::vector<double> mu_tilde;
  double beta_tilde = 0.0;
};

struct PosteriorCoeffs {
  double coef_x0 = 0.0;
  double coef_xt = 0.0;
  double beta_tilde = 0.0;
};

// mu_tilde = coef_x0 * x0 + coef_xt * x_t for one reverse step with the given
// (beta_t, abar_{t-1}, abar_t) triple.
PosteriorCoeffs posterior_coeffs(double beta_t, double abar_prev, double abar_t);

std::vector<double> forward_marginal(const VPProcess& p, std::span<const double> x0,
                                     int t, std::span<const double> eps);
std::vector<double> forward_marginal(const VEProcess& p, std::span<const double> x0,
                                     int i, std::span<const double> eps);

std::vector<double> forward_transition(const VPProcess& p, std::span<const double> x_prev,
                                       int t, std::span<const double> noise);
std::vector<double> forward_transition(const VEProcess& p, std::span<const double> x_prev,
                                       int i, std::span<const double> noise);

// Gradient of the log noised marginal at x_t given x0.
std::vector<double> score(const VPProcess& p, std::span<const double> x_t,
                          std::span<const double> x0, int t);
std::vector<double> score(const VEProcess& p, std::span<const double> x_i,
                          std::span<const double> x0, int i);

std::vector<double> x0_estimate(const VPProcess& p, std::span<const double> x_t,
                                std::span<const double> eps_hat, int t);

// Reverse posterior q(x_{t-1} | x_t, x0), long form. t = 1 returns x0 with
// zero variance.
PosteriorParams posterior(const VPProcess& p, std::span<const double> x_t,
                          std::span<const double> x0, int t);

// Simplified posterior mean (1/sqrt(1-beta))(x_t - beta/sqrt(1-abar) sqrt(Sigma) eps).
std::vector<double> posterior_mean_from_eps(const VPProcess& p, std::span<const double> x_t,
                                            std::span<const double> eps_hat, int t);

// Expected denoised sample.
std::vector<double> eds_from_eps(const VPProcess& p, std::span<const double> x_t,
                                 std::span<const double> eps_hat, int t);
std::vector<double> eds_from_score(const VPProcess& p, std::span<const double> x_t,
                                   std::span<const double> s, int t);
std::vector<double> eds_from_eps(const VEProcess& p, std::span<const double> x_i,
                                 std::span<const double> eps_hat, int i);
std::vector<double> eds_from_score(const VEProcess& p, std::span<const double> x_i,
                                   std::span<const double> s, int i);

enum class SdeKind { VP, VE, NIVP, NIVE };

// Closed-form marginal of the continuous process at time t in [0,1]:
// x(t) ~ N(mean_coeff * x(0), variance * (Sigma or I)).
struct SdeMarginal {
  double mean_coeff = 1.0;
  double variance = 0.0;
  bool sigma_shaped = false;
};

SdeMarginal sde_marginal(SdeKind kind, const ContinuousVPSchedule& s, double t);
SdeMarginal sde_marginal(SdeKind kind, double sigma_min, double sigma_max, double t);

// Harmonic mean of the sigma ladder and the scalar factor sigma_H / sigma_i^2
// that corrects conditional scores derived from an unconditional model.
struct ScoreCorrection {
  double sigma_h = 0.0;
  std::vector<double> factors;  // per level, 1-based via factor(i)
  double factor(int i) const { return factors.at(i - 1); }
};

ScoreCorrection smld_uncond_score_correction(const GeometricVESchedule& s);

// Corrected conditional score (sigma_H / sigma_i^2) sqrt(Sigma^-1) s_uncond.
std::vector<double> corrected_conditional_score(const VEProcess& p,
                                                std::span<const double> s_uncond, int i);

}  // namespace ddkl
