#include "ddkl/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace ddkl {

namespace {

using Vec = std::vector<double>;

void check_sizes(size_t a, size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": size mismatch");
}

Vec combine(std::span<const double> a, double ca, std::span<const double> b, double cb) {
  Vec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = ca * a[i] + cb * b[i];
  return out;
}

int checked_t(int t, int L, const char* what) {
  if (t < 1 || t > L) throw std::out_of_range(std::string(what) + ": index out of range");
  return t;
}

}  // namespace

PosteriorCoeffs posterior_coeffs(double beta_t, double abar_prev, double abar_t) {
  PosteriorCoeffs c;
  c.coef_x0 = std::sqrt(abar_prev) * beta_t / (1.0 - abar_t);
  c.coef_xt = std::sqrt(1.0 - beta_t) * (1.0 - abar_prev) / (1.0 - abar_t);
  c.beta_tilde = (1.0 - abar_prev) / (1.0 - abar_t) * beta_t;
  return c;
}

std::vector<double> forward_marginal(const VPProcess& p, std::span<const double> x0,
                                     int t, std::span<const double> eps) {
  checked_t(t, p.levels(), "forward_marginal");
  check_sizes(x0.size(), eps.size(), "forward_marginal");
  const double ab = p.schedule.alpha_bar(t);
  const Vec colored = p.cov->sqrt_sigma(eps);
  return combine(x0, std::sqrt(ab), colored, std::sqrt(1.0 - ab));
}

std::vector<double> forward_marginal(const VEProcess& p, std::span<const double> x0,
                                     int i, std::span<const double> eps) {
  checked_t(i, p.levels(), "forward_marginal");
  check_sizes(x0.size(), eps.size(), "forward_marginal");
  const Vec colored = p.cov->sqrt_sigma(eps);
  return combine(x0, 1.0, colored, p.schedule.sigma(i));
}

std::vector<double> forward_transition(const VPProcess& p, std::span<const double> x_prev,
                                       int t, std::span<const double> noise) {
  checked_t(t, p.levels(), "forward_transition");
  check_sizes(x_prev.size(), noise.size(), "forward_transition");
  const double b = p.schedule.beta(t);
  const Vec colored = p.cov->sqrt_sigma(noise);
  return combine(x_prev, std::sqrt(1.0 - b), colored, std::sqrt(b));
}

std::vector<double> forward_transition(const VEProcess& p, std::span<const double> x_prev,
                                       int i, std::span<const double> noise) {
  checked_t(i, p.levels(), "forward_transition");
  check_sizes(x_prev.size(), noise.size(), "forward_transition");
  const double s_prev = (i == 1) ? 0.0 : p.schedule.sigma(i - 1);
  const double s_cur = p.schedule.sigma(i);
  const Vec colored = p.cov->sqrt_sigma(noise);
  return combine(x_prev, 1.0, colored, std::sqrt(s_cur * s_cur - s_prev * s_prev));
}

std::vector<double> score(const VPProcess& p, std::span<const double> x_t,
                          std::span<const double> x0, int t) {
  checked_t(t, p.levels(), "score");
  check_sizes(x_t.size(), x0.size(), "score");
  const double ab = p.schedule.alpha_bar(t);
  const Vec resid = combine(x_t, 1.0, x0, -std::sqrt(ab));
  const Vec whitened = p.cov->inv_sigma(resid);
  Vec out(whitened.size());
  for (size_t k = 0; k < out.size(); ++k) out[k] = -whitened[k] / (1.0 - ab);
  return out;
}

std::vector<double> score(const VEProcess& p, std::span<const double> x_i,
                          std::span<const double> x0, int i) {
  checked_t(i, p.levels(), "score");
  check_sizes(x_i.size(), x0.size(), "score");
  const double s2 = p.schedule.sigma(i) * p.schedule.sigma(i);
  const Vec resid = combine(x_i, 1.0, x0, -1.0);
  const Vec whitened = p.cov->inv_sigma(resid);
  Vec out(whitened.size());
  for (size_t k = 0; k < out.size(); ++k) out[k] = -whitened[k] / s2;
  return out;
}

std::vector<double> x0_estimate(const VPProcess& p, std::span<const double> x_t,
                                std::span<const double> eps_hat, int t) {
  checked_t(t, p.levels(), "x0_estimate");
  check_sizes(x_t.size(), eps_hat.size(), "x0_estimate");
  const double ab = p.schedule.alpha_bar(t);
  const Vec colored = p.cov->sqrt_sigma(eps_hat);
  return combine(x_t, 1.0 / std::sqrt(ab), colored, -std::sqrt(1.0 - ab) / std::sqrt(ab));
}

PosteriorParams posterior(const VPProcess& p, std::span<const double> x_t,
                          std::span<const double> x0, int t) {
  checked_t(t, p.levels(), "posterior");
  check_sizes(x_t.size(), x0.size(), "posterior");
  PosteriorParams out;
  if (t == 1) {
    // q(x_0 | x_1, x0) degenerates; 1 - abar_0 = 0 in the general formula
    out.mu_tilde.assign(x0.begin(), x0.end());
    out.beta_tilde = 0.0;
    return out;
  }
  const PosteriorCoeffs c = posterior_coeffs(p.schedule.beta(t), p.schedule.alpha_bar(t - 1),
                                             p.schedule.alpha_bar(t));
  out.mu_tilde = combine(x0, c.coef_x0, x_t, c.coef_xt);
  out.beta_tilde = c.beta_tilde;
  return out;
}

std::vector<double> posterior_mean_from_eps(const VPProcess& p, std::span<const double> x_t,
                                            std::span<const double> eps_hat, int t) {
  checked_t(t, p.levels(), "posterior_mean_from_eps");
  check_sizes(x_t.size(), eps_hat.size(), "posterior_mean_from_eps");
  if (t == 1) return x0_estimate(p, x_t, eps_hat, t);
  const double b = p.schedule.beta(t);
  const double ab = p.schedule.alpha_bar(t);
  const Vec colored = p.cov->sqrt_sigma(eps_hat);
  const double inv = 1.0 / std::sqrt(1.0 - b);
  return combine(x_t, inv, colored, -inv * b / std::sqrt(1.0 - ab));
}

std::vector<double> eds_from_eps(const VPProcess& p, std::span<const double> x_t,
                                 std::span<const double> eps_hat, int t) {
  checked_t(t, p.levels(), "eds_from_eps");
  const double ab = p.schedule.alpha_bar(t);
  const Vec colored = p.cov->sqrt_sigma(eps_hat);
  return combine(x_t, 1.0, colored, -std::sqrt(1.0 - ab));
}

std::vector<double> eds_from_score(const VPProcess& p, std::span<const double> x_t,
                                   std::span<const double> s, int t) {
  checked_t(t, p.levels(), "eds_from_score");
  const double ab = p.schedule.alpha_bar(t);
  const Vec colored = p.cov->sigma(s);
  return combine(x_t, 1.0, colored, 1.0 - ab);
}

std::vector<double> eds_from_eps(const VEProcess& p, std::span<const double> x_i,
                                 std::span<const double> eps_hat, int i) {
  checked_t(i, p.levels(), "eds_from_eps");
  const Vec colored = p.cov->sqrt_sigma(eps_hat);
  return combine(x_i, 1.0, colored, -p.schedule.sigma(i));
}

std::vector<double> eds_from_score(const VEProcess& p, std::span<const double> x_i,
                                   std::span<const double> s, int i) {
  checked_t(i, p.levels(), "eds_from_score");
  const double sg = p.schedule.sigma(i);
  const Vec colored = p.cov->sigma(s);
  return combine(x_i, 1.0, colored, sg * sg);
}

SdeMarginal sde_marginal(SdeKind kind, const ContinuousVPSchedule& s, double t) {
  if (kind != SdeKind::VP && kind != SdeKind::NIVP) {
    throw std::invalid_argument("sde_marginal: this overload handles VP kinds");
  }
  const double integral = beta_integral(s, t);
  SdeMarginal m;
  m.mean_coeff = std::exp(-0.5 * integral);
  m.variance = 1.0 - std::exp(-integral);
  m.sigma_shaped = (kind == SdeKind::NIVP);
  return m;
}

SdeMarginal sde_marginal(SdeKind kind, double sigma_min, double sigma_max, double t) {
  if (kind != SdeKind::VE && kind != SdeKind::NIVE) {
    throw std::invalid_argument("sde_marginal: this overload handles VE kinds");
  }
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("sde_marginal: t outside [0,1]");
  const double sigma_t = sigma_min * std::pow(sigma_max / sigma_min, t);
  SdeMarginal m;
  m.mean_coeff = 1.0;
  m.variance = (t == 0.0) ? 0.0 : sigma_t * sigma_t;
  m.sigma_shaped = (kind == SdeKind::NIVE);
  return m;
}

ScoreCorrection smld_uncond_score_correction(const GeometricVESchedule& s) {
  if (s.sigmas.empty()) throw std::invalid_argument("score_correction: empty ladder");
  double inv_sum = 0.0;
  for (double sg : s.sigmas) inv_sum += 1.0 / sg;
  ScoreCorrection c;
  c.sigma_h = static_cast<double>(s.sigmas.size()) / inv_sum;
  c.factors.resize(s.sigmas.size());
  for (size_t i = 0; i < s.sigmas.size(); ++i) {
    c.factors[i] = c.sigma_h / (s.sigmas[i] * s.sigmas[i]);
  }
  return c;
}

std::vector<double> corrected_conditional_score(const VEProcess& p,
                                                std::span<const double> s_uncond, int i) {
  checked_t(i, p.levels(), "corrected_conditional_score");
  const ScoreCorrection c = smld_uncond_score_correction(p.schedule);
  Vec out = p.cov->inv_sqrt_sigma(s_uncond);
  const double f = c.factor(i);
  for (double& v : out) v *= f;
  return out;
}

}  // namespace ddkl
