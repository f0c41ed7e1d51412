#include "ddkl/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ddkl/parallel.hpp"
#include "ddkl/rng.hpp"

namespace ddkl {

double DiscreteVPSchedule::beta(int t) const {
  if (t < 1 || t > length()) throw std::out_of_range("beta: t out of range");
  return betas[t - 1];
}

double DiscreteVPSchedule::alpha_bar(int t) const {
  if (t == 0) return 1.0;
  if (t < 0 || t > length()) throw std::out_of_range("alpha_bar: t out of range");
  return alpha_bars[t - 1];
}

double DiscreteVPSchedule::beta_tilde(int t) const {
  if (t < 1 || t > length()) throw std::out_of_range("beta_tilde: t out of range");
  if (t == 1) return 0.0;
  return (1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t)) * beta(t);
}

DiscreteVPSchedule DiscreteVPSchedule::from_betas(std::vector<double> betas) {
  if (betas.empty()) throw std::invalid_argument("schedule: empty beta vector");
  for (size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0 && betas[i] < 1.0)) {
      throw std::invalid_argument("schedule: beta outside (0,1)");
    }
    if (i > 0 && !(betas[i] > betas[i - 1])) {
      throw std::invalid_argument("schedule: betas not strictly increasing");
    }
  }
  DiscreteVPSchedule s;
  s.betas = std::move(betas);
  s.alpha_bars.resize(s.betas.size());
  double prod = 1.0;
  for (size_t i = 0; i < s.betas.size(); ++i) {
    prod *= 1.0 - s.betas[i];
    s.alpha_bars[i] = prod;
  }
  return s;
}

DiscreteVPSchedule make_linear_beta(int L, double beta_1, double beta_L) {
  if (L < 1) throw std::invalid_argument("make_linear_beta: L must be >= 1");
  if (!(0.0 < beta_1 && beta_1 <= beta_L && beta_L < 1.0)) {
    throw std::invalid_argument("make_linear_beta: need 0 < beta_1 <= beta_L < 1");
  }
  if (L > 1 && beta_1 == beta_L) {
    throw std::invalid_argument("make_linear_beta: equal endpoints need L = 1");
  }
  std::vector<double> betas(L);
  for (int i = 0; i < L; ++i) {
    const double w = (L == 1) ? 0.0 : static_cast<double>(i) / (L - 1);
    betas[i] = beta_1 + w * (beta_L - beta_1);
  }
  return DiscreteVPSchedule::from_betas(std::move(betas));
}

double beta_integral(const ContinuousVPSchedule& s, double t) {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("beta_integral: t outside [0,1]");
  return t * s.beta_min + 0.5 * t * t * (s.beta_max - s.beta_min);
}

double GeometricVESchedule::sigma(int i) const {
  if (i < 1 || i > length()) throw std::out_of_range("sigma: index out of range");
  return sigmas[i - 1];
}

GeometricVESchedule make_geometric_sigma(double sigma_min, double sigma_max, int L) {
  if (!(sigma_min > 0.0 && sigma_min < sigma_max)) {
    throw std::invalid_argument("make_geometric_sigma: need 0 < sigma_min < sigma_max");
  }
  if (L < 2) throw std::invalid_argument("make_geometric_sigma: L must be >= 2");
  GeometricVESchedule s;
  s.gamma = std::pow(sigma_max / sigma_min, 1.0 / (L - 1));
  s.sigmas.resize(L);
  for (int i = 0; i < L; ++i) s.sigmas[i] = sigma_min * std::pow(s.gamma, i);
  s.sigmas.back() = sigma_max;  // pin the endpoint exactly
  return s;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

double whitened_distance2(const std::vector<double>& a, const std::vector<double>& b,
                          const CovarianceOperator& cov) {
  std::vector<double> diff(a.size());
  for (size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - b[k];
  if (!cov.is_identity()) diff = cov.inv_sqrt_sigma(diff);
  double d2 = 0.0;
  for (double v : diff) d2 += v * v;
  return d2;
}

}  // namespace

double tune_sigma1(const std::vector<std::vector<double>>& samples,
                   const CovarianceOperator& cov, uint64_t seed) {
  const size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("tune_sigma1: need at least 2 samples");
  for (const auto& s : samples) {
    if (s.size() != samples[0].size()) {
      throw std::invalid_argument("tune_sigma1: dimension mismatch");
    }
  }
  double best = 0.0;
  if (n <= 2000) {
#ifdef _OPENMP
#pragma omp parallel for reduction(max : best) num_threads(thread_cap()) schedule(dynamic)
#endif
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        best = std::max(best, whitened_distance2(samples[i], samples[j], cov));
      }
    }
  } else {
    const size_t pairs = 2'000'000;
    Rng rng(derive_seed(seed, "tune_sigma1"));
    for (size_t k = 0; k < pairs; ++k) {
      const size_t i = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(n) - 1));
      size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(n) - 2));
      if (j >= i) ++j;
      best = std::max(best, whitened_distance2(samples[i], samples[j], cov));
    }
  }
  return std::sqrt(best);
}

double sigma_overlap(double gamma, int D) {
  const double a = std::sqrt(2.0 * D) * (gamma - 1.0);
  return normal_cdf(a + 3.0 * gamma) - normal_cdf(a - 3.0 * gamma);
}

double tune_gamma(int D, double target) {
  if (D < 1) throw std::invalid_argument("tune_gamma: D must be >= 1");
  if (!(target > 0.0 && target < 1.0)) {
    throw std::invalid_argument("tune_gamma: target outside (0,1)");
  }
  double lo = 1.0 + 1e-6, hi = 2.0;
  if (sigma_overlap(lo, D) < target || sigma_overlap(hi, D) > target) {
    throw std::runtime_error("tune_gamma: no sign change in bracket");
  }
  // overlap is strictly decreasing in gamma
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (sigma_overlap(mid, D) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

int tune_num_scales(double sigma1, double sigmaL, double gamma) {
  if (!(sigma1 >= sigmaL && sigmaL > 0.0)) {
    throw std::invalid_argument("tune_num_scales: need sigma1 >= sigmaL > 0");
  }
  if (!(gamma > 1.0)) throw std::invalid_argument("tune_num_scales: gamma must be > 1");
  return static_cast<int>(std::lround(1.0 + std::log(sigma1 / sigmaL) / std::log(gamma)));
}

double TerminalVariance::mean() const {
  double s = 0.0;
  for (double v : per_mode) s += v;
  return s / static_cast<double>(per_mode.size());
}
double TerminalVariance::min() const {
  return *std::min_element(per_mode.begin(), per_mode.end());
}
double TerminalVariance::max() const {
  return *std::max_element(per_mode.begin(), per_mode.end());
}

namespace {

// Var[x_T]/sigma_i^2 for one eigenmode of Sigma with eigenvalue lam:
//   gamma^2 p^{2T} lam + (2 eps/smin^2) lam sum_{t<T} p^{2t},  p = 1 - eps/(smin^2 lam)
double mode_ratio(double gamma, double u, int T, double lam) {
  const double p = 1.0 - u / lam;
  const double p2 = p * p;
  double geom = 0.0, pk = 1.0;
  for (int t = 0; t < T; ++t) {
    geom += pk;
    pk *= p2;
  }
  return gamma * gamma * pk * lam + 2.0 * u * lam * geom;
}

}  // namespace

TerminalVariance langevin_terminal_variance(double gamma, double eps, double sigma_min,
                                            int T, const CovarianceOperator& cov) {
  if (!(gamma > 1.0)) throw std::invalid_argument("terminal_variance: gamma must be > 1");
  if (eps < 0.0) throw std::invalid_argument("terminal_variance: eps must be >= 0");
  if (T < 1) throw std::invalid_argument("terminal_variance: T must be >= 1");
  const double u = eps / (sigma_min * sigma_min);
  const std::vector<double> lams = cov.spectrum();
  TerminalVariance tv;
  tv.per_mode.reserve(lams.size());
  for (double lam : lams) {
    if (u / lam >= 1.0) {
      throw std::invalid_argument("terminal_variance: divergent step (eps/sigma_min^2 >= eigenvalue)");
    }
    tv.per_mode.push_back(mode_ratio(gamma, u, T, lam));
  }
  return tv;
}

double tune_langevin_eps(double gamma, double sigma_min, int T,
                         const CovarianceOperator& cov) {
  const std::vector<double> lams = cov.spectrum();
  const double lam_min = *std::min_element(lams.begin(), lams.end());
  const double s2 = sigma_min * sigma_min;
  const auto objective = [&](double eps) {
    const double u = eps / s2;
    double sum = 0.0;
    for (double lam : lams) sum += mode_ratio(gamma, u, T, lam);
    return std::abs(sum / static_cast<double>(lams.size()) - 1.0);
  };
  // coarse log grid over stable step sizes, then golden-section refinement
  const double u_hi = 0.99 * lam_min;
  const double u_lo = 1e-9 * lam_min;
  const int grid = 600;
  int best_i = 0;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<double> us(grid);
  for (int i = 0; i < grid; ++i) {
    const double w = static_cast<double>(i) / (grid - 1);
    us[i] = u_lo * std::pow(u_hi / u_lo, w);
    const double f = objective(us[i] * s2);
    if (f < best_f) {
      best_f = f;
      best_i = i;
    }
  }
  double a = us[std::max(0, best_i - 1)];
  double b = us[std::min(grid - 1, best_i + 1)];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * b; ++it) {
    if (objective(c * s2) < objective(d * s2)) {
      b = d;
    } else {
      a = c;
    }
    c = b - gr * (b - a);
    d = a + gr * (b - a);
  }
  return 0.5 * (a + b) * s2;
}

}  // namespace ddkl
