#include "ddkl/samplers.hpp"

#include <cmath>
#include <stdexcept>

namespace ddkl {

namespace {
using Vec = std::vector<double>;

Vec scaled_colored(const CovarianceOperator& cov, std::span<const double> z, double scale) {
  Vec out = cov.sqrt_sigma(z);
  for (double& v : out) v *= scale;
  return out;
}

void check_finite(const Vec& x, const std::string& where) {
  for (double v : x) {
    if (!std::isfinite(v)) throw std::runtime_error("sampler: non-finite state at " + where);
  }
}
}  // namespace

std::vector<int> make_substeps(int L, int n) {
  if (L < 1 || n < 1) throw std::invalid_argument("make_substeps: L and n must be >= 1");
  std::vector<int> steps;
  if (n >= L) {
    for (int t = L; t >= 1; --t) steps.push_back(t);
    return steps;
  }
  const int stride = L / n;
  for (int k = 0; k < n; ++k) steps.push_back(L - k * stride);
  if (steps.back() != 1) steps.push_back(1);
  return steps;
}

std::vector<double> ancestral_step(const VPProcess& p, std::span<const double> x_t,
                                   std::span<const double> eps_hat, int t,
                                   bool beta_variant, std::span<const double> z) {
  return ancestral_step_between(p, x_t, eps_hat, t, t - 1, beta_variant, z);
}

std::vector<double> ancestral_step_between(const VPProcess& p, std::span<const double> x_t,
                                           std::span<const double> eps_hat, int t,
                                           int t_prev, bool beta_variant,
                                           std::span<const double> z) {
  if (t < 1 || t > p.levels() || t_prev < 0 || t_prev >= t) {
    throw std::out_of_range("ancestral_step: bad index pair");
  }
  const Vec xhat0 = x0_estimate(p, x_t, eps_hat, t);
  if (t_prev == 0) return xhat0;  // terminal step, deterministic

  const double ab_t = p.schedule.alpha_bar(t);
  const double ab_prev = p.schedule.alpha_bar(t_prev);
  const double beta_eff = 1.0 - ab_t / ab_prev;
  const PosteriorCoeffs c = posterior_coeffs(beta_eff, ab_prev, ab_t);
  Vec out(x_t.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = c.coef_x0 * xhat0[i] + c.coef_xt * x_t[i];
  }
  const double var = beta_variant ? p.schedule.beta(t_prev) : c.beta_tilde;
  if (var > 0.0) {
    const Vec noise = scaled_colored(*p.cov, z, std::sqrt(var));
    for (size_t i = 0; i < out.size(); ++i) out[i] += noise[i];
  }
  return out;
}

std::vector<double> ddim_step(const VPProcess& p, std::span<const double> x_t,
                              std::span<const double> eps_hat, int t, int t_prev) {
  if (t < 1 || t > p.levels() || t_prev < 0 || t_prev > t) {
    throw std::out_of_range("ddim_step: bad index pair");
  }
  const Vec xhat0 = x0_estimate(p, x_t, eps_hat, t);
  if (t_prev == 0) return xhat0;
  const double ab_prev = p.schedule.alpha_bar(t_prev);
  const Vec colored = p.cov->sqrt_sigma(eps_hat);
  Vec out(x_t.size());
  const double a = std::sqrt(ab_prev), b = std::sqrt(1.0 - ab_prev);
  for (size_t i = 0; i < out.size(); ++i) out[i] = a * xhat0[i] + b * colored[i];
  return out;
}

ChainResult sample_chain(const VPProcess& p, const SamplerSpec& spec, const EpsFn& eps,
                         int dim, Rng& rng, bool record) {
  if (spec.steps.empty() || spec.steps.front() != p.levels() || spec.steps.back() != 1) {
    throw std::invalid_argument("sample_chain: steps must run from L down to 1");
  }
  for (size_t j = 1; j < spec.steps.size(); ++j) {
    if (spec.steps[j] >= spec.steps[j - 1]) {
      throw std::invalid_argument("sample_chain: steps must be strictly decreasing");
    }
  }
  Vec z(dim);
  rng.fill_normal(z);
  const double ab_L = p.schedule.alpha_bar(p.levels());
  Vec x = scaled_colored(*p.cov, z, std::sqrt(1.0 - ab_L));

  ChainResult res;
  if (record) res.visited.push_back(x);
  for (size_t j = 0; j + 1 < spec.steps.size(); ++j) {
    const int t = spec.steps[j], t_prev = spec.steps[j + 1];
    const Vec e = eps(x, t);
    switch (spec.kind) {
      case SamplerKind::Ddim:
        x = ddim_step(p, x, e, t, t_prev);
        break;
      case SamplerKind::AncestralTilde:
      case SamplerKind::AncestralBeta: {
        Vec noise(dim);
        rng.fill_normal(noise);
        x = ancestral_step_between(p, x, e, t, t_prev,
                                   spec.kind == SamplerKind::AncestralBeta, noise);
        break;
      }
      default:
        throw std::invalid_argument("sample_chain: ALS/CAS take a VE process");
    }
    check_finite(x, "t=" + std::to_string(t_prev));
    if (record) res.visited.push_back(x);
  }
  // terminal denoise at t = 1
  x = ddim_step(p, x, eps(x, 1), 1, 0);
  check_finite(x, "t=0");
  res.x = std::move(x);
  return res;
}

LangevinResult annealed_langevin(const VEProcess& p, const ScoreFn& score_fn, int M,
                                 double eps, int dim, Rng& rng, bool record) {
  if (M < 1) throw std::invalid_argument("annealed_langevin: M must be >= 1");
  if (eps < 0.0) throw std::invalid_argument("annealed_langevin: eps must be >= 0");
  const int L = p.levels();
  const double s_min = p.schedule.sigma_min();
  if (dim < 1) throw std::invalid_argument("annealed_langevin: dim must be >= 1");

  Vec z(dim);
  rng.fill_normal(z);
  Vec x = scaled_colored(*p.cov, z, p.schedule.sigma_max());

  LangevinResult res;
  for (int i = L; i >= 1; --i) {
    const double sg = p.schedule.sigma(i);
    const double alpha = eps * sg * sg / (s_min * s_min);
    for (int m = 0; m < M; ++m) {
      const Vec s = score_fn(x, i);
      Vec noise(dim);
      rng.fill_normal(noise);
      const Vec colored = scaled_colored(*p.cov, noise, std::sqrt(2.0 * alpha));
      for (int d = 0; d < dim; ++d) x[d] += alpha * s[d] + colored[d];
      for (double v : x) {
        if (!std::isfinite(v)) {
          throw std::runtime_error("annealed_langevin: non-finite state at level " +
                                   std::to_string(i) + ", step " + std::to_string(m));
        }
      }
    }
    if (record) res.per_level.push_back(x);
  }
  res.x = std::move(x);
  return res;
}

LangevinResult consistent_annealed(const VEProcess& p, const ScoreFn& score_fn, double eps,
                                   int dim, Rng& rng, bool record) {
  const double s_min = p.schedule.sigma_min();
  const double u = eps / (s_min * s_min);
  if (u >= 1.0) throw std::invalid_argument("consistent_annealed: eps/sigma_min^2 must be < 1");
  const double g = p.schedule.gamma;
  const double beta_sq = 1.0 - g * g * (1.0 - u) * (1.0 - u);
  if (beta_sq < 0.0) {
    throw std::invalid_argument("consistent_annealed: beta^2 < 0, reduce eps or gamma");
  }
  const double beta = std::sqrt(beta_sq);
  const int L = p.levels();
  if (dim < 1) throw std::invalid_argument("consistent_annealed: dim must be >= 1");

  Vec z(dim);
  rng.fill_normal(z);
  Vec x = scaled_colored(*p.cov, z, p.schedule.sigma_max());

  LangevinResult res;
  for (int i = L; i >= 1; --i) {
    const double sg = p.schedule.sigma(i);
    const double alpha = eps * sg * sg / (s_min * s_min);
    const double sg_prev = (i == 1) ? 0.0 : p.schedule.sigma(i - 1);
    const Vec s = score_fn(x, i);
    Vec noise(dim);
    rng.fill_normal(noise);
    const Vec colored = scaled_colored(*p.cov, noise, beta * sg_prev);
    for (int d = 0; d < dim; ++d) x[d] += alpha * s[d] + colored[d];
    check_finite(x, "level " + std::to_string(i));
    if (record) res.per_level.push_back(x);
  }
  res.x = std::move(x);
  return res;
}

std::vector<double> blockwise_autoregressive(const VPProcess& p, const SamplerSpec& spec,
                                             const CondEpsFn& eps,
                                             std::span<const double> past_block, int p_frames,
                                             int k_frames, int f_frames, int frame_dim,
                                             int n_blocks, double m_p, double m_f) {
  if (p_frames < 1 || k_frames < 1 || f_frames < 0 || frame_dim < 1 || n_blocks < 1) {
    throw std::invalid_argument("blockwise_autoregressive: bad window shape");
  }
  if (past_block.size() != static_cast<size_t>(p_frames) * frame_dim) {
    throw std::invalid_argument("blockwise_autoregressive: past block shorter than p frames");
  }
  Vec history(past_block.begin(), past_block.end());
  const Vec future(static_cast<size_t>(f_frames) * frame_dim, 0.0);
  Vec out;
  out.reserve(static_cast<size_t>(n_blocks) * k_frames * frame_dim);

  Rng rng(derive_seed(spec.seed, "blockwise"));
  for (int b = 0; b < n_blocks; ++b) {
    const Vec cond(history.end() - static_cast<size_t>(p_frames) * frame_dim, history.end());
    const EpsFn wrapped = [&](const Vec& noisy, int t) {
      return eps(noisy, cond, future, m_p, m_f, t);
    };
    const ChainResult block = sample_chain(p, spec, wrapped, k_frames * frame_dim, rng);
    history.insert(history.end(), block.x.begin(), block.x.end());
    out.insert(out.end(), block.x.begin(), block.x.end());
  }
  return out;
}

}  // namespace ddkl
