#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ddkl/kernels.hpp"
#include "ddkl/rng.hpp"

namespace ddkl {

enum class SamplerKind { AncestralTilde, AncestralBeta, Ddim, Als, Cas };

// Strictly decreasing schedule indices, first = L, last = 1.
struct SamplerSpec {
  SamplerKind kind = SamplerKind::Ddim;
  std::vector<int> steps;
  uint64_t seed = 0;
};

// Evenly strided subsequence of {L..1} with n strides, both endpoints kept.
std::vector<int> make_substeps(int L, int n);

// Epsilon predictor for reverse chains.
using EpsFn = std::function<std::vector<double>(const std::vector<double>& x, int t)>;
// Score model conditioned on the noise level index.
using ScoreFn = std::function<std::vector<double>(const std::vector<double>& x, int i)>;

// One ancestral update t -> t-1. The injected noise z is caller-supplied so
// oracle tests can zero it; t = 1 returns the x0 estimate.
std::vector<double> ancestral_step(const VPProcess& p, std::span<const double> x_t,
                                   std::span<const double> eps_hat, int t,
                                   bool beta_variant, std::span<const double> z);

// Generalized ancestral jump t -> t_prev for respaced chains, using the
// effective beta 1 - abar_t / abar_{t_prev}.
std::vector<double> ancestral_step_between(const VPProcess& p, std::span<const double> x_t,
                                           std::span<const double> eps_hat, int t,
                                           int t_prev, bool beta_variant,
                                           std::span<const double> z);

// Deterministic update t -> t_prev; t_prev = 0 returns the x0 estimate.
std::vector<double> ddim_step(const VPProcess& p, std::span<const double> x_t,
                              std::span<const double> eps_hat, int t, int t_prev);

struct ChainResult {
  std::vector<double> x;
  // states at each visited index, aligned with the spec's step list
  std::vector<std::vector<double>> visited;
};

// Full reverse chain from noise. Supports ancestral variants and DDIM.
ChainResult sample_chain(const VPProcess& p, const SamplerSpec& spec, const EpsFn& eps,
                         int dim, Rng& rng, bool record = false);

struct LangevinResult {
  std::vector<double> x;
  std::vector<std::vector<double>> per_level;  // state after each outer level
};

// Annealed Langevin sampling: M inner updates per level, step
// alpha_i = eps sigma_i^2 / sigma_min^2, init x ~ N(0, sigma_max^2 Sigma).
LangevinResult annealed_langevin(const VEProcess& p, const ScoreFn& score_fn, int M,
                                 double eps, int dim, Rng& rng, bool record = false);

// Consistent annealed sampling: one calibrated update per level with
// beta = sqrt(1 - gamma^2 (1 - eps/sigma_min^2)^2).
LangevinResult consistent_annealed(const VEProcess& p, const ScoreFn& score_fn, double eps,
                                   int dim, Rng& rng, bool record = false);

// Conditional predictor: (noisy current, past, future, past mask, future mask, t).
using CondEpsFn = std::function<std::vector<double>(
    const std::vector<double>& noisy, const std::vector<double>& past,
    const std::vector<double>& future, double m_p, double m_f, int t)>;

// Generates n_blocks blocks of k frames, each conditioned on the trailing p
// frames of what has been generated so far (seeded by past_block).
std::vector<double> blockwise_autoregressive(const VPProcess& p, const SamplerSpec& spec,
                                             const CondEpsFn& eps,
                                             std::span<const double> past_block, int p_frames,
                                             int k_frames, int f_frames, int frame_dim,
                                             int n_blocks, double m_p = 1.0, double m_f = 0.0);

}  // namespace ddkl
