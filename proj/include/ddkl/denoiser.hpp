#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ddkl/kernels.hpp"
#include "ddkl/rng.hpp"

namespace ddkl {

// Transformer-style positional embedding of the noise level:
// pairs (cos(t c^{-2d/D}), sin(t c^{-2d/D})) for d = 0..D/2-1.
std::vector<double> time_embedding(double t, int D, double c = 10000.0);

// Fully connected net with silu hidden activations and a linear output,
// parameters stored flat so the optimizer can update them in place.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> widths, uint64_t seed);

  int param_count() const { return static_cast<int>(p_.size()); }
  std::vector<double>& params() { return p_; }
  const std::vector<double>& params() const { return p_; }
  const std::vector<int>& widths() const { return widths_; }

  std::vector<double> forward(std::span<const double> x) const;

  struct Cache {
    std::vector<std::vector<double>> acts;  // acts[0] = input, then post-activation
    std::vector<std::vector<double>> pres;  // pre-activations of hidden layers
    mutable std::vector<double> delta, din;  // backward scratch
  };
  std::vector<double> forward_cached(std::span<const double> x, Cache& cache) const;
  // Accumulates parameter gradients into grad (size param_count) and returns
  // the gradient with respect to the input.
  std::vector<double> backward(const Cache& cache, std::span<const double> dLdy,
                               std::span<double> grad) const;

 private:
  struct Layer {
    int w_off = 0, b_off = 0, in = 0, out = 0;
  };
  std::vector<int> widths_;
  std::vector<Layer> layers_;
  std::vector<double> p_;
};

// Epsilon predictor over vector data. Input layout: [x_t, e(t), conditioning].
struct MlpDenoiser {
  int data_dim = 0;
  int cond_dim = 0;
  int emb_dim = 0;
  Mlp net;

  static MlpDenoiser create(int data_dim, int cond_dim, int emb_dim,
                            const std::vector<int>& hidden, uint64_t seed);

  std::vector<double> assemble_input(std::span<const double> x_t, double t_norm,
                                     std::span<const double> cond) const;
  std::vector<double> predict(std::span<const double> x_t, double t_norm,
                              std::span<const double> cond) const;
};

// Four-layer 3x3 convolutional eps-predictor for small square frames. The
// time embedding enters as a learned per-channel bias on the middle layers.
class ConvDenoiser {
 public:
  ConvDenoiser() = default;
  ConvDenoiser(int side, int in_channels, int out_channels, int hidden_channels,
               int emb_dim, uint64_t seed);

  int side() const { return side_; }
  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }
  int param_count() const { return static_cast<int>(p_.size()); }
  std::vector<double>& params() { return p_; }
  const std::vector<double>& params() const { return p_; }

  std::vector<double> forward(std::span<const double> x, double t_norm) const;

  struct Cache {
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> pres;
    std::vector<double> emb;
  };
  std::vector<double> forward_cached(std::span<const double> x, double t_norm,
                                     Cache& cache) const;
  std::vector<double> backward(const Cache& cache, std::span<const double> dLdy,
                               std::span<double> grad) const;

 private:
  int side_ = 0, in_ch_ = 0, out_ch_ = 0, hid_ = 0, emb_dim_ = 0;
  struct Conv {
    int w_off = 0, b_off = 0, in = 0, out = 0;
  };
  std::vector<Conv> convs_;
  int temb_w_off_ = 0, temb_b_off_ = 0;
  std::vector<double> p_;

  void conv_forward(const Conv& c, std::span<const double> in, std::span<double> out) const;
  void conv_backward(const Conv& c, std::span<const double> in, std::span<const double> dout,
                     std::span<double> din, std::span<double> grad) const;
};

struct MaskConfig {
  int p = 1;       // past frames
  int k = 1;       // current frames
  int f = 0;       // future frames
  double p_mask = 0.5;
  int frame_dim = 1;
};

struct VideoWindow {
  std::vector<double> past, current, future;
};

// Independent Bernoulli masks; 0 zeroes the frames out.
std::pair<int, int> sample_masks(const MaskConfig& cfg, Rng& rng);

enum class NiVariant { A, B, C };

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // wrt flat parameters
};

// Mean over the batch of ||eps - eps_hat||^2 with t ~ U{1..L}.
LossResult loss_noise_matching(const MlpDenoiser& d, const VPProcess& p,
                               const std::vector<std::vector<double>>& batch, Rng& rng);
LossResult loss_noise_matching(const MlpDenoiser& d, const VEProcess& p,
                               const std::vector<std::vector<double>>& batch, Rng& rng);

// Non-isotropic weightings: a = ||r||^2, b = ||sqrt(Sigma^-1) r||^2,
// c = ||sqrt(Sigma) r||^2. Variant a with identity covariance equals
// loss_noise_matching exactly.
LossResult loss_ni(const MlpDenoiser& d, const VPProcess& p,
                   const std::vector<std::vector<double>>& batch, NiVariant variant,
                   Rng& rng);

// Masked conditional loss over (past, current, future) windows; conditioning
// frames are multiplied by their masks before concatenation.
LossResult loss_masked_conditional(const MlpDenoiser& d, const VPProcess& p,
                                   const std::vector<VideoWindow>& batch,
                                   const MaskConfig& cfg, Rng& rng);

struct TrainConfig {
  double lr = 1e-3;
  double lr_final = -1.0;  // < 0 keeps the step size constant
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 64;
  int iterations = 1000;
  uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> loss_trace;
};

// One Adam run over a caller-supplied loss step; deterministic per seed.
using LossStepFn = std::function<LossResult(Rng& rng)>;
TrainResult train(std::vector<double>& params, const LossStepFn& step, const TrainConfig& cfg);

}  // namespace ddkl
