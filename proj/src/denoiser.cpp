#include "ddkl/denoiser.hpp"

#include <cmath>
#include <stdexcept>

#include "ddkl/parallel.hpp"

namespace ddkl {

namespace {
using Vec = std::vector<double>;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double silu(double x) { return x * sigmoid(x); }
double silu_grad(double pre) {
  const double s = sigmoid(pre);
  return s * (1.0 + pre * (1.0 - s));
}
}

std::vector<double> time_embedding(double t, int D, double c) {
  if (D < 2 || D % 2 != 0) throw std::invalid_argument("time_embedding: D must be even and >= 2");
  Vec e(D);
  for (int d = 0; d < D / 2; ++d) {
    const double freq = std::pow(c, -2.0 * d / D);
    e[2 * d] = std::cos(t * freq);
    e[2 * d + 1] = std::sin(t * freq);
  }
  return e;
}

Mlp::Mlp(std::vector<int> widths, uint64_t seed) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw std::invalid_argument("mlp: need at least input and output widths");
  int off = 0;
  for (size_t l = 0; l + 1 < widths_.size(); ++l) {
    Layer layer;
    layer.in = widths_[l];
    layer.out = widths_[l + 1];
    layer.w_off = off;
    off += layer.in * layer.out;
    layer.b_off = off;
    off += layer.out;
    layers_.push_back(layer);
  }
  p_.assign(off, 0.0);
  Rng rng(derive_seed(seed, "mlp_init"));
  for (const Layer& l : layers_) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (int i = 0; i < l.in * l.out; ++i) p_[l.w_off + i] = scale * rng.normal();
  }
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  Cache cache;
  return forward_cached(x, cache);
}

std::vector<double> Mlp::forward_cached(std::span<const double> x, Cache& cache) const {
  if (x.size() != static_cast<size_t>(widths_.front())) {
    throw std::invalid_argument("mlp: input size mismatch");
  }
  cache.acts.resize(layers_.size() + 1);
  cache.pres.resize(layers_.size());
  cache.acts[0].assign(x.begin(), x.end());
  for (size_t l = 0; l < layers_.size(); ++l) {
    const Layer& ly = layers_[l];
    const Vec& cur = cache.acts[l];
    Vec& next = cache.acts[l + 1];
    next.resize(ly.out);
    for (int o = 0; o < ly.out; ++o) {
      double acc = p_[ly.b_off + o];
      const double* w = &p_[ly.w_off + o * ly.in];
      for (int i = 0; i < ly.in; ++i) acc += w[i] * cur[i];
      next[o] = acc;
    }
    if (l + 1 < layers_.size()) {
      cache.pres[l] = next;
      for (double& v : next) v = silu(v);
    }
  }
  return cache.acts.back();
}

std::vector<double> Mlp::backward(const Cache& cache, std::span<const double> dLdy,
                                  std::span<double> grad) const {
  if (grad.size() != p_.size()) throw std::invalid_argument("mlp: gradient buffer size mismatch");
  Vec& delta = cache.delta;
  Vec& din = cache.din;
  delta.assign(dLdy.begin(), dLdy.end());
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    const Layer& ly = layers_[l];
    const Vec& in_act = cache.acts[l];
    if (l + 1 < static_cast<int>(layers_.size())) {
      const Vec& pre = cache.pres[l];
      for (int o = 0; o < ly.out; ++o) delta[o] *= silu_grad(pre[o]);
    }
    din.assign(ly.in, 0.0);
    for (int o = 0; o < ly.out; ++o) {
      const double dl = delta[o];
      grad[ly.b_off + o] += dl;
      double* gw = &grad[ly.w_off + o * ly.in];
      const double* w = &p_[ly.w_off + o * ly.in];
      for (int i = 0; i < ly.in; ++i) {
        gw[i] += dl * in_act[i];
        din[i] += dl * w[i];
      }
    }
    std::swap(delta, din);
  }
  return delta;
}

MlpDenoiser MlpDenoiser::create(int data_dim, int cond_dim, int emb_dim,
                                const std::vector<int>& hidden, uint64_t seed) {
  MlpDenoiser d;
  d.data_dim = data_dim;
  d.cond_dim = cond_dim;
  d.emb_dim = emb_dim;
  std::vector<int> widths;
  widths.push_back(data_dim + emb_dim + cond_dim);
  for (int h : hidden) widths.push_back(h);
  widths.push_back(data_dim);
  d.net = Mlp(widths, seed);
  return d;
}

std::vector<double> MlpDenoiser::assemble_input(std::span<const double> x_t, double t_norm,
                                                std::span<const double> cond) const {
  if (x_t.size() != static_cast<size_t>(data_dim) ||
      cond.size() != static_cast<size_t>(cond_dim)) {
    throw std::invalid_argument("denoiser: input shape mismatch");
  }
  Vec in;
  in.reserve(data_dim + emb_dim + cond_dim);
  in.insert(in.end(), x_t.begin(), x_t.end());
  const Vec emb = time_embedding(t_norm, emb_dim);
  in.insert(in.end(), emb.begin(), emb.end());
  in.insert(in.end(), cond.begin(), cond.end());
  return in;
}

std::vector<double> MlpDenoiser::predict(std::span<const double> x_t, double t_norm,
                                         std::span<const double> cond) const {
  return net.forward(assemble_input(x_t, t_norm, cond));
}

ConvDenoiser::ConvDenoiser(int side, int in_channels, int out_channels, int hidden_channels,
                           int emb_dim, uint64_t seed)
    : side_(side), in_ch_(in_channels), out_ch_(out_channels), hid_(hidden_channels),
      emb_dim_(emb_dim) {
  if (side < 1 || side > 16) throw std::invalid_argument("conv denoiser: side must be in [1,16]");
  const int chans[5] = {in_ch_, hid_, hid_, hid_, out_ch_};
  int off = 0;
  for (int l = 0; l < 4; ++l) {
    Conv c;
    c.in = chans[l];
    c.out = chans[l + 1];
    c.w_off = off;
    off += c.out * c.in * 9;
    c.b_off = off;
    off += c.out;
    convs_.push_back(c);
  }
  temb_w_off_ = off;
  off += hid_ * emb_dim_;
  temb_b_off_ = off;
  off += hid_;
  p_.assign(off, 0.0);
  Rng rng(derive_seed(seed, "conv_init"));
  for (const Conv& c : convs_) {
    const double scale = 1.0 / std::sqrt(9.0 * c.in);
    for (int i = 0; i < c.out * c.in * 9; ++i) p_[c.w_off + i] = scale * rng.normal();
  }
  for (int i = 0; i < hid_ * emb_dim_; ++i) {
    p_[temb_w_off_ + i] = rng.normal() / std::sqrt(static_cast<double>(emb_dim_));
  }
}

void ConvDenoiser::conv_forward(const Conv& c, std::span<const double> in,
                                std::span<double> out) const {
  const int n = side_;
  for (int oc = 0; oc < c.out; ++oc) {
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        double acc = p_[c.b_off + oc];
        for (int ic = 0; ic < c.in; ++ic) {
          for (int ky = -1; ky <= 1; ++ky) {
            const int yy = y + ky;
            if (yy < 0 || yy >= n) continue;
            for (int kx = -1; kx <= 1; ++kx) {
              const int xx = x + kx;
              if (xx < 0 || xx >= n) continue;
              const double w =
                  p_[c.w_off + ((oc * c.in + ic) * 3 + (ky + 1)) * 3 + (kx + 1)];
              acc += w * in[(ic * n + yy) * n + xx];
            }
          }
        }
        out[(oc * n + y) * n + x] = acc;
      }
    }
  }
}

void ConvDenoiser::conv_backward(const Conv& c, std::span<const double> in,
                                 std::span<const double> dout, std::span<double> din,
                                 std::span<double> grad) const {
  const int n = side_;
  for (int oc = 0; oc < c.out; ++oc) {
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const double d = dout[(oc * n + y) * n + x];
        grad[c.b_off + oc] += d;
        for (int ic = 0; ic < c.in; ++ic) {
          for (int ky = -1; ky <= 1; ++ky) {
            const int yy = y + ky;
            if (yy < 0 || yy >= n) continue;
            for (int kx = -1; kx <= 1; ++kx) {
              const int xx = x + kx;
              if (xx < 0 || xx >= n) continue;
              const int widx = c.w_off + ((oc * c.in + ic) * 3 + (ky + 1)) * 3 + (kx + 1);
              grad[widx] += d * in[(ic * n + yy) * n + xx];
              din[(ic * n + yy) * n + xx] += d * p_[widx];
            }
          }
        }
      }
    }
  }
}

std::vector<double> ConvDenoiser::forward(std::span<const double> x, double t_norm) const {
  Cache cache;
  return forward_cached(x, t_norm, cache);
}

std::vector<double> ConvDenoiser::forward_cached(std::span<const double> x, double t_norm,
                                                 Cache& cache) const {
  const int n = side_;
  if (x.size() != static_cast<size_t>(in_ch_) * n * n) {
    throw std::invalid_argument("conv denoiser: input shape mismatch");
  }
  cache.acts.clear();
  cache.pres.clear();
  cache.emb = time_embedding(t_norm, emb_dim_);
  Vec tb(hid_);
  for (int o = 0; o < hid_; ++o) {
    double acc = p_[temb_b_off_ + o];
    for (int i = 0; i < emb_dim_; ++i) acc += p_[temb_w_off_ + o * emb_dim_ + i] * cache.emb[i];
    tb[o] = acc;
  }
  cache.acts.emplace_back(x.begin(), x.end());
  Vec cur(x.begin(), x.end());
  for (size_t l = 0; l < convs_.size(); ++l) {
    const Conv& c = convs_[l];
    Vec next(static_cast<size_t>(c.out) * n * n, 0.0);
    conv_forward(c, cur, next);
    if (l == 1 || l == 2) {
      for (int oc = 0; oc < c.out; ++oc) {
        for (int i = 0; i < n * n; ++i) next[oc * n * n + i] += tb[oc];
      }
    }
    if (l + 1 < convs_.size()) {
      cache.pres.push_back(next);
      for (double& v : next) v = silu(v);
    }
    cache.acts.push_back(next);
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> ConvDenoiser::backward(const Cache& cache, std::span<const double> dLdy,
                                           std::span<double> grad) const {
  const int n = side_;
  if (grad.size() != p_.size()) throw std::invalid_argument("conv denoiser: grad buffer mismatch");
  Vec delta(dLdy.begin(), dLdy.end());
  Vec temb_bias_grad(hid_, 0.0);
  for (int l = static_cast<int>(convs_.size()) - 1; l >= 0; --l) {
    const Conv& c = convs_[l];
    if (l + 1 < static_cast<int>(convs_.size())) {
      const Vec& pre = cache.pres[l];
      for (size_t i = 0; i < delta.size(); ++i) delta[i] *= silu_grad(pre[i]);
    }
    if (l == 1 || l == 2) {
      for (int oc = 0; oc < c.out; ++oc) {
        for (int i = 0; i < n * n; ++i) temb_bias_grad[oc] += delta[oc * n * n + i];
      }
    }
    Vec din(static_cast<size_t>(c.in) * n * n, 0.0);
    conv_backward(c, cache.acts[l], delta, din, grad);
    delta = std::move(din);
  }
  for (int o = 0; o < hid_; ++o) {
    grad[temb_b_off_ + o] += temb_bias_grad[o];
    for (int i = 0; i < emb_dim_; ++i) {
      grad[temb_w_off_ + o * emb_dim_ + i] += temb_bias_grad[o] * cache.emb[i];
    }
  }
  return delta;
}

std::pair<int, int> sample_masks(const MaskConfig& cfg, Rng& rng) {
  if (cfg.p_mask < 0.0 || cfg.p_mask > 1.0) {
    throw std::invalid_argument("sample_masks: p_mask outside [0,1]");
  }
  const int m_p = rng.uniform() < cfg.p_mask ? 0 : 1;
  const int m_f = rng.uniform() < cfg.p_mask ? 0 : 1;
  return {m_p, m_f};
}

namespace {

// Residual weighting applied to (eps_hat - eps) before squaring.
enum class ResidualShape { Plain, InvSqrtSigma, SqrtSigma };

struct SampleDraw {
  int t = 1;
  Vec eps;
  Vec cond;  // already masked
};

// Shared batched loss core. Draws happen serially so the caller's stream is
// independent of thread count. Samples are split over a fixed number of
// virtual chunks with one gradient accumulator each; chunk results are
// reduced in chunk order, so the outcome is bitwise identical for any
// thread count while the accumulators stay cache-resident.
constexpr int kLossChunks = 8;

LossResult batched_loss(const MlpDenoiser& d, const VPProcess* vp, const VEProcess* ve,
                        const std::vector<Vec>& data, const std::vector<SampleDraw>& draws,
                        ResidualShape shape) {
  const int B = static_cast<int>(data.size());
  const int L = vp ? vp->levels() : ve->levels();
  const CovarianceOperator& cov = vp ? *vp->cov : *ve->cov;
  const int chunks = std::min(kLossChunks, B);
  const int per = (B + chunks - 1) / chunks;

  std::vector<double> chunk_loss(chunks, 0.0);
  std::vector<Vec> chunk_grad(chunks);

#ifdef _OPENMP
#pragma omp parallel for num_threads(std::min(thread_cap(), chunks)) schedule(static)
#endif
  for (int ch = 0; ch < chunks; ++ch) {
    chunk_grad[ch].assign(d.net.param_count(), 0.0);
    Mlp::Cache cache;
    Vec r, dLde;
    for (int b = ch * per; b < std::min(B, (ch + 1) * per); ++b) {
      const SampleDraw& dr = draws[b];
      const Vec x_t = vp ? forward_marginal(*vp, data[b], dr.t, dr.eps)
                         : forward_marginal(*ve, data[b], dr.t, dr.eps);
      const Vec in = d.assemble_input(x_t, static_cast<double>(dr.t) / L, dr.cond);
      const Vec eps_hat = d.net.forward_cached(in, cache);

      r.resize(eps_hat.size());
      for (size_t i = 0; i < r.size(); ++i) r[i] = eps_hat[i] - dr.eps[i];

      double loss = 0.0;
      dLde.resize(r.size());
      switch (shape) {
        case ResidualShape::Plain: {
          for (double v : r) loss += v * v;
          for (size_t i = 0; i < r.size(); ++i) dLde[i] = 2.0 * r[i];
          break;
        }
        case ResidualShape::InvSqrtSigma: {
          const Vec w = cov.inv_sqrt_sigma(r);
          for (double v : w) loss += v * v;
          const Vec g = cov.inv_sigma(r);
          for (size_t i = 0; i < r.size(); ++i) dLde[i] = 2.0 * g[i];
          break;
        }
        case ResidualShape::SqrtSigma: {
          const Vec w = cov.sqrt_sigma(r);
          for (double v : w) loss += v * v;
          const Vec g = cov.sigma(r);
          for (size_t i = 0; i < r.size(); ++i) dLde[i] = 2.0 * g[i];
          break;
        }
      }
      chunk_loss[ch] += loss;
      d.net.backward(cache, dLde, chunk_grad[ch]);
    }
  }

  LossResult res;
  res.grad.assign(d.net.param_count(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(B);
  for (int ch = 0; ch < chunks; ++ch) {
    res.loss += chunk_loss[ch];
    for (size_t i = 0; i < res.grad.size(); ++i) res.grad[i] += chunk_grad[ch][i];
  }
  res.loss *= inv_b;
  for (double& g : res.grad) g *= inv_b;
  return res;
}

std::vector<SampleDraw> draw_batch(int B, int data_dim, int cond_dim, int L, Rng& rng) {
  std::vector<SampleDraw> draws(B);
  for (auto& dr : draws) {
    dr.t = rng.uniform_int(1, L);
    dr.eps.resize(data_dim);
    rng.fill_normal(dr.eps);
    dr.cond.assign(cond_dim, 0.0);
  }
  return draws;
}

}  // namespace

LossResult loss_noise_matching(const MlpDenoiser& d, const VPProcess& p,
                               const std::vector<std::vector<double>>& batch, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("loss: empty batch");
  const auto draws = draw_batch(static_cast<int>(batch.size()), d.data_dim, d.cond_dim,
                                p.levels(), rng);
  return batched_loss(d, &p, nullptr, batch, draws, ResidualShape::Plain);
}

LossResult loss_noise_matching(const MlpDenoiser& d, const VEProcess& p,
                               const std::vector<std::vector<double>>& batch, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("loss: empty batch");
  const auto draws = draw_batch(static_cast<int>(batch.size()), d.data_dim, d.cond_dim,
                                p.levels(), rng);
  return batched_loss(d, nullptr, &p, batch, draws, ResidualShape::Plain);
}

LossResult loss_ni(const MlpDenoiser& d, const VPProcess& p,
                   const std::vector<std::vector<double>>& batch, NiVariant variant,
                   Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("loss: empty batch");
  const auto draws = draw_batch(static_cast<int>(batch.size()), d.data_dim, d.cond_dim,
                                p.levels(), rng);
  const ResidualShape shape = variant == NiVariant::A   ? ResidualShape::Plain
                              : variant == NiVariant::B ? ResidualShape::InvSqrtSigma
                                                        : ResidualShape::SqrtSigma;
  return batched_loss(d, &p, nullptr, batch, draws, shape);
}

LossResult loss_masked_conditional(const MlpDenoiser& d, const VPProcess& p,
                                   const std::vector<VideoWindow>& batch,
                                   const MaskConfig& cfg, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("loss: empty batch");
  const size_t cur_dim = static_cast<size_t>(cfg.k) * cfg.frame_dim;
  const size_t past_dim = static_cast<size_t>(cfg.p) * cfg.frame_dim;
  const size_t fut_dim = static_cast<size_t>(cfg.f) * cfg.frame_dim;
  if (d.cond_dim != static_cast<int>(past_dim + fut_dim) ||
      d.data_dim != static_cast<int>(cur_dim)) {
    throw std::invalid_argument("loss_masked_conditional: denoiser shape mismatch");
  }

  std::vector<Vec> currents(batch.size());
  std::vector<SampleDraw> draws(batch.size());
  for (size_t b = 0; b < batch.size(); ++b) {
    const VideoWindow& w = batch[b];
    if (w.past.size() != past_dim || w.current.size() != cur_dim ||
        w.future.size() != fut_dim) {
      throw std::invalid_argument("loss_masked_conditional: window shape mismatch");
    }
    currents[b] = w.current;
    auto& dr = draws[b];
    dr.t = rng.uniform_int(1, p.levels());
    dr.eps.resize(cur_dim);
    rng.fill_normal(dr.eps);
    const auto [m_p, m_f] = sample_masks(cfg, rng);
    dr.cond.resize(past_dim + fut_dim);
    for (size_t i = 0; i < past_dim; ++i) dr.cond[i] = m_p * w.past[i];
    for (size_t i = 0; i < fut_dim; ++i) dr.cond[past_dim + i] = m_f * w.future[i];
  }
  return batched_loss(d, &p, nullptr, currents, draws, ResidualShape::Plain);
}

TrainResult train(std::vector<double>& params, const LossStepFn& step, const TrainConfig& cfg) {
  if (cfg.lr < 0.0) throw std::invalid_argument("train: negative step size");
  Rng rng(derive_seed(cfg.seed, "train"));
  Vec m(params.size(), 0.0), v(params.size(), 0.0);
  TrainResult res;
  res.loss_trace.reserve(cfg.iterations);
  for (int it = 1; it <= cfg.iterations; ++it) {
    const double frac = (cfg.iterations > 1)
                            ? static_cast<double>(it - 1) / (cfg.iterations - 1)
                            : 0.0;
    const double cur_lr =
        (cfg.lr_final >= 0.0) ? cfg.lr + (cfg.lr_final - cfg.lr) * frac : cfg.lr;
    const LossResult lr = step(rng);
    if (!std::isfinite(lr.loss)) {
      throw std::runtime_error("train: non-finite loss at iteration " + std::to_string(it));
    }
    if (lr.grad.size() != params.size()) throw std::runtime_error("train: gradient size mismatch");
    res.loss_trace.push_back(lr.loss);
    const double b1t = 1.0 - std::pow(cfg.beta1, it);
    const double b2t = 1.0 - std::pow(cfg.beta2, it);
    for (size_t i = 0; i < params.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * lr.grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * lr.grad[i] * lr.grad[i];
      params[i] -= cur_lr * (m[i] / b1t) / (std::sqrt(v[i] / b2t) + cfg.adam_eps);
    }
  }
  return res;
}

}  // namespace ddkl
