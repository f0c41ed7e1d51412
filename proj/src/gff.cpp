#include "ddkl/gff.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include "ddkl/parallel.hpp"

namespace ddkl {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SpectralCovariance::Impl {
  int n = 0;
  double gamma = 0.0;
  double sigma_n = 0.0;
  std::vector<double> weights;  // |k|^{-gamma}, FFT bin order
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
  }

  // out = Real(W^-1 diag(weights^power) W v) * scale, one channel
  void multiply(std::span<const double> v, std::span<double> out, double power,
                double scale) const {
    const int N = n * n;
    // plans use FFTW_UNALIGNED, so plain per-thread buffers are fine
    static thread_local std::vector<std::complex<double>> buf, freq;
    buf.resize(N);
    freq.resize(N);
    for (int i = 0; i < N; ++i) buf[i] = v[i];
    fftw_execute_dft(fwd, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(freq.data()));
    for (int i = 0; i < N; ++i) freq[i] *= std::pow(weights[i], power);
    fftw_execute_dft(inv, reinterpret_cast<fftw_complex*>(freq.data()),
                     reinterpret_cast<fftw_complex*>(buf.data()));
    const double s = scale / N;  // FFTW backward transform is unnormalized
    for (int i = 0; i < N; ++i) out[i] = s * buf[i].real();
  }

  // sqrt(Sigma) multiplier on one eigenmode
  double sqrt_scale() const { return 1.0 / (std::sqrt(2.0 * n * n) * sigma_n); }
};

SpectralCovariance::SpectralCovariance(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

SpectralCovariance SpectralCovariance::build(int n, double gamma_exp) {
  if (n < 1) throw std::invalid_argument("gff: side length must be >= 1");
  if (gamma_exp < 0.0) throw std::invalid_argument("gff: gamma must be >= 0");
  auto impl = std::make_shared<Impl>();
  impl->n = n;
  impl->gamma = gamma_exp;
  const int N = n * n;
  impl->weights.resize(N);
  for (int i = 0; i < n; ++i) {
    const int fi = (i <= (n - 1) / 2) ? i : i - n;  // symmetric integer frequencies
    for (int j = 0; j < n; ++j) {
      const int fj = (j <= (n - 1) / 2) ? j : j - n;
      double k = std::sqrt(static_cast<double>(fi) * fi + static_cast<double>(fj) * fj);
      if (k == 0.0) k = 1.0;  // DC mode, keeps Sigma invertible
      impl->weights[i * n + j] = std::pow(k, -gamma_exp);
    }
  }
  double sum2 = 0.0;
  for (double w : impl->weights) sum2 += w * w;
  impl->sigma_n = std::sqrt(sum2 / (2.0 * N * N));

  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    std::vector<std::complex<double>> a(N), b(N);
    impl->fwd = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                                 reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    impl->inv = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                                 reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  return SpectralCovariance(std::move(impl));
}

int SpectralCovariance::side() const { return impl_->n; }
double SpectralCovariance::gamma_exp() const { return impl_->gamma; }
double SpectralCovariance::sigma_n() const { return impl_->sigma_n; }
int SpectralCovariance::field_dim() const { return impl_->n * impl_->n; }

#define DDKL_GFF_APPLY(name, power)                                                     \
  void SpectralCovariance::name(std::span<const double> v, std::span<double> out)      \
      const {                                                                           \
    check_length(v.size());                                                             \
    if (out.size() != v.size()) throw std::invalid_argument("gff: size mismatch");      \
    const int N = field_dim();                                                          \
    const double s = impl_->sqrt_scale();                                               \
    for (size_t c = 0; c + N <= v.size(); c += N) {                                     \
      impl_->multiply(v.subspan(c, N), out.subspan(c, N), power,                        \
                      std::pow(s, power));                                              \
    }                                                                                   \
  }

DDKL_GFF_APPLY(apply_sigma, 2.0)
DDKL_GFF_APPLY(apply_sqrt_sigma, 1.0)
DDKL_GFF_APPLY(apply_inv_sigma, -2.0)
DDKL_GFF_APPLY(apply_inv_sqrt_sigma, -1.0)
#undef DDKL_GFF_APPLY

std::vector<double> SpectralCovariance::spectrum() const {
  const double s = impl_->sqrt_scale();
  std::vector<double> lam(impl_->weights.size());
  for (size_t i = 0; i < lam.size(); ++i) {
    const double d = s * impl_->weights[i];
    lam[i] = d * d;
  }
  return lam;
}

std::vector<double> SpectralCovariance::sample(Rng& rng) const {
  std::vector<double> out(field_dim());
  sample_into(rng, out);
  return out;
}

void SpectralCovariance::sample_into(Rng& rng, std::span<double> out) const {
  static thread_local std::vector<double> z;
  z.resize(field_dim());
  rng.fill_normal(z);
  apply_sqrt_sigma(z, out);
}

std::vector<std::vector<double>> SpectralCovariance::sample_batch(int count,
                                                                  uint64_t seed) const {
  // storage is touched serially up front; concurrent first-touch faults would
  // otherwise serialize the loop on the kernel side
  std::vector<std::vector<double>> out(count);
  for (auto& v : out) v.assign(field_dim(), 0.0);
#ifdef _OPENMP
#pragma omp parallel for num_threads(thread_cap()) schedule(static)
#endif
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, static_cast<uint64_t>(i)));
    sample_into(rng, out[i]);
  }
  return out;
}

std::vector<std::vector<double>> SpectralCovariance::sample_batch_serial(
    int count, uint64_t seed) const {
  std::vector<std::vector<double>> out(count);
  for (auto& v : out) v.assign(field_dim(), 0.0);
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, static_cast<uint64_t>(i)));
    sample_into(rng, out[i]);
  }
  return out;
}

std::vector<std::vector<double>> SpectralCovariance::dense_sigma() const {
  const int N = field_dim();
  if (N > 256) throw std::invalid_argument("dense_sigma: grid too large (n <= 16)");
  std::vector<std::vector<double>> m(N, std::vector<double>(N, 0.0));
  std::vector<double> e(N, 0.0), col(N);
  for (int j = 0; j < N; ++j) {
    e[j] = 1.0;
    apply_sigma(e, col);
    e[j] = 0.0;
    for (int i = 0; i < N; ++i) m[i][j] = col[i];
  }
  return m;
}

double SpectralCovariance::flow_logdet_term() const {
  const int N = field_dim();
  double acc = 0.0;
  for (double w : impl_->weights) acc += std::log(w);
  return acc + N * std::log(impl_->sqrt_scale());
}

CovPtr make_gff_cov(int n, double gamma_exp) {
  return std::make_shared<SpectralCovariance>(SpectralCovariance::build(n, gamma_exp));
}

}  // namespace ddkl
