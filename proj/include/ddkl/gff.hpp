#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ddkl/covariance.hpp"
#include "ddkl/rng.hpp"

namespace ddkl {

// Gaussian free field covariance on an n x n periodic grid. All four Sigma
// actions are Fourier multipliers sharing one spectral weight table
// |k|^{-gamma}, normalized by sigma_N so samples have unit per-pixel
// variance. The DC mode uses |k| := 1 to keep the operator invertible.
class SpectralCovariance final : public CovarianceOperator {
 public:
  static SpectralCovariance build(int n, double gamma_exp);

  int side() const;
  double gamma_exp() const;
  double sigma_n() const;

  int field_dim() const override;  // n * n
  void apply_sigma(std::span<const double> v, std::span<double> out) const override;
  void apply_sqrt_sigma(std::span<const double> v, std::span<double> out) const override;
  void apply_inv_sigma(std::span<const double> v, std::span<double> out) const override;
  void apply_inv_sqrt_sigma(std::span<const double> v, std::span<double> out) const override;
  std::vector<double> spectrum() const override;

  // One field sample, equal to apply_sqrt_sigma of a standard normal draw.
  std::vector<double> sample(Rng& rng) const;
  void sample_into(Rng& rng, std::span<double> out) const;

  // Batch samples with per-index seeding; the parallel and serial variants
  // produce identical output for any thread count.
  std::vector<std::vector<double>> sample_batch(int count, uint64_t seed) const;
  std::vector<std::vector<double>> sample_batch_serial(int count, uint64_t seed) const;

  // Dense N x N realization for testing; rejects n > 16.
  std::vector<std::vector<double>> dense_sigma() const;

  // log|det sqrt(Sigma)|, the change-of-variables term of g = sqrt(Sigma) z.
  double flow_logdet_term() const;

 private:
  struct Impl;
  explicit SpectralCovariance(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

CovPtr make_gff_cov(int n, double gamma_exp);

}  // namespace ddkl
