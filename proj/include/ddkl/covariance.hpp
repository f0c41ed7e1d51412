#pragma once

#include <memory>
#include <span>
#include <vector>

namespace ddkl {

// Symmetric positive-definite covariance acting as a linear operator.
// Multi-channel vectors are handled by applying the per-channel operator to
// each contiguous block of field_dim() entries. field_dim() == 0 means the
// operator is element-wise and accepts any length.
class CovarianceOperator {
 public:
  virtual ~CovarianceOperator() = default;

  virtual int field_dim() const = 0;
  virtual bool is_identity() const { return false; }

  virtual void apply_sigma(std::span<const double> v, std::span<double> out) const = 0;
  virtual void apply_sqrt_sigma(std::span<const double> v, std::span<double> out) const = 0;
  virtual void apply_inv_sigma(std::span<const double> v, std::span<double> out) const = 0;
  virtual void apply_inv_sqrt_sigma(std::span<const double> v, std::span<double> out) const = 0;

  // Eigenvalues of Sigma for one channel. Identity reports {1}.
  virtual std::vector<double> spectrum() const = 0;

  std::vector<double> sigma(std::span<const double> v) const;
  std::vector<double> sqrt_sigma(std::span<const double> v) const;
  std::vector<double> inv_sigma(std::span<const double> v) const;
  std::vector<double> inv_sqrt_sigma(std::span<const double> v) const;

 protected:
  void check_length(size_t len) const;
};

class IdentityCovariance final : public CovarianceOperator {
 public:
  int field_dim() const override { return 0; }
  bool is_identity() const override { return true; }
  void apply_sigma(std::span<const double> v, std::span<double> out) const override;
  void apply_sqrt_sigma(std::span<const double> v, std::span<double> out) const override;
  void apply_inv_sigma(std::span<const double> v, std::span<double> out) const override;
  void apply_inv_sqrt_sigma(std::span<const double> v, std::span<double> out) const override;
  std::vector<double> spectrum() const override { return {1.0}; }
};

using CovPtr = std::shared_ptr<const CovarianceOperator>;

// Shared identity instance.
CovPtr identity_cov();

}  // namespace ddkl
