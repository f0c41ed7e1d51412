#include "ddkl/covariance.hpp"

#include <algorithm>
#include <stdexcept>

namespace ddkl {

void CovarianceOperator::check_length(size_t len) const {
  const int n = field_dim();
  if (n > 0 && (len == 0 || len % static_cast<size_t>(n) != 0)) {
    throw std::invalid_argument("covariance: vector length not a multiple of field dimension");
  }
}

namespace {
std::vector<double> run(const CovarianceOperator& c,
                        void (CovarianceOperator::*op)(std::span<const double>, std::span<double>) const,
                        std::span<const double> v) {
  std::vector<double> out(v.size());
  (c.*op)(v, out);
  return out;
}
}  // namespace

std::vector<double> CovarianceOperator::sigma(std::span<const double> v) const {
  return run(*this, &CovarianceOperator::apply_sigma, v);
}
std::vector<double> CovarianceOperator::sqrt_sigma(std::span<const double> v) const {
  return run(*this, &CovarianceOperator::apply_sqrt_sigma, v);
}
std::vector<double> CovarianceOperator::inv_sigma(std::span<const double> v) const {
  return run(*this, &CovarianceOperator::apply_inv_sigma, v);
}
std::vector<double> CovarianceOperator::inv_sqrt_sigma(std::span<const double> v) const {
  return run(*this, &CovarianceOperator::apply_inv_sqrt_sigma, v);
}

namespace {
void copy_through(std::span<const double> v, std::span<double> out) {
  if (out.size() != v.size()) throw std::invalid_argument("covariance: size mismatch");
  std::copy(v.begin(), v.end(), out.begin());
}
}  // namespace

void IdentityCovariance::apply_sigma(std::span<const double> v, std::span<double> out) const {
  copy_through(v, out);
}
void IdentityCovariance::apply_sqrt_sigma(std::span<const double> v, std::span<double> out) const {
  copy_through(v, out);
}
void IdentityCovariance::apply_inv_sigma(std::span<const double> v, std::span<double> out) const {
  copy_through(v, out);
}
void IdentityCovariance::apply_inv_sqrt_sigma(std::span<const double> v, std::span<double> out) const {
  copy_through(v, out);
}

CovPtr identity_cov() {
  static const CovPtr inst = std::make_shared<IdentityCovariance>();
  return inst;
}

}  // namespace ddkl
