#include "ddkl/odeint.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ddkl {

namespace {

using Vec = std::vector<double>;

Vec axpy(const Vec& x, double a, const Vec& d) {
  Vec out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * d[i];
  return out;
}

void check_finite(const Vec& x, int step) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("ode solve: non-finite state at step " + std::to_string(step));
    }
  }
}

int step_count(double t0, double t1, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("ode solve: step size must be > 0");
  if (t0 == t1) return 0;
  const int n = static_cast<int>(std::lround(std::abs(t1 - t0) / h));
  return n > 0 ? n : 1;
}

template <typename Deriv>
Vec integrate(Vec x, double t0, double t1, const SolverConfig& cfg, Deriv&& deriv,
              std::vector<std::pair<double, Vec>>* traj) {
  const int n = step_count(t0, t1, cfg.h);
  const double dt = (n == 0) ? 0.0 : (t1 - t0) / n;
  if (traj) traj->push_back({t0, x});
  for (int k = 0; k < n; ++k) {
    const double t = t0 + k * dt;
    if (cfg.method == OdeMethod::Euler) {
      const Vec s1 = deriv(x, t);
      x = axpy(x, dt, s1);
    } else {
      const Vec s1 = deriv(x, t);
      const Vec s2 = deriv(axpy(x, dt / 2, s1), t + dt / 2);
      const Vec s3 = deriv(axpy(x, dt / 2, s2), t + dt / 2);
      const Vec s4 = deriv(axpy(x, dt, s3), t + dt);
      for (size_t i = 0; i < x.size(); ++i) {
        x[i] += dt / 6 * (s1[i] + 2 * s2[i] + 2 * s3[i] + s4[i]);
      }
    }
    check_finite(x, k);
    if (traj) traj->push_back({t0 + (k + 1) * dt, x});
  }
  return x;
}

// Central-difference vector-Jacobian product a^T df/dy where y is either the
// state or the parameter vector.
Vec fd_vjp(const OdeFn& f, const Vec& x, double t, const Vec& params, const Vec& a,
           bool wrt_params) {
  const Vec& y = wrt_params ? params : x;
  Vec out(y.size(), 0.0);
  Vec xp = x, pp = params;
  Vec& yp = wrt_params ? pp : xp;
  for (size_t j = 0; j < y.size(); ++j) {
    const double h = 1e-5 * (1.0 + std::abs(y[j]));
    const double keep = yp[j];
    yp[j] = keep + h;
    const Vec fp = f(xp, t, pp);
    yp[j] = keep - h;
    const Vec fm = f(xp, t, pp);
    yp[j] = keep;
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * (fp[i] - fm[i]) / (2.0 * h);
    out[j] = acc;
  }
  return out;
}

}  // namespace

OdeResult solve(const Ivp& ivp, const SolverConfig& cfg, bool record_trajectory) {
  OdeResult res;
  std::vector<std::pair<double, Vec>> traj;
  res.x = integrate(
      ivp.x0, ivp.t0, ivp.t1, cfg,
      [&](const Vec& x, double t) { return ivp.f(x, t, ivp.params); },
      record_trajectory ? &traj : nullptr);
  res.steps = step_count(ivp.t0, ivp.t1, cfg.h);
  res.trajectory = std::move(traj);
  return res;
}

AdjointResult adjoint_gradient(const Ivp& ivp, const std::vector<double>& loss_grad_x1,
                               const SolverConfig& cfg) {
  const size_t dim = ivp.x0.size();
  const size_t np = ivp.params.size();
  if (loss_grad_x1.size() != dim) {
    throw std::invalid_argument("adjoint_gradient: loss gradient dimension mismatch");
  }
  const Vec x1 = solve(ivp, cfg).x;

  // augmented reverse state [x, a, dL/dtheta]
  Vec aug(dim + dim + np, 0.0);
  std::copy(x1.begin(), x1.end(), aug.begin());
  std::copy(loss_grad_x1.begin(), loss_grad_x1.end(), aug.begin() + dim);

  const auto deriv = [&](const Vec& s, double t) {
    const Vec x(s.begin(), s.begin() + dim);
    const Vec a(s.begin() + dim, s.begin() + 2 * dim);
    Vec out(s.size());
    const Vec dx = ivp.f(x, t, ivp.params);
    const Vec da = ivp.vjp_x ? ivp.vjp_x(x, t, ivp.params, a)
                             : fd_vjp(ivp.f, x, t, ivp.params, a, false);
    Vec dth;
    if (np > 0) {
      dth = ivp.vjp_theta ? ivp.vjp_theta(x, t, ivp.params, a)
                          : fd_vjp(ivp.f, x, t, ivp.params, a, true);
    }
    std::copy(dx.begin(), dx.end(), out.begin());
    for (size_t i = 0; i < dim; ++i) out[dim + i] = -da[i];
    for (size_t i = 0; i < np; ++i) out[2 * dim + i] = -dth[i];
    return out;
  };

  SolverConfig rc = cfg;
  Vec end = integrate(aug, ivp.t1, ivp.t0, rc, deriv, nullptr);
  AdjointResult res;
  res.grad_x0.assign(end.begin() + dim, end.begin() + 2 * dim);
  res.grad_params.assign(end.begin() + 2 * dim, end.end());
  return res;
}

CnfResult cnf_logdensity(const OdeFn& flow, const std::vector<double>& params,
                         const std::vector<double>& x, double t0, double t1,
                         const SolverConfig& cfg) {
  const size_t dim = x.size();
  if (dim > 64) throw std::invalid_argument("cnf_logdensity: state too large for exact trace");

  const auto trace_jac = [&](const Vec& v, double t) {
    double tr = 0.0;
    Vec vp = v;
    for (size_t j = 0; j < dim; ++j) {
      const double h = 1e-5 * (1.0 + std::abs(v[j]));
      const double keep = vp[j];
      vp[j] = keep + h;
      const Vec fp = flow(vp, t, params);
      vp[j] = keep - h;
      const Vec fm = flow(vp, t, params);
      vp[j] = keep;
      tr += (fp[j] - fm[j]) / (2.0 * h);
    }
    if (!std::isfinite(tr)) throw std::runtime_error("cnf_logdensity: non-finite trace");
    return tr;
  };

  Vec aug(dim + 1, 0.0);
  std::copy(x.begin(), x.end(), aug.begin());
  const auto deriv = [&](const Vec& s, double t) {
    const Vec v(s.begin(), s.begin() + dim);
    Vec out(dim + 1);
    const Vec dv = flow(v, t, params);
    std::copy(dv.begin(), dv.end(), out.begin());
    out[dim] = -trace_jac(v, t);
    return out;
  };
  const Vec end = integrate(aug, t0, t1, cfg, deriv, nullptr);

  CnfResult res;
  res.z.assign(end.begin(), end.begin() + dim);
  res.delta_logp = end[dim];
  res.logp_x = res.delta_logp + std_normal_logpdf(res.z);
  return res;
}

double std_normal_logpdf(std::span<const double> z) {
  double q = 0.0;
  for (double v : z) q += v * v;
  return -0.5 * q - 0.5 * static_cast<double>(z.size()) * std::log(2.0 * std::numbers::pi);
}

}  // namespace ddkl
