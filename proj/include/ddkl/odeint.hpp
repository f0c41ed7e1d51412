#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace ddkl {

// Differential function: dx/dt = f(x, t, params).
using OdeFn = std::function<std::vector<double>(
    const std::vector<double>& x, double t, const std::vector<double>& params)>;

struct Ivp {
  OdeFn f;
  std::vector<double> x0;
  double t0 = 0.0;
  double t1 = 1.0;
  std::vector<double> params;

  // Optional analytic vector-Jacobian products; finite differences when null.
  // vjp_x(x, t, params, a) = a^T df/dx ; vjp_theta likewise for params.
  std::function<std::vector<double>(const std::vector<double>&, double,
                                    const std::vector<double>&, const std::vector<double>&)>
      vjp_x;
  std::function<std::vector<double>(const std::vector<double>&, double,
                                    const std::vector<double>&, const std::vector<double>&)>
      vjp_theta;
};

enum class OdeMethod { Euler, Rk4 };

struct SolverConfig {
  OdeMethod method = OdeMethod::Rk4;
  double h = 1e-2;  // step magnitude; sign comes from t1 - t0
};

struct OdeResult {
  std::vector<double> x;
  int steps = 0;
  // (t, state) including both endpoints when recording is on
  std::vector<std::pair<double, std::vector<double>>> trajectory;
};

OdeResult solve(const Ivp& ivp, const SolverConfig& cfg, bool record_trajectory = false);

struct AdjointResult {
  std::vector<double> grad_params;
  std::vector<double> grad_x0;
};

// Reverse augmented solve of (x, a, dL/dtheta) given dL/dx at t1.
AdjointResult adjoint_gradient(const Ivp& ivp, const std::vector<double>& loss_grad_x1,
                               const SolverConfig& cfg);

struct CnfResult {
  std::vector<double> z;
  double delta_logp = 0.0;  // log p(x) - log p(z)
  double logp_x = 0.0;      // delta_logp + standard normal log density of z
};

// Integrates the flow together with the negative Jacobian trace. The state
// dimension must stay small enough for an exact trace.
CnfResult cnf_logdensity(const OdeFn& flow, const std::vector<double>& params,
                         const std::vector<double>& x, double t0, double t1,
                         const SolverConfig& cfg);

double std_normal_logpdf(std::span<const double> z);

}  // namespace ddkl
