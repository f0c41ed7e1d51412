#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ddkl/odeint.hpp"

using namespace ddkl;
using Vec = std::vector<double>;

namespace {
const OdeFn kLinear = [](const Vec&, double t, const Vec&) { return Vec{2.0 * t}; };
const OdeFn kGrowth = [](const Vec& x, double t, const Vec&) { return Vec{2.0 * x[0] * t}; };
}  // namespace

TEST_CASE("dx/dt = 2t reaches the analytic value 3") {
  // RK4 integrates this degree-1 polynomial exactly at any step size
  CHECK(solve({kLinear, {2.0}, 0.0, 1.0, {}}, {OdeMethod::Rk4, 0.25}).x[0] ==
        doctest::Approx(3.0).epsilon(1e-12));
  // Euler converges as h -> 0
  CHECK(solve({kLinear, {2.0}, 0.0, 1.0, {}}, {OdeMethod::Euler, 1e-4}).x[0] ==
        doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("dx/dt = 2xt worked example values") {
  // hand-iterated Euler at h = 0.25: 3 -> 3 -> 3.375 -> 4.21875 -> 5.80078125
  const double euler = solve({kGrowth, {3.0}, 0.0, 1.0, {}}, {OdeMethod::Euler, 0.25}).x[0];
  CHECK(euler == doctest::Approx(5.80078125).epsilon(1e-14));
  CHECK(euler == doctest::Approx(5.8008).epsilon(1e-5));

  // the curve x(t) = 2 e^{t^2} solves the same equation; RK4 lands on 2e
  const double exact = 2.0 * std::exp(1.0);
  const double rk4 = solve({kGrowth, {2.0}, 0.0, 1.0, {}}, {OdeMethod::Rk4, 0.05}).x[0];
  CHECK(std::abs(rk4 - exact) < 1e-4);
  CHECK(std::abs(rk4 - 5.436) < 1e-3);
}

TEST_CASE("trajectory recording and step counting") {
  const auto res = solve({kLinear, {2.0}, 0.0, 1.0, {}}, {OdeMethod::Euler, 0.25}, true);
  CHECK(res.steps == 4);
  CHECK(res.trajectory.size() == 5);
  CHECK(res.trajectory.front().first == 0.0);
  CHECK(res.trajectory.back().first == doctest::Approx(1.0));
}

TEST_CASE("reverse-time integration and round trip") {
  const OdeFn f = [](const Vec& x, double t, const Vec&) {
    return Vec{std::sin(x[1]) + t, std::cos(x[0])};
  };
  const SolverConfig cfg{OdeMethod::Rk4, 1e-3};
  const Vec x0 = {0.2, -0.4};
  const Vec fwd = solve({f, x0, 0.0, 1.0, {}}, cfg).x;
  const Vec back = solve({f, fwd, 1.0, 0.0, {}}, cfg).x;
  CHECK(std::abs(back[0] - x0[0]) < 1e-6);
  CHECK(std::abs(back[1] - x0[1]) < 1e-6);
}

TEST_CASE("non-finite states abort with a step index") {
  const OdeFn blowup = [](const Vec& x, double, const Vec&) {
    return Vec{x[0] * x[0] * 1e200};
  };
  CHECK_THROWS_WITH_AS(solve({blowup, {1.0}, 0.0, 1.0, {}}, {OdeMethod::Euler, 0.1}).x[0],
                       doctest::Contains("step"), std::runtime_error);
  CHECK_THROWS(solve({kLinear, {2.0}, 0.0, 1.0, {}}, {OdeMethod::Euler, 0.0}));
}

TEST_CASE("adjoint gradient with no parameter dependence is zero") {
  Ivp ivp;
  ivp.f = [](const Vec& x, double, const Vec&) { return Vec{x[1], -x[0]}; };
  ivp.x0 = {1.0, 0.0};
  ivp.params = {0.3, 0.8};
  const auto res = adjoint_gradient(ivp, {1.0, 0.0}, {OdeMethod::Rk4, 1e-2});
  CHECK(std::abs(res.grad_params[0]) < 1e-12);
  CHECK(std::abs(res.grad_params[1]) < 1e-12);
}

TEST_CASE("adjoint gradient matches finite differences and the analytic value") {
  Ivp ivp;
  ivp.f = [](const Vec& x, double, const Vec& th) { return Vec{th[0] * x[0]}; };
  ivp.x0 = {1.0};
  ivp.params = {0.9};
  const SolverConfig cfg{OdeMethod::Rk4, 1e-3};
  const auto adj = adjoint_gradient(ivp, {1.0}, cfg);

  const double h = 1e-5;
  Ivp up = ivp, dn = ivp;
  up.params[0] += h;
  dn.params[0] -= h;
  const double fd = (solve(up, cfg).x[0] - solve(dn, cfg).x[0]) / (2.0 * h);
  CHECK(std::abs(adj.grad_params[0] - fd) / std::abs(fd) < 1e-4);

  // x(1) = x0 e^theta, so dL/dx0 = e^theta
  CHECK(std::abs(adj.grad_x0[0] - std::exp(0.9)) / std::exp(0.9) < 1e-4);
}

TEST_CASE("adjoint accepts analytic vector-jacobian products") {
  Ivp ivp;
  ivp.f = [](const Vec& x, double, const Vec& th) { return Vec{th[0] * x[0]}; };
  ivp.x0 = {1.0};
  ivp.params = {0.9};
  ivp.vjp_x = [](const Vec&, double, const Vec& th, const Vec& a) {
    return Vec{a[0] * th[0]};
  };
  ivp.vjp_theta = [](const Vec& x, double, const Vec&, const Vec& a) {
    return Vec{a[0] * x[0]};
  };
  const auto adj = adjoint_gradient(ivp, {1.0}, {OdeMethod::Rk4, 1e-3});
  CHECK(std::abs(adj.grad_x0[0] - std::exp(0.9)) / std::exp(0.9) < 1e-5);
}

TEST_CASE("adjoint rejects mismatched loss gradients") {
  Ivp ivp;
  ivp.f = [](const Vec& x, double, const Vec&) { return Vec{x[0]}; };
  ivp.x0 = {1.0};
  CHECK_THROWS(adjoint_gradient(ivp, {1.0, 2.0}, {OdeMethod::Rk4, 1e-2}));
}

TEST_CASE("cnf identity flow keeps the base density") {
  const OdeFn zero = [](const Vec& x, double, const Vec&) { return Vec(x.size(), 0.0); };
  const Vec x = {0.3, -0.7};
  const auto res = cnf_logdensity(zero, {}, x, 0.0, 1.0, {OdeMethod::Rk4, 0.05});
  CHECK(res.z == x);
  CHECK(res.delta_logp == 0.0);
  CHECK(res.logp_x == doctest::Approx(std_normal_logpdf(x)).epsilon(1e-15));
}

TEST_CASE("linear flow log-density change equals minus the trace") {
  // f(v) = A v integrated over [0,1]: delta logp = -Tr(A) = -log|det e^A|
  const OdeFn lin = [](const Vec& v, double, const Vec&) {
    return Vec{0.3 * v[0] + 0.2 * v[1], -0.1 * v[0] + 0.4 * v[1]};
  };
  const auto res = cnf_logdensity(lin, {}, {0.5, -0.2}, 0.0, 1.0, {OdeMethod::Rk4, 1e-2});
  CHECK(res.delta_logp == doctest::Approx(-0.7).epsilon(1e-6));
}

TEST_CASE("cnf round trip through a smooth flow") {
  const OdeFn f = [](const Vec& v, double t, const Vec&) {
    return Vec{std::tanh(v[1]) + 0.2 * t, std::tanh(v[0]) - 0.1 * t};
  };
  const SolverConfig cfg{OdeMethod::Rk4, 1e-3};
  const Vec x = {0.8, -0.3};
  const auto fwd = cnf_logdensity(f, {}, x, 0.0, 1.0, cfg);
  const auto back = cnf_logdensity(f, {}, fwd.z, 1.0, 0.0, cfg);
  CHECK(std::abs(back.z[0] - x[0]) < 1e-6);
  CHECK(std::abs(back.z[1] - x[1]) < 1e-6);
  CHECK(std::abs(fwd.delta_logp + back.delta_logp) < 1e-6);
}

TEST_CASE("cnf rejects oversized states") {
  const OdeFn zero = [](const Vec& x, double, const Vec&) { return Vec(x.size(), 0.0); };
  CHECK_THROWS(cnf_logdensity(zero, {}, Vec(65, 0.0), 0.0, 1.0, {OdeMethod::Rk4, 0.1}));
}
