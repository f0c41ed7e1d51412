#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ddkl {

struct CheckResult {
  std::string module;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::vector<CheckResult> verify_schedules(uint64_t seed);
std::vector<CheckResult> verify_odeint(uint64_t seed);
std::vector<CheckResult> verify_gff(uint64_t seed);
std::vector<CheckResult> verify_kernels(uint64_t seed);
std::vector<CheckResult> verify_samplers(uint64_t seed);
std::vector<CheckResult> verify_multires(uint64_t seed);
std::vector<CheckResult> verify_denoiser(uint64_t seed);

// All modules in a fixed order; empty module name selects everything.
std::vector<CheckResult> run_verify(const std::string& module, uint64_t seed);

}  // namespace ddkl
