#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ddkl {

// Network and schedule descriptors stored alongside the parameter block so a
// checkpoint is self-describing. Parameters are little-endian f32.
struct ArchDescriptor {
  int32_t data_dim = 0;
  int32_t cond_dim = 0;
  int32_t emb_dim = 0;
  std::vector<int32_t> hidden;

  bool operator==(const ArchDescriptor&) const = default;
};

struct ScheduleDescriptor {
  int32_t kind = 0;  // 0 = discrete VP, 1 = geometric VE
  int32_t length = 0;
  double a = 0.0;  // VP: beta_1,  VE: sigma_min
  double b = 0.0;  // VP: beta_L,  VE: sigma_max
  int32_t cov_kind = 0;   // 0 = identity, 1 = gff
  int32_t gff_side = 0;
  double gff_gamma = 0.0;

  bool operator==(const ScheduleDescriptor&) const = default;
};

struct Checkpoint {
  ArchDescriptor arch;
  ScheduleDescriptor sched;
  std::vector<float> params;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Loads and validates the architecture against an expected descriptor.
Checkpoint load_checkpoint_expecting(const std::string& path, const ArchDescriptor& arch);

}  // namespace ddkl
