#include "ddkl/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ddkl {

namespace {

constexpr uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  out.write("DDKL", 4);
  write_le<uint32_t>(out, kVersion);
  write_le<int32_t>(out, ck.arch.data_dim);
  write_le<int32_t>(out, ck.arch.cond_dim);
  write_le<int32_t>(out, ck.arch.emb_dim);
  write_le<int32_t>(out, static_cast<int32_t>(ck.arch.hidden.size()));
  for (int32_t h : ck.arch.hidden) write_le<int32_t>(out, h);
  write_le<int32_t>(out, ck.sched.kind);
  write_le<int32_t>(out, ck.sched.length);
  write_le<double>(out, ck.sched.a);
  write_le<double>(out, ck.sched.b);
  write_le<int32_t>(out, ck.sched.cov_kind);
  write_le<int32_t>(out, ck.sched.gff_side);
  write_le<double>(out, ck.sched.gff_gamma);
  write_le<uint64_t>(out, static_cast<uint64_t>(ck.params.size()));
  for (float f : ck.params) write_le<float>(out, f);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "DDKL", 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const auto version = read_le<uint32_t>(in);
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.arch.data_dim = read_le<int32_t>(in);
  ck.arch.cond_dim = read_le<int32_t>(in);
  ck.arch.emb_dim = read_le<int32_t>(in);
  const auto nh = read_le<int32_t>(in);
  if (nh < 0 || nh > 64) throw std::runtime_error("checkpoint: implausible layer count");
  ck.arch.hidden.resize(nh);
  for (auto& h : ck.arch.hidden) h = read_le<int32_t>(in);
  ck.sched.kind = read_le<int32_t>(in);
  ck.sched.length = read_le<int32_t>(in);
  ck.sched.a = read_le<double>(in);
  ck.sched.b = read_le<double>(in);
  ck.sched.cov_kind = read_le<int32_t>(in);
  ck.sched.gff_side = read_le<int32_t>(in);
  ck.sched.gff_gamma = read_le<double>(in);
  const auto count = read_le<uint64_t>(in);
  if (count > (1ull << 32)) throw std::runtime_error("checkpoint: implausible parameter count");
  ck.params.resize(count);
  for (auto& f : ck.params) f = read_le<float>(in);
  // declared count must exhaust the file
  char extra;
  if (in.read(&extra, 1)) throw std::runtime_error("checkpoint: trailing bytes after parameters");
  return ck;
}

Checkpoint load_checkpoint_expecting(const std::string& path, const ArchDescriptor& arch) {
  Checkpoint ck = load_checkpoint(path);
  if (!(ck.arch == arch)) {
    throw std::runtime_error("checkpoint: architecture descriptor mismatch");
  }
  return ck;
}

}  // namespace ddkl
