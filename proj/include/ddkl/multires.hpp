#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace ddkl {

// Channel-major, row-major image of doubles. Stored as f32 on disk.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, 0.0) {}

  double& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  int dims() const { return width * height * channels; }
};

enum class TransformKind { Haar, Unimodular };

// c = 2^(2/3) and a = 4 of the unimodular 2x2 patch transform.
double unimodular_c();
inline constexpr double unimodular_a = 4.0;

struct PatchCoeffs {
  std::array<double, 3> y{};
  double xbar = 0.0;
};

// Inverse matrix row action: 4 patch values -> 3 details + average.
PatchCoeffs patch_analysis(TransformKind kind, const std::array<double, 4>& x);
// Forward matrix action; exact inverse of patch_analysis.
std::array<double, 4> patch_synthesis(TransformKind kind, const std::array<double, 3>& y,
                                      double xbar);

// Dense 4x4 forward matrix (maps [y1 y2 y3 xbar] to the patch).
std::array<std::array<double, 4>, 4> forward_matrix(TransformKind kind);

struct Pyramid {
  TransformKind kind = TransformKind::Unimodular;
  // details[s] holds 3*channels planes at the resolution of level s+2
  std::vector<Image> details;
  Image coarsest;
  double logdet_total = 0.0;
};

// Splits an image into S levels; side lengths must be divisible by 2^(S-1).
Pyramid decompose(const Image& img, int S, TransformKind kind);
Pyramid decompose_serial(const Image& img, int S, TransformKind kind);
Image reconstruct(const Pyramid& pyr);
Image reconstruct_serial(const Pyramid& pyr);

// Log-det of the inverse transform for one level: 0 for the unimodular kind,
// coarse_dims * log(1/2) for Haar.
double logdet_term(TransformKind kind, int coarse_dims);

// log p(x) = sum_s (delta_logp_s + log p(y_s | x_{s+1})) + log p(x_S).
double loglikelihood_recursion(std::span<const double> per_level_logps,
                               std::span<const double> logdet_terms);

// Bits per dimension; logp in nats.
double bpd(double logp, int dims);
// 8-bit accounting from a unit-interval log likelihood.
double bpd_8bit(double logp_unit_interval, int dims);

// Per-level noise variances that make the synthesized fine noise unit
// variance under the unimodular transform: details carry variance
// c * 4^{-(s-1)} at level s, the coarsest level 4^{-(S-1)}.
struct NoiseSplit {
  std::vector<double> detail_var;  // levels 1..S-1
  double coarse_var = 1.0;
};

NoiseSplit multires_noise_split(int S);

}  // namespace ddkl
