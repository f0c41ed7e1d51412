#include "ddkl/multires.hpp"

#include <cmath>
#include <stdexcept>

#include "ddkl/parallel.hpp"

namespace ddkl {

double unimodular_c() {
  static const double c = std::pow(2.0, 2.0 / 3.0);
  return c;
}

PatchCoeffs patch_analysis(TransformKind kind, const std::array<double, 4>& x) {
  PatchCoeffs out;
  out.xbar = 0.25 * (x[0] + x[1] + x[2] + x[3]);
  if (kind == TransformKind::Haar) {
    out.y[0] = 0.5 * (x[0] + x[1] - x[2] - x[3]);
    out.y[1] = 0.5 * (x[0] - x[1] + x[2] - x[3]);
    out.y[2] = 0.5 * (x[0] - x[1] - x[2] + x[3]);
  } else {
    const double ci = 1.0 / unimodular_c();
    out.y[0] = ci * (x[0] + x[1] - x[2] - x[3]);
    out.y[1] = ci * (x[0] - x[1] + x[2] - x[3]);
    out.y[2] = ci * (x[0] - x[1] - x[2] + x[3]);
  }
  return out;
}

std::array<double, 4> patch_synthesis(TransformKind kind, const std::array<double, 3>& y,
                                      double xbar) {
  const double s = (kind == TransformKind::Haar) ? 0.5 : unimodular_c() / unimodular_a;
  return {
      xbar + s * (y[0] + y[1] + y[2]),
      xbar + s * (y[0] - y[1] - y[2]),
      xbar + s * (-y[0] + y[1] - y[2]),
      xbar + s * (-y[0] - y[1] + y[2]),
  };
}

std::array<std::array<double, 4>, 4> forward_matrix(TransformKind kind) {
  const double s = (kind == TransformKind::Haar) ? 0.5 : unimodular_c() / unimodular_a;
  return {{
      {s, s, s, 1.0},
      {s, -s, -s, 1.0},
      {-s, s, -s, 1.0},
      {-s, -s, s, 1.0},
  }};
}

namespace {

// One level: fine (w x h) -> details (3C planes at w/2 x h/2) + coarse (C planes).
template <bool Parallel>
void split_level(const Image& fine, Image& details, Image& coarse, TransformKind kind) {
  const int cw = fine.width / 2, ch = fine.height / 2;
#ifdef _OPENMP
#pragma omp parallel for collapse(2) num_threads(thread_cap()) schedule(static) if (Parallel)
#endif
  for (int c = 0; c < fine.channels; ++c) {
    for (int y = 0; y < ch; ++y) {
      for (int x = 0; x < cw; ++x) {
        const std::array<double, 4> patch = {
            fine.at(c, 2 * y, 2 * x), fine.at(c, 2 * y, 2 * x + 1),
            fine.at(c, 2 * y + 1, 2 * x), fine.at(c, 2 * y + 1, 2 * x + 1)};
        const PatchCoeffs pc = patch_analysis(kind, patch);
        details.at(3 * c + 0, y, x) = pc.y[0];
        details.at(3 * c + 1, y, x) = pc.y[1];
        details.at(3 * c + 2, y, x) = pc.y[2];
        coarse.at(c, y, x) = pc.xbar;
      }
    }
  }
}

template <bool Parallel>
void merge_level(const Image& details, const Image& coarse, Image& fine,
                 TransformKind kind) {
  const int cw = coarse.width, ch = coarse.height;
#ifdef _OPENMP
#pragma omp parallel for collapse(2) num_threads(thread_cap()) schedule(static) if (Parallel)
#endif
  for (int c = 0; c < coarse.channels; ++c) {
    for (int y = 0; y < ch; ++y) {
      for (int x = 0; x < cw; ++x) {
        const std::array<double, 3> yv = {details.at(3 * c + 0, y, x),
                                          details.at(3 * c + 1, y, x),
                                          details.at(3 * c + 2, y, x)};
        const std::array<double, 4> patch = patch_synthesis(kind, yv, coarse.at(c, y, x));
        fine.at(c, 2 * y, 2 * x) = patch[0];
        fine.at(c, 2 * y, 2 * x + 1) = patch[1];
        fine.at(c, 2 * y + 1, 2 * x) = patch[2];
        fine.at(c, 2 * y + 1, 2 * x + 1) = patch[3];
      }
    }
  }
}

template <bool Parallel>
Pyramid decompose_impl(const Image& img, int S, TransformKind kind) {
  if (S < 1) throw std::invalid_argument("decompose: S must be >= 1");
  const int denom = 1 << (S - 1);
  if (img.width % denom != 0 || img.height % denom != 0) {
    throw std::invalid_argument("decompose: sides not divisible by 2^(S-1)");
  }
  Pyramid pyr;
  pyr.kind = kind;
  Image cur = img;
  for (int s = 0; s < S - 1; ++s) {
    Image details(cur.width / 2, cur.height / 2, 3 * cur.channels);
    Image coarse(cur.width / 2, cur.height / 2, cur.channels);
    split_level<Parallel>(cur, details, coarse, kind);
    pyr.logdet_total += logdet_term(kind, coarse.dims());
    pyr.details.push_back(std::move(details));
    cur = std::move(coarse);
  }
  pyr.coarsest = std::move(cur);
  return pyr;
}

template <bool Parallel>
Image reconstruct_impl(const Pyramid& pyr) {
  Image cur = pyr.coarsest;
  for (auto it = pyr.details.rbegin(); it != pyr.details.rend(); ++it) {
    Image fine(cur.width * 2, cur.height * 2, cur.channels);
    merge_level<Parallel>(*it, cur, fine, pyr.kind);
    cur = std::move(fine);
  }
  return cur;
}

}  // namespace

Pyramid decompose(const Image& img, int S, TransformKind kind) {
  return decompose_impl<true>(img, S, kind);
}
Pyramid decompose_serial(const Image& img, int S, TransformKind kind) {
  return decompose_impl<false>(img, S, kind);
}
Image reconstruct(const Pyramid& pyr) { return reconstruct_impl<true>(pyr); }
Image reconstruct_serial(const Pyramid& pyr) { return reconstruct_impl<false>(pyr); }

double logdet_term(TransformKind kind, int coarse_dims) {
  if (coarse_dims < 1) throw std::invalid_argument("logdet_term: dims must be >= 1");
  if (kind == TransformKind::Unimodular) return 0.0;
  return coarse_dims * std::log(0.5);
}

double loglikelihood_recursion(std::span<const double> per_level_logps,
                               std::span<const double> logdet_terms) {
  if (per_level_logps.size() != logdet_terms.size() + 1) {
    throw std::invalid_argument(
        "loglikelihood_recursion: need one logp per level plus the coarsest");
  }
  double acc = per_level_logps.back();  // log p(x_S)
  for (size_t s = 0; s < logdet_terms.size(); ++s) {
    acc += per_level_logps[s] + logdet_terms[s];
  }
  return acc;
}

double bpd(double logp, int dims) {
  if (dims < 1) throw std::invalid_argument("bpd: dims must be >= 1");
  return -logp / (dims * std::log(2.0));
}

double bpd_8bit(double logp_unit_interval, int dims) {
  return bpd(logp_unit_interval, dims) + 8.0;
}

NoiseSplit multires_noise_split(int S) {
  if (S < 1) throw std::invalid_argument("multires_noise_split: S must be >= 1");
  NoiseSplit out;
  const double c = unimodular_c();
  double fine_var = 1.0;
  for (int s = 1; s <= S - 1; ++s) {
    out.detail_var.push_back(c * fine_var);
    fine_var *= 0.25;
  }
  out.coarse_var = fine_var;
  return out;
}

}  // namespace ddkl
