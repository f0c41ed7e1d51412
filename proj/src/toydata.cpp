#include "ddkl/toydata.hpp"

#include <cmath>
#include <numbers>

namespace ddkl {

std::vector<std::vector<double>> eight_gaussian_centers() {
  std::vector<std::vector<double>> centers;
  for (int i = 0; i < 8; ++i) {
    const double a = 2.0 * std::numbers::pi * i / 8.0;
    centers.push_back({2.0 * std::cos(a), 2.0 * std::sin(a)});
  }
  return centers;
}

std::vector<double> sample_eight_gaussians(Rng& rng) {
  static const auto centers = eight_gaussian_centers();
  const int mode = rng.uniform_int(0, 7);
  return {centers[mode][0] + 0.15 * rng.normal(), centers[mode][1] + 0.15 * rng.normal()};
}

std::vector<double> pulse_frame(double phase, int frame_dim) {
  std::vector<double> frame(frame_dim, 0.0);
  const double width = 1.2;
  for (int x = 0; x < frame_dim; ++x) {
    // wrapped distance to the pulse center
    double d = std::fmod(std::abs(x - phase), static_cast<double>(frame_dim));
    d = std::min(d, frame_dim - d);
    frame[x] = std::exp(-0.5 * d * d / (width * width));
  }
  return frame;
}

VideoWindow sample_pulse_window(Rng& rng, int p, int k, int f, int frame_dim) {
  const double phase = rng.uniform() * frame_dim;
  VideoWindow w;
  auto append = [&](std::vector<double>& dst, int frame_idx) {
    const auto fr = pulse_frame(std::fmod(phase + frame_idx, static_cast<double>(frame_dim)),
                                frame_dim);
    dst.insert(dst.end(), fr.begin(), fr.end());
  };
  int idx = 0;
  for (int i = 0; i < p; ++i) append(w.past, idx++);
  for (int i = 0; i < k; ++i) append(w.current, idx++);
  for (int i = 0; i < f; ++i) append(w.future, idx++);
  return w;
}

}  // namespace ddkl
