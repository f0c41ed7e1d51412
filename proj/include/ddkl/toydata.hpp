#pragma once

#include <vector>

#include "ddkl/denoiser.hpp"
#include "ddkl/rng.hpp"

namespace ddkl {

// Classic 2-D mixture of 8 Gaussians on a circle of radius 2, std 0.15.
std::vector<double> sample_eight_gaussians(Rng& rng);
std::vector<std::vector<double>> eight_gaussian_centers();

// Deterministic 1-D "video": a smooth pulse moving one pixel per frame with a
// random initial phase. Frames have frame_dim pixels in [0, 1].
std::vector<double> pulse_frame(double phase, int frame_dim);
VideoWindow sample_pulse_window(Rng& rng, int p, int k, int f, int frame_dim);

}  // namespace ddkl
