#pragma once

#include <cstdint>
#include <vector>

#include "fractv/grid_ops.hpp"

namespace fractv {

/// n standard normal samples: Box-Muller on 53-bit uniforms from mt19937_64(seed).
std::vector<double> gaussian_samples(std::size_t n, std::uint64_t seed);

/// image + sigma * N(0, 1) per sample, clamped to [0, 1].
Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed);

/// Piecewise-smooth test image on an n x n lattice: a shaded background, a bright
/// rectangle, a disk with a radial ramp and a thin dark bar. Values in [0.1, 0.9].
Image phantom(int n, double spacing = 1.0);

}  // namespace fractv
