#pragma once

#include <cstdint>

#include "slicewatch/types.hpp"

namespace slicewatch {

// Frozen random Fourier feature basis approximating the Gaussian kernel
//   k(x, x') = exp(-||x - x'||^2 / sigma^2).
// All agents of one physical node share one instance so that consensus on the
// hyperplane normal is meaningful.
struct RffParams {
    Mat frequencies;        // D x p, row i holds omega_i
    Vec phases;             // D, each in [0, 2*pi]
    int dim_in = 0;         // p
    int dim_out = 0;        // D
    double kernel_width = 1.0;
    std::uint64_t seed = 0;
};

// Draws frequencies i.i.d. N(0, (2/sigma^2) I) and phases U[0, 2*pi].
// Deterministic in (p, D, sigma, seed).
RffParams sample_rff_params(int p, int D, double sigma, std::uint64_t seed);

// z_i = sqrt(2/D) * cos(omega_i . x + phase_i)
Vec map_features(const RffParams& params, const Vec& x);

// Inner product of two mapped vectors; approximates the Gaussian kernel.
double approx_kernel(const Vec& z1, const Vec& z2);

}  // namespace slicewatch
