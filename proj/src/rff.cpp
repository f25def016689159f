#include "slicewatch/rff.hpp"

#include <cmath>
#include <numbers>

#include "slicewatch/rng.hpp"

namespace slicewatch {

RffParams sample_rff_params(int p, int D, double sigma, std::uint64_t seed) {
    if (p < 1 || D < 1) {
        throw DimensionError("sample_rff_params: dimensions must satisfy p >= 1 and D >= 1");
    }
    if (!(sigma > 0.0)) {
        throw ConfigError("sample_rff_params: kernel width must be positive");
    }

    RffParams params;
    params.dim_in = p;
    params.dim_out = D;
    params.kernel_width = sigma;
    params.seed = seed;
    params.frequencies.resize(D, p);
    params.phases.resize(D);

    // Per-coordinate variance 2/sigma^2 makes E[z(x).z(x')] equal the kernel.
    const double freq_std = std::sqrt(2.0) / sigma;
    Rng rng(derive_seed(seed, 0x7266665eULL));
    for (int i = 0; i < D; ++i) {
        for (int j = 0; j < p; ++j) {
            params.frequencies(i, j) = freq_std * rng.normal();
        }
        params.phases(i) = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return params;
}

Vec map_features(const RffParams& params, const Vec& x) {
    if (x.size() != params.dim_in) {
        throw DimensionError("map_features: input has length " + std::to_string(x.size()) +
                             ", expected " + std::to_string(params.dim_in));
    }
    const double scale = std::sqrt(2.0 / params.dim_out);
    Vec z = params.frequencies * x + params.phases;
    return scale * z.array().cos().matrix();
}

double approx_kernel(const Vec& z1, const Vec& z2) {
    if (z1.size() != z2.size()) {
        throw DimensionError("approx_kernel: mismatched feature lengths");
    }
    return z1.dot(z2);
}

}  // namespace slicewatch
