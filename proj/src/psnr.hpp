#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "kernel.hpp"

namespace bp {

// PSNR = 10*log10(M^2 / mean squared deviation) in dB, +inf for identical
// volumes. peak <= 0 selects M = max value of the reference.
inline double psnr(const Volume& v, const Volume& ref, double peak = 0.0) {
    if (v.grid.L != ref.grid.L) throw validation_error("volume dimensions differ");
    double mse = 0.0;
    for (size_t i = 0; i < v.vox.size(); ++i) {
        double d = (double)v.vox[i] - (double)ref.vox[i];
        mse += d * d;
    }
    mse /= (double)v.vox.size();
    if (peak <= 0.0) {
        float m = 0.0f;
        for (float x : ref.vox) m = std::max(m, x);
        peak = m;
    }
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace bp
