#pragma once

#include <cmath>

namespace bp {

// Reciprocal strategies of the line update kernel. approx12 is a portable
// stand-in for a hardware reciprocal approximation: the correctly rounded
// 1/x reduced to a 12-bit significand, relative error <= 2^-12. The
// Newton-Raphson refinement r0*(2 - x*r0) brings that to <= 2^-21.

inline float recip_exact(float x) { return 1.0f / x; }

inline float recip_approx12(float x) {
    int e;
    double m = std::frexp(1.0 / static_cast<double>(x), &e);  // |m| in [0.5, 1)
    return static_cast<float>(std::ldexp(std::nearbyint(std::ldexp(m, 12)), e - 12));
}

inline float recip_approx12_nr(float x) {
    float r0 = recip_approx12(x);
    return r0 * (2.0f - x * r0);
}

}  // namespace bp
