#pragma once

#include <cmath>

namespace rfio {

// C-infinity transition machinery shared by the dyadic families and the
// compactly supported phase perturbation. Everything is built from the
// standard mollifier seed sigma(t) = exp(-1/t) on t > 0.

inline double mollifier_seed(double t) {
    return t > 0.0 ? std::exp(-1.0 / t) : 0.0;
}

inline double mollifier_seed_d1(double t) {
    if (t <= 0.0) return 0.0;
    return std::exp(-1.0 / t) / (t * t);
}

inline double mollifier_seed_d2(double t) {
    if (t <= 0.0) return 0.0;
    double it = 1.0 / t;
    return std::exp(-it) * (it * it * it * it - 2.0 * it * it * it);
}

// Smooth step: exactly 0 for t <= 0, exactly 1 for t >= 1.
inline double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double a = mollifier_seed(t);
    double b = mollifier_seed(1.0 - t);
    return a / (a + b);
}

inline double smooth_step_d1(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    double a = mollifier_seed(t), b = mollifier_seed(1.0 - t);
    double da = mollifier_seed_d1(t), db = -mollifier_seed_d1(1.0 - t);
    double s = a + b;
    return (da * s - a * (da + db)) / (s * s);
}

inline double smooth_step_d2(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    double a = mollifier_seed(t), b = mollifier_seed(1.0 - t);
    double da = mollifier_seed_d1(t), db = -mollifier_seed_d1(1.0 - t);
    double d2a = mollifier_seed_d2(t), d2b = mollifier_seed_d2(1.0 - t);
    double s = a + b, ds = da + db, d2s = d2a + d2b;
    // d/dt [ (da*s - a*ds) / s^2 ]
    return (d2a * s - a * d2s) / (s * s) - 2.0 * ds * (da * s - a * ds) / (s * s * s);
}

// Radial cutoff chi: exactly 1 on [0,1], exactly 0 on [2,inf).
// This is the chi of the Littlewood-Paley pair; psi(l) = chi(l) - chi(2l).
inline double lp_chi(double lambda) {
    return smooth_step(2.0 - std::abs(lambda));
}

inline double lp_psi(double lambda) {
    return lp_chi(lambda) - lp_chi(2.0 * lambda);
}

} // namespace rfio
