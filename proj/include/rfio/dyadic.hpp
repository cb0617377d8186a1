#pragma once

#include <cstddef>
#include <vector>

#include "rfio/geometry.hpp"
#include "rfio/grid.hpp"

namespace rfio {

/// Littlewood-Paley partition of unity on the frequency axis:
///   phi(l) + sum_{0<=j<=j_max} psi(2^-j l) = 1 for all l in [0, 2^j_max],
/// with psi(l) = chi(l) - chi(2l) supported in [1/2, 2] and phi = chi the low
/// cutoff (chi = 1 on [0,1], 0 on [2,inf)). The telescoping makes the sum
/// exact, not just approximate.
struct LittlewoodPaleyFamily {
    int j_max = 0;

    double low_cutoff(double lambda) const;      // phi
    double band(double lambda) const;            // psi
    double band_j(int j, double lambda) const;   // psi(2^-j l); j = -1 is phi
    double partition_sum(double lambda) const;

    // Index range of octaves that can be nonzero at lambda.
    static int lowest_band(double lambda);
};

LittlewoodPaleyFamily build_lp_family(int j_max);

/// Angular partition of unity at octave j: normalized smooth caps around a
/// Fibonacci layout of ~pi 2^j / delta^2 centers, patch (geodesic) diameter
/// <= 4 delta 2^{-j/2}.
struct AngularPatchFamily {
    int j = 0;
    double delta = 1.0;
    std::vector<Vec3> centers;
    double cap_radius = 0.0;     // geodesic support radius
    double plateau_radius = 0.0; // cap is identically 1 inside this radius

    std::size_t size() const { return centers.size(); }

    // Raw cap bump for patch nu (exactly 0 outside the cap).
    double cap(std::size_t nu, const Vec3& omega) const;
    // Normalized partition member eta_j^nu(omega).
    double eta(std::size_t nu, const Vec3& omega) const;
    // Sum of raw caps (normalization denominator).
    double cap_sum(const Vec3& omega) const;

    // Patches whose support contains omega.
    std::vector<std::size_t> touching(const Vec3& omega) const;

    // Throws when the angular quadrature cannot resolve the patches
    // (fewer than min_nodes grid nodes per patch on average).
    void require_resolution(const PolarFrequencyGrid& grid, int min_nodes = 4) const;
};

AngularPatchFamily build_angular_family(int j, double delta);

/// Refined frequency split of one octave [2^{j-1}, 2^{j+1}] into
/// ceil(separation^-alpha) smooth bumps of equal width; partition of unity
/// on the octave by construction.
struct SecondFrequencyFamily {
    int j = 0;
    double alpha = 0.125;
    double separation = 1.0;
    int count = 1;
    double lambda_lo = 0.0, lambda_hi = 0.0;
    double transition = 0.0; // width of the smooth overlaps

    double bump(int k, double lambda) const;
    double partition_sum(double lambda) const;
};

SecondFrequencyFamily build_second_frequency_family(int j, double alpha, double separation);

} // namespace rfio
