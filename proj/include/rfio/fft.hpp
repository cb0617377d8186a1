#pragma once

#include <vector>

#include "rfio/geometry.hpp"
#include "rfio/grid.hpp"

namespace rfio {

// 3D in-place complex FFT on an n^3 array stored in the same row-major
// (i,j,k) order as SpatialGrid::lattice. sign = -1 forward, +1 backward;
// the backward transform is normalized by 1/n^3 so it is the inverse.
void fft3(std::vector<complexd>& data, int n, int sign);

// Frequency component for lattice index i on [-L, L]^3: xi = (pi / L) * k
// with k the signed index.
inline double lattice_frequency(int i, int n, double L) {
    int k = i < n / 2 ? i : i - n;
    return 3.14159265358979323846 * k / L;
}

// Spectral gradient of a lattice field (data are assumed effectively
// band-limited; this is the default path for the solve targets).
VectorSpatialField spectral_gradient(const SpatialField& F, int n, double L);

// Smooth radial low-pass at 2^j: returns the field with spectrum multiplied
// by chi(|xi| / 2^j) (=1 for |xi| <= 2^j, 0 for |xi| >= 2^(j+1)).
SpatialField lowpass(const SpatialField& F, int n, double L, int j);

} // namespace rfio
