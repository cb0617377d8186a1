#pragma once

#include <cstdint>
#include <vector>

#include "rfio/dyadic.hpp"
#include "rfio/fio.hpp"
#include "rfio/geometry.hpp"
#include "rfio/grid.hpp"
#include "rfio/phase.hpp"

namespace rfio {

/// Quadrature for the TT* kernel of one angular piece:
///   K(x,y) = int e^{i l (u(x,w)-u(y,w))} psi(2^-j l) eta_j^nu(w) l^2 dl dw.
/// The lambda integral reuses the polar radial resolution restricted to the
/// octave, upsampled x4 (the oscillatory factor needs more nodes than
/// operator application); the omega integral uses the grid nodes inside the
/// patch with their eta values.
struct KernelQuadrature {
    int j = 0;
    std::size_t nu = 0;
    Vec3 center;
    std::vector<double> lambda, lambda_w; // includes the psi_j multiplier
    std::vector<Vec3> omega;
    std::vector<double> omega_w; // eta * angular weight
};

KernelQuadrature make_kernel_quadrature(const PolarFrequencyGrid& grid,
                                        const AngularPatchFamily& family, std::size_t nu,
                                        int radial_upsample = 4);

complexd evaluate_kernel(const PhaseField& phase, const KernelQuadrature& quad, const Vec3& x,
                         const Vec3& y);

/// Right-hand side of the kernel decay estimate:
///   2^j (1 + | 2^j|du| - 2^{j/2}|ddw| |)^-2 * 2^j (1 + 2^{j/2}|ddw|)^-3
/// with du = u(x,nu)-u(y,nu) and ddw the difference of the spherical
/// omega-gradients at nu.
double decay_envelope(const PhaseField& phase, int j, const Vec3& nu, const Vec3& x,
                      const Vec3& y);

struct KernelPair {
    Vec3 x, y;
    double arg_u = 0.0;     // 2^j |u(x,nu) - u(y,nu)|
    double arg_dw = 0.0;    // 2^{j/2} |dw u(x,nu) - dw u(y,nu)|
    double kernel_abs = 0.0;
    double envelope = 0.0;
    double ratio = 0.0;
    int stratum_u = 0, stratum_dw = 0;
};

/// Seeded pair sampler stratified by the two envelope arguments
/// (logarithmic shells, fixed pairs per shell).
struct KernelProbe {
    int j = 0;
    std::size_t nu = 0;
    std::uint64_t seed = 0;
    int shells_u = 5, shells_dw = 5;
    int pairs_per_shell = 8;
    double base_radius = 1.5; // x samples stay inside the perturbation zone
};

struct DecayScanReport {
    int j = 0;
    std::vector<KernelPair> pairs;
    double sup_ratio = 0.0;
    // per (stratum_u, stratum_dw) maxima, flattened row-major
    std::vector<double> stratum_max;
    int shells_u = 0, shells_dw = 0;
};

DecayScanReport decay_ratio_scan(const KernelProbe& probe, const PhaseField& phase,
                                 const PolarFrequencyGrid& grid,
                                 const AngularPatchFamily& family);

/// Weighted sum over y of |K(x,y)| on the spatial grid (the Schur row).
double schur_row_sum(const PhaseField& phase, const KernelQuadrature& quad, const Vec3& x,
                     const SpatialGrid& sgrid);

struct ComparisonGapResult {
    double gap = 0.0;   // ||S_j^nu f - S~_j^nu f|| / gamma_j^nu
    double gamma = 0.0;
    bool skipped = false;
};

/// Distance between the piece synthesis S_j^nu and the flat comparison
/// operator S~_j^nu f(x) = F^-1(psi eta f)(phi_nu(x)). op must carry the unit
/// symbol (S has none).
ComparisonGapResult flat_comparison_gap(const FioOperator& op, const HalfDensity& f, int j,
                                        std::size_t nu);

} // namespace rfio
