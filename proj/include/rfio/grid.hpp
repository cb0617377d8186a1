#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "rfio/geometry.hpp"

namespace rfio {

class PhaseField;

/// Quadrature grid on frequency space in polar coordinates (lambda, omega).
/// Radial nodes are log-spaced over the dyadic range [2^(j_min-1), 2^(j_max+1)]
/// with composite trapezoid weights; angular nodes are a Fibonacci-sphere
/// layout with equal-area weights 4*pi/N.
struct PolarFrequencyGrid {
    std::vector<double> radial_nodes;
    std::vector<double> radial_weights;
    std::vector<Vec3> angular_nodes;
    std::vector<double> angular_weights;
    int j_min = 0;
    int j_max = 0;

    std::size_t n_radial() const { return radial_nodes.size(); }
    std::size_t n_angular() const { return angular_nodes.size(); }
    std::size_t size() const { return n_radial() * n_angular(); }

    std::uint64_t hash() const;
};

PolarFrequencyGrid build_polar_grid(int j_min, int j_max, int radial_per_octave,
                                    int angular_count);

/// Quadrature grid on Sigma = R^3. Either a uniform Cartesian lattice on
/// [-L, L]^3 (the default; perturbations live in |x| <= 2) or a shell-product
/// ball grid with exact-volume weights; scattered clouds with user weights
/// are accepted as well.
struct SpatialGrid {
    std::vector<Vec3> points;
    std::vector<double> weights;
    double bounding_radius = 0.0;

    // Lattice metadata (zero when the grid is not a lattice).
    int lattice_n = 0;
    double lattice_extent = 0.0; // the L of [-L, L]^3

    std::size_t size() const { return points.size(); }
    bool is_lattice() const { return lattice_n > 0; }
    double lattice_spacing() const { return is_lattice() ? 2.0 * lattice_extent / lattice_n : 0.0; }

    static SpatialGrid lattice(double L, int n);
    static SpatialGrid ball(double radius, int n_radial, int n_angular);
    static SpatialGrid scattered(std::vector<Vec3> pts, std::vector<double> w);

    std::uint64_t hash() const;
};

/// A function f(lambda*omega) sampled on the polar grid, stored row-major as
/// values[r * n_angular + a].
struct HalfDensity {
    std::size_t nr = 0;
    std::size_t na = 0;
    std::vector<complexd> values;

    HalfDensity() = default;
    HalfDensity(std::size_t nr_, std::size_t na_)
        : nr(nr_), na(na_), values(nr_ * na_, complexd{0.0, 0.0}) {}
    explicit HalfDensity(const PolarFrequencyGrid& g)
        : HalfDensity(g.n_radial(), g.n_angular()) {}

    complexd& at(std::size_t r, std::size_t a) { return values[r * na + a]; }
    complexd at(std::size_t r, std::size_t a) const { return values[r * na + a]; }
    bool matches(const PolarFrequencyGrid& g) const {
        return nr == g.n_radial() && na == g.n_angular();
    }
};

/// Complex scalar field sampled on a SpatialGrid.
struct SpatialField {
    std::vector<complexd> values;

    SpatialField() = default;
    explicit SpatialField(std::size_t n) : values(n, complexd{0.0, 0.0}) {}
    explicit SpatialField(const SpatialGrid& g) : SpatialField(g.size()) {}

    std::size_t size() const { return values.size(); }
};

/// R^3-valued complex field (outputs of the vector half-wave operators).
struct VectorSpatialField {
    std::vector<complexd> x, y, z;

    VectorSpatialField() = default;
    explicit VectorSpatialField(std::size_t n)
        : x(n, complexd{}), y(n, complexd{}), z(n, complexd{}) {}

    std::size_t size() const { return x.size(); }
    std::vector<complexd>& comp(int i) { return i == 0 ? x : (i == 1 ? y : z); }
    const std::vector<complexd>& comp(int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

double polar_l2_norm(const HalfDensity& f, const PolarFrequencyGrid& g);

// Inner product under the polar measure lambda^2 dlambda domega.
complexd polar_inner(const HalfDensity& f, const HalfDensity& h,
                     const PolarFrequencyGrid& g);

double spatial_l2_norm(const SpatialField& F, const SpatialGrid& g);
double spatial_l2_norm(const VectorSpatialField& F, const SpatialGrid& g);

complexd spatial_inner(const SpatialField& F, const SpatialField& H, const SpatialGrid& g);

/// Mixed norm L^p_u L^q(P_u) of the field F for the level sets of u(.,omega).
/// Spatial points are binned into slabs {u in [m*D,(m+1)*D)}; the per-slab
/// L^q uses the coarea-corrected measure (dSigma = a dmu_u du), and the
/// slab values are combined in L^p with weight D. p, q are restricted to
/// {2, infinity}; pass q_infinity/p_infinity flags via the enum.
enum class NormExponent { Two, Infinity };

double mixed_norm(const SpatialField& F, const SpatialGrid& g, const PhaseField& phase,
                  const Vec3& omega, NormExponent p, NormExponent q, double slab_width);

// Real-valued convenience overload (assumption checker measures real fields).
double mixed_norm(const std::vector<double>& F, const SpatialGrid& g, const PhaseField& phase,
                  const Vec3& omega, NormExponent p, NormExponent q, double slab_width);

} // namespace rfio
