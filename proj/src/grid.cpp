#include "rfio/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "rfio/parallel.hpp"
#include "rfio/phase.hpp"

namespace rfio {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

template <typename T>
std::uint64_t fnv1a_pod(std::uint64_t h, const T& v) {
    return fnv1a(h, &v, sizeof(T));
}

} // namespace

std::uint64_t PolarFrequencyGrid::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    h = fnv1a_pod(h, j_min);
    h = fnv1a_pod(h, j_max);
    std::size_t nr = n_radial(), na = n_angular();
    h = fnv1a_pod(h, nr);
    h = fnv1a_pod(h, na);
    if (!radial_nodes.empty()) {
        h = fnv1a_pod(h, radial_nodes.front());
        h = fnv1a_pod(h, radial_nodes.back());
    }
    return h;
}

std::uint64_t SpatialGrid::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    std::size_t n = size();
    h = fnv1a_pod(h, n);
    h = fnv1a_pod(h, lattice_n);
    h = fnv1a_pod(h, lattice_extent);
    h = fnv1a_pod(h, bounding_radius);
    return h;
}

PolarFrequencyGrid build_polar_grid(int j_min, int j_max, int radial_per_octave,
                                    int angular_count) {
    if (j_min > j_max) throw std::invalid_argument("build_polar_grid: j_min > j_max");
    if (radial_per_octave < 4)
        throw std::invalid_argument("build_polar_grid: radial_per_octave must be >= 4");
    if (angular_count < 16)
        throw std::invalid_argument("build_polar_grid: angular_count must be >= 16");

    PolarFrequencyGrid g;
    g.j_min = j_min;
    g.j_max = j_max;

    // (j_max - j_min + 1) * radial_per_octave log-spaced nodes spanning the
    // full dyadic support range [2^(j_min-1), 2^(j_max+1)].
    int n = (j_max - j_min + 1) * radial_per_octave;
    double t0 = j_min - 1.0;
    double t1 = j_max + 1.0;
    g.radial_nodes.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = n == 1 ? t0 : t0 + (t1 - t0) * i / (n - 1);
        g.radial_nodes[i] = std::exp2(t);
    }
    g.radial_weights.resize(n);
    if (n == 1) {
        g.radial_weights[0] = std::exp2(t1) - std::exp2(t0);
    } else {
        for (int i = 0; i < n; ++i) {
            double lo = i == 0 ? g.radial_nodes[0] : g.radial_nodes[i - 1];
            double hi = i == n - 1 ? g.radial_nodes[n - 1] : g.radial_nodes[i + 1];
            g.radial_weights[i] = 0.5 * (hi - lo);
        }
    }

    // Fibonacci sphere with equal-area weights.
    g.angular_nodes.resize(angular_count);
    g.angular_weights.assign(angular_count, 4.0 * kPi / angular_count);
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < angular_count; ++i) {
        double z = 1.0 - (2.0 * i + 1.0) / angular_count;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = golden_angle * i;
        g.angular_nodes[i] = {r * std::cos(phi), r * std::sin(phi), z};
    }
    return g;
}

SpatialGrid SpatialGrid::lattice(double L, int n) {
    if (L <= 0.0 || n <= 0) throw std::invalid_argument("SpatialGrid::lattice: bad parameters");
    SpatialGrid g;
    g.lattice_n = n;
    g.lattice_extent = L;
    g.bounding_radius = L * std::sqrt(3.0);
    double h = 2.0 * L / n;
    double w = h * h * h;
    g.points.reserve(static_cast<std::size_t>(n) * n * n);
    g.weights.assign(static_cast<std::size_t>(n) * n * n, w);
    // cell centers
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                g.points.push_back({-L + h * (i + 0.5), -L + h * (j + 0.5), -L + h * (k + 0.5)});
    return g;
}

SpatialGrid SpatialGrid::ball(double radius, int n_radial, int n_angular) {
    if (radius <= 0.0 || n_radial <= 0 || n_angular < 16)
        throw std::invalid_argument("SpatialGrid::ball: bad parameters");
    SpatialGrid g;
    g.bounding_radius = radius;
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    std::vector<Vec3> sph(n_angular);
    for (int i = 0; i < n_angular; ++i) {
        double z = 1.0 - (2.0 * i + 1.0) / n_angular;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = golden_angle * i;
        sph[i] = {r * std::cos(phi), r * std::sin(phi), z};
    }
    // shells with exact-volume weights: shell m covers [r_m, r_{m+1}]
    for (int m = 0; m < n_radial; ++m) {
        double r_lo = radius * m / n_radial;
        double r_hi = radius * (m + 1) / n_radial;
        double r_mid = 0.5 * (r_lo + r_hi);
        double shell_vol = 4.0 / 3.0 * kPi * (r_hi * r_hi * r_hi - r_lo * r_lo * r_lo);
        double w = shell_vol / n_angular;
        for (int i = 0; i < n_angular; ++i) {
            g.points.push_back(sph[i] * r_mid);
            g.weights.push_back(w);
        }
    }
    return g;
}

SpatialGrid SpatialGrid::scattered(std::vector<Vec3> pts, std::vector<double> w) {
    if (pts.size() != w.size() || pts.empty())
        throw std::invalid_argument("SpatialGrid::scattered: size mismatch");
    SpatialGrid g;
    double r = 0.0;
    for (const auto& p : pts) r = std::max(r, norm(p));
    g.bounding_radius = r;
    g.points = std::move(pts);
    g.weights = std::move(w);
    return g;
}

double polar_l2_norm(const HalfDensity& f, const PolarFrequencyGrid& g) {
    if (!f.matches(g)) throw std::invalid_argument("polar_l2_norm: shape mismatch");
    std::vector<double> terms(g.n_radial());
    for (std::size_t r = 0; r < g.n_radial(); ++r) {
        double lr = g.radial_nodes[r];
        double wr = g.radial_weights[r] * lr * lr;
        double s = 0.0;
        for (std::size_t a = 0; a < g.n_angular(); ++a)
            s += std::norm(f.at(r, a)) * g.angular_weights[a];
        terms[r] = s * wr;
    }
    return std::sqrt(pairwise_sum(terms));
}

complexd polar_inner(const HalfDensity& f, const HalfDensity& h, const PolarFrequencyGrid& g) {
    if (!f.matches(g) || !h.matches(g)) throw std::invalid_argument("polar_inner: shape mismatch");
    std::vector<complexd> terms(g.n_radial());
    for (std::size_t r = 0; r < g.n_radial(); ++r) {
        double lr = g.radial_nodes[r];
        double wr = g.radial_weights[r] * lr * lr;
        complexd s{};
        for (std::size_t a = 0; a < g.n_angular(); ++a)
            s += f.at(r, a) * std::conj(h.at(r, a)) * g.angular_weights[a];
        terms[r] = s * wr;
    }
    return pairwise_sum(terms);
}

double spatial_l2_norm(const SpatialField& F, const SpatialGrid& g) {
    if (F.size() != g.size()) throw std::invalid_argument("spatial_l2_norm: shape mismatch");
    std::vector<double> terms(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        terms[i] = std::norm(F.values[i]) * g.weights[i];
    return std::sqrt(pairwise_sum(terms));
}

double spatial_l2_norm(const VectorSpatialField& F, const SpatialGrid& g) {
    if (F.size() != g.size()) throw std::invalid_argument("spatial_l2_norm: shape mismatch");
    std::vector<double> terms(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        terms[i] = (std::norm(F.x[i]) + std::norm(F.y[i]) + std::norm(F.z[i])) * g.weights[i];
    return std::sqrt(pairwise_sum(terms));
}

complexd spatial_inner(const SpatialField& F, const SpatialField& H, const SpatialGrid& g) {
    if (F.size() != g.size() || H.size() != g.size())
        throw std::invalid_argument("spatial_inner: shape mismatch");
    std::vector<complexd> terms(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        terms[i] = F.values[i] * std::conj(H.values[i]) * g.weights[i];
    return pairwise_sum(terms);
}

namespace {

double mixed_norm_impl(const std::vector<double>& mod2, const std::vector<double>& modmax,
                       const SpatialGrid& g, const PhaseField& phase, const Vec3& omega,
                       NormExponent p, NormExponent q, double slab_width) {
    if (g.size() == 0) throw std::invalid_argument("mixed_norm: empty grid");
    if (slab_width <= 0.0) throw std::invalid_argument("mixed_norm: slab_width must be > 0");

    // Per-slab accumulators keyed by the bin index m = floor(u / width).
    // L^q = 2: integral of |F|^2 against dmu du = a^-1 dSigma, divided by the
    // slab width. L^q = inf: plain max over the slab.
    std::map<long long, double> acc;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double u_val;
        Vec3 grad;
        phase.u_and_grad(g.points[i], omega, u_val, grad);
        long long m = static_cast<long long>(std::floor(u_val / slab_width));
        if (q == NormExponent::Two) {
            double a = 1.0 / norm(grad);
            acc[m] += mod2[i] * g.weights[i] / a;
        } else {
            double& slot = acc[m];
            slot = std::max(slot, modmax[i]);
        }
    }
    if (p == NormExponent::Infinity) {
        double best = 0.0;
        for (const auto& [m, v] : acc) {
            double slab = q == NormExponent::Two ? std::sqrt(v / slab_width) : v;
            best = std::max(best, slab);
        }
        return best;
    }
    double total = 0.0;
    for (const auto& [m, v] : acc) {
        double slab = q == NormExponent::Two ? std::sqrt(v / slab_width) : v;
        total += slab * slab * slab_width;
    }
    return std::sqrt(total);
}

} // namespace

double mixed_norm(const SpatialField& F, const SpatialGrid& g, const PhaseField& phase,
                  const Vec3& omega, NormExponent p, NormExponent q, double slab_width) {
    if (F.size() != g.size()) throw std::invalid_argument("mixed_norm: shape mismatch");
    std::vector<double> mod2(g.size()), modmax(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        mod2[i] = std::norm(F.values[i]);
        modmax[i] = std::abs(F.values[i]);
    }
    return mixed_norm_impl(mod2, modmax, g, phase, omega, p, q, slab_width);
}

double mixed_norm(const std::vector<double>& F, const SpatialGrid& g, const PhaseField& phase,
                  const Vec3& omega, NormExponent p, NormExponent q, double slab_width) {
    if (F.size() != g.size()) throw std::invalid_argument("mixed_norm: shape mismatch");
    std::vector<double> mod2(g.size()), modmax(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        mod2[i] = F[i] * F[i];
        modmax[i] = std::abs(F[i]);
    }
    return mixed_norm_impl(mod2, modmax, g, phase, omega, p, q, slab_width);
}

} // namespace rfio
