#include "rfio/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rfio/smooth.hpp"

namespace rfio {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// phi(l) = chi(2l) makes the telescoping sum with psi(l) = chi(l) - chi(2l)
// exactly 1 on [0, 2^j_max]
double LittlewoodPaleyFamily::low_cutoff(double lambda) const { return lp_chi(2.0 * lambda); }

double LittlewoodPaleyFamily::band(double lambda) const { return lp_psi(lambda); }

double LittlewoodPaleyFamily::band_j(int j, double lambda) const {
    if (j == -1) return lp_chi(2.0 * lambda);
    return lp_psi(std::exp2(-j) * lambda);
}

double LittlewoodPaleyFamily::partition_sum(double lambda) const {
    double s = low_cutoff(lambda);
    for (int j = 0; j <= j_max; ++j) s += lp_psi(std::exp2(-j) * lambda);
    return s;
}

int LittlewoodPaleyFamily::lowest_band(double lambda) {
    if (lambda <= 0.0) return -1;
    return static_cast<int>(std::floor(std::log2(lambda))) - 1;
}

LittlewoodPaleyFamily build_lp_family(int j_max) {
    if (j_max < 0) throw std::invalid_argument("build_lp_family: j_max must be >= 0");
    LittlewoodPaleyFamily f;
    f.j_max = j_max;
    return f;
}

double AngularPatchFamily::cap(std::size_t nu, const Vec3& omega) const {
    double c = std::clamp(dot(centers[nu], omega), -1.0, 1.0);
    double d = std::acos(c);
    if (d >= cap_radius) return 0.0;
    if (d <= plateau_radius) return 1.0;
    return smooth_step((cap_radius - d) / (cap_radius - plateau_radius));
}

double AngularPatchFamily::cap_sum(const Vec3& omega) const {
    double s = 0.0;
    for (std::size_t nu = 0; nu < centers.size(); ++nu) s += cap(nu, omega);
    return s;
}

double AngularPatchFamily::eta(std::size_t nu, const Vec3& omega) const {
    double b = cap(nu, omega);
    if (b == 0.0) return 0.0;
    return b / cap_sum(omega);
}

std::vector<std::size_t> AngularPatchFamily::touching(const Vec3& omega) const {
    std::vector<std::size_t> out;
    double cos_r = std::cos(cap_radius);
    for (std::size_t nu = 0; nu < centers.size(); ++nu)
        if (dot(centers[nu], omega) > cos_r) out.push_back(nu);
    return out;
}

void AngularPatchFamily::require_resolution(const PolarFrequencyGrid& grid, int min_nodes) const {
    double cap_area = 2.0 * kPi * (1.0 - std::cos(cap_radius));
    double nodes_per_patch = grid.n_angular() * cap_area / (4.0 * kPi);
    if (nodes_per_patch < min_nodes)
        throw std::invalid_argument(
            "angular family too fine for the grid: fewer than " + std::to_string(min_nodes) +
            " quadrature nodes per patch (j too large for angular_count)");
}

AngularPatchFamily build_angular_family(int j, double delta) {
    if (j < 0) throw std::invalid_argument("build_angular_family: j must be >= 0");
    if (delta <= 0.0 || delta > 1.0)
        throw std::invalid_argument("build_angular_family: delta must be in (0, 1]");
    AngularPatchFamily f;
    f.j = j;
    f.delta = delta;
    double scale = delta * std::exp2(-0.5 * j);
    // center count ~ pi 2^j / delta^2 (spacing 2*scale on a Fibonacci layout),
    // clamped to at least 12 patches
    std::size_t n = std::max<std::size_t>(
        12, static_cast<std::size_t>(std::lround(4.0 * kPi / (4.0 * scale * scale))));
    f.centers.resize(n);
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
        double z = 1.0 - (2.0 * i + 1.0) / n;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = golden_angle * i;
        f.centers[i] = {r * std::cos(phi), r * std::sin(phi), z};
    }
    // support diameter = 2 * cap_radius <= 4 * scale as required
    f.cap_radius = std::min(2.0 * scale, kPi);
    f.plateau_radius = 0.5 * f.cap_radius;
    return f;
}

double SecondFrequencyFamily::bump(int k, double lambda) const {
    if (k < 0 || k >= count) throw std::invalid_argument("SecondFrequencyFamily: bad index");
    if (lambda < lambda_lo || lambda > lambda_hi) return 0.0;
    if (count == 1) return 1.0;
    double width = (lambda_hi - lambda_lo) / count;
    double left = lambda_lo + k * width;
    double right = left + width;
    // smooth complementary transitions centered at the interior breakpoints
    double rise = k == 0 ? 1.0 : smooth_step((lambda - (left - 0.5 * transition)) / transition);
    double fall = k == count - 1
                      ? 1.0
                      : 1.0 - smooth_step((lambda - (right - 0.5 * transition)) / transition);
    return rise * fall;
}

double SecondFrequencyFamily::partition_sum(double lambda) const {
    double s = 0.0;
    for (int k = 0; k < count; ++k) s += bump(k, lambda);
    return s;
}

SecondFrequencyFamily build_second_frequency_family(int j, double alpha, double separation) {
    if (!(alpha > 0.0 && alpha < 0.2))
        throw std::invalid_argument("build_second_frequency_family: alpha must be in (0, 1/5)");
    if (!(separation > 0.0 && separation <= 2.0))
        throw std::invalid_argument("build_second_frequency_family: separation in (0, 2]");
    SecondFrequencyFamily f;
    f.j = j;
    f.alpha = alpha;
    f.separation = separation;
    f.count = std::max(1, static_cast<int>(std::ceil(std::pow(separation, -alpha))));
    f.lambda_lo = std::exp2(j - 1);
    f.lambda_hi = std::exp2(j + 1);
    double width = (f.lambda_hi - f.lambda_lo) / f.count;
    f.transition = 0.5 * width;
    return f;
}

} // namespace rfio
