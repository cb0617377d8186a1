#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rfio/kernel.hpp"
#include "rfio/rng.hpp"
#include "rfio/smooth.hpp"

using namespace rfio;

TEST_CASE("kernel at x = y is the product of the 1-D quadratures") {
    PolarFrequencyGrid fg = build_polar_grid(2, 5, 8, 1024);
    AngularPatchFamily fam = build_angular_family(4, 1.0);
    KernelQuadrature quad = make_kernel_quadrature(fg, fam, 0);
    PhaseField flat = PhaseField::flat();
    Vec3 x{0.3, -0.2, 0.9};
    complexd k = evaluate_kernel(flat, quad, x, x);
    double radial = 0.0;
    for (std::size_t r = 0; r < quad.lambda.size(); ++r)
        radial += quad.lambda[r] * quad.lambda[r] * quad.lambda_w[r];
    double angular = 0.0;
    for (double w : quad.omega_w) angular += w;
    CHECK(std::abs(k.imag()) < 1e-10 * std::abs(k.real()));
    CHECK(std::abs(k.real() - radial * angular) < 1e-10 * radial * angular);
}

TEST_CASE("kernel hermitian symmetry") {
    PolarFrequencyGrid fg = build_polar_grid(2, 5, 8, 1024);
    AngularPatchFamily fam = build_angular_family(4, 1.0);
    KernelQuadrature quad = make_kernel_quadrature(fg, fam, 3);
    PhaseField p = PhaseField::perturbed(0.05);
    Rng rng(5);
    for (int i = 0; i < 10; ++i) {
        Vec3 x{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        Vec3 y{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        complexd kxy = evaluate_kernel(p, quad, x, y);
        complexd kyx = evaluate_kernel(p, quad, y, x);
        CHECK(std::abs(kxy - std::conj(kyx)) <= 1e-12 * std::max(1.0, std::abs(kxy)));
    }
}

TEST_CASE("decay envelope closed-form values") {
    PhaseField flat = PhaseField::flat();
    int j = 4;
    Vec3 nu{0, 0, 1};
    Vec3 x{0.4, 0.1, -0.2};
    CHECK(decay_envelope(flat, j, nu, x, x) == doctest::Approx(std::exp2(2 * j)));

    // flat with tangential difference zero and 2^j |du| = 9 -> 2^{2j} / 100
    Vec3 y = x + nu * (9.0 / std::exp2(j));
    CHECK(decay_envelope(flat, j, nu, x, y) ==
          doctest::Approx(std::exp2(2 * j) / 100.0).epsilon(1e-12));
    CHECK(decay_envelope(flat, j, nu, y, x) ==
          doctest::Approx(decay_envelope(flat, j, nu, x, y)).epsilon(1e-12));
}

TEST_CASE("flat kernel is translation invariant") {
    PolarFrequencyGrid fg = build_polar_grid(2, 5, 8, 1024);
    AngularPatchFamily fam = build_angular_family(4, 1.0);
    KernelQuadrature quad = make_kernel_quadrature(fg, fam, 1);
    PhaseField flat = PhaseField::flat();
    Vec3 x{0.2, 0.3, -0.1}, y{-0.4, 0.1, 0.5}, t{5.0, -3.0, 2.0};
    complexd a = evaluate_kernel(flat, quad, x, y);
    complexd b = evaluate_kernel(flat, quad, x + t, y + t);
    CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
}

TEST_CASE("perturbed kernel agrees with flat outside the perturbation zone") {
    PolarFrequencyGrid fg = build_polar_grid(2, 5, 8, 1024);
    AngularPatchFamily fam = build_angular_family(4, 1.0);
    KernelQuadrature quad = make_kernel_quadrature(fg, fam, 2);
    PhaseField flat = PhaseField::flat();
    PhaseField pert = PhaseField::perturbed(0.2);
    Vec3 x{2.5, 0.5, 1.0}, y{2.2, -0.8, 2.0};
    complexd a = evaluate_kernel(flat, quad, x, y);
    complexd b = evaluate_kernel(pert, quad, x, y);
    CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
}

TEST_CASE("kernel matches doubled-resolution quadrature") {
    PolarFrequencyGrid fg = build_polar_grid(2, 5, 8, 512);
    PolarFrequencyGrid fg2 = build_polar_grid(2, 5, 8, 2048);
    AngularPatchFamily fam = build_angular_family(3, 1.0);
    KernelQuadrature quad = make_kernel_quadrature(fg, fam, 4, 4);
    KernelQuadrature quad2 = make_kernel_quadrature(fg2, fam, 4, 8);
    PhaseField pert = PhaseField::perturbed(0.05);
    Rng rng(15);
    for (int i = 0; i < 6; ++i) {
        Vec3 x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        Vec3 y = x + Vec3{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
        complexd a = evaluate_kernel(pert, quad, x, y);
        complexd b = evaluate_kernel(pert, quad2, x, y);
        CHECK(std::abs(a - b) <= 0.01 * std::abs(b) + 1e-9);
    }
}

TEST_CASE("far pairs have small kernel values") {
    PolarFrequencyGrid fg = build_polar_grid(2, 5, 8, 2048);
    AngularPatchFamily fam = build_angular_family(4, 1.0);
    std::size_t nu = 0;
    double best = -2.0;
    for (std::size_t i = 0; i < fam.size(); ++i)
        if (fam.centers[i].z > best) {
            best = fam.centers[i].z;
            nu = i;
        }
    KernelQuadrature quad = make_kernel_quadrature(fg, fam, nu);
    PhaseField flat = PhaseField::flat();
    Vec3 x{0.1, 0.2, 0.0};
    double kxx = std::abs(evaluate_kernel(flat, quad, x, x));
    // envelope argument 2^j |du| > 100
    Vec3 y = x + fam.centers[nu] * (150.0 / std::exp2(4));
    CHECK(std::abs(evaluate_kernel(flat, quad, x, y)) < 1e-2 * kxx);
}

TEST_CASE("decay ratio scan is stable across j for the flat phase") {
    PolarFrequencyGrid fg = build_polar_grid(3, 6, 8, 2048);
    PhaseField flat = PhaseField::flat();
    std::vector<double> sups;
    for (int j : {4, 5}) {
        AngularPatchFamily fam = build_angular_family(j, 1.0);
        KernelProbe probe;
        probe.j = j;
        probe.nu = 0;
        probe.seed = 77;
        probe.shells_u = 4;
        probe.shells_dw = 4;
        probe.pairs_per_shell = 6;
        DecayScanReport rep = decay_ratio_scan(probe, flat, fg, fam);
        CHECK(rep.sup_ratio > 0.0);
        sups.push_back(rep.sup_ratio);
    }
    double spread = std::max(sups[0], sups[1]) / std::min(sups[0], sups[1]);
    CHECK(spread < 4.0);
}

TEST_CASE("schur row sums are j-uniform after flat normalization") {
    PolarFrequencyGrid fg = build_polar_grid(2, 5, 8, 1024);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 12);
    PhaseField flat = PhaseField::flat();
    PhaseField pert = PhaseField::perturbed(0.05);
    std::vector<double> normalized;
    for (int j : {3, 4}) {
        AngularPatchFamily fam = build_angular_family(j, 1.0);
        KernelQuadrature quad = make_kernel_quadrature(fg, fam, 0);
        double base = schur_row_sum(flat, quad, Vec3{0, 0, 0}, sg);
        CHECK(base > 0.0);
        CHECK(schur_row_sum(flat, quad, Vec3{0, 0, 0}, sg) / base == 1.0);
        normalized.push_back(schur_row_sum(pert, quad, Vec3{0.4, -0.2, 0.3}, sg) / base);
    }
    for (double v : normalized) CHECK(v < 2.0);
    double spread = std::max(normalized[0], normalized[1]) /
                    std::min(normalized[0], normalized[1]);
    CHECK(spread < 2.0);
}

TEST_CASE("flat comparison gap: zero for flat, decreasing in delta and eps") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 3, 8, 512);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 12);
    HalfDensity f = smooth_test_density(fg);
    int j = 2;

    FioOperator flat_op(PhaseField::flat(), SymbolField::unit(), fg, sg, 1.0);
    ComparisonGapResult flat_gap = flat_comparison_gap(flat_op, f, j, 0);
    CHECK(!flat_gap.skipped);
    CHECK(flat_gap.gap < 1e-6);

    auto gap_at = [&](double eps, double delta) {
        FioOperator op(PhaseField::perturbed(eps), SymbolField::unit(), fg, sg, delta);
        const auto& fam = op.angular_family(j);
        std::size_t nu = 0;
        double best = -2.0;
        for (std::size_t i = 0; i < fam.size(); ++i)
            if (fam.centers[i].z > best) {
                best = fam.centers[i].z;
                nu = i;
            }
        return flat_comparison_gap(op, f, j, nu).gap;
    };
    double g_eps = gap_at(0.04, 1.0);
    double g_eps_half = gap_at(0.02, 1.0);
    CHECK(g_eps_half < g_eps);
    double g_delta_half = gap_at(0.04, 0.5);
    CHECK(g_delta_half < g_eps);

    FioOperator bad(PhaseField::flat(), SymbolField::lapse_inverse(), fg, sg, 1.0);
    CHECK_THROWS(flat_comparison_gap(bad, f, j, 0));
}
