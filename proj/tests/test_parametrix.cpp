#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rfio/fft.hpp"
#include "rfio/fio.hpp"
#include "rfio/parametrix.hpp"
#include "rfio/rng.hpp"
#include "rfio/smooth.hpp"

using namespace rfio;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPiCubed = 248.05021344239853;

InitialData gaussian_data(const SpatialGrid& sg, bool with_phi1) {
    SpatialField phi0(sg.size()), phi1(sg.size());
    for (std::size_t i = 0; i < sg.size(); ++i) {
        double r2 = norm2(sg.points[i]);
        phi0.values[i] = std::exp(-r2);
        phi1.values[i] = with_phi1 ? 2.0 * std::exp(-1.3 * r2) : 0.0;
    }
    return make_initial_data(std::move(phi0), std::move(phi1), sg);
}

HalfDensityPair gaussian_closed_form(const PolarFrequencyGrid& fg, bool with_phi1) {
    HalfDensityPair p{HalfDensity(fg), HalfDensity(fg)};
    for (std::size_t r = 0; r < fg.n_radial(); ++r) {
        double l = fg.radial_nodes[r];
        double f0 = std::pow(kPi, 1.5) * std::exp(-0.25 * l * l) / kTwoPiCubed;
        double f1 = with_phi1
                        ? 2.0 * std::pow(kPi / 1.3, 1.5) * std::exp(-0.25 * l * l / 1.3) /
                              kTwoPiCubed
                        : 0.0;
        for (std::size_t a = 0; a < fg.n_angular(); ++a) {
            p.f_plus.at(r, a) = 0.5 * (f0 + complexd(0, 1) * f1 / l);
            p.f_minus.at(r, a) = 0.5 * (f0 - complexd(0, 1) * f1 / l);
        }
    }
    return p;
}

double rel_density_err(const HalfDensity& got, const HalfDensity& want,
                       const PolarFrequencyGrid& fg) {
    HalfDensity d = got;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= want.values[i];
    return polar_l2_norm(d, fg) / polar_l2_norm(want, fg);
}

double rel_field_err(const SpatialField& got, const SpatialField& want, const SpatialGrid& sg) {
    double dn = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < sg.size(); ++i) {
        dn += std::norm(got.values[i] - want.values[i]) * sg.weights[i];
        nn += std::norm(want.values[i]) * sg.weights[i];
    }
    return std::sqrt(dn / nn);
}

} // namespace

TEST_CASE("flat half-wave operators coincide with the synthesis") {
    PolarFrequencyGrid fg = build_polar_grid(-2, 2, 6, 96);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 10);
    PhaseField flat = PhaseField::flat();
    HalfDensity f = random_band_limited_density(fg, 31, 0);

    SpatialField mp = apply_halfwave(HalfWaveKind::M, +1, flat, fg, sg, f);
    SpatialField mm = apply_halfwave(HalfWaveKind::M, -1, flat, fg, sg, f);
    SpatialField qp = apply_halfwave(HalfWaveKind::Q, +1, flat, fg, sg, f);
    SpatialField qm = apply_halfwave(HalfWaveKind::Q, -1, flat, fg, sg, f);
    for (std::size_t i = 0; i < sg.size(); ++i) {
        CHECK(std::abs(mp.values[i] - mm.values[i]) <= 1e-13 * std::abs(mp.values[i]) + 1e-16);
        CHECK(std::abs(mp.values[i] - qp.values[i]) <= 1e-13 * std::abs(mp.values[i]) + 1e-16);
        CHECK(std::abs(mp.values[i] - qm.values[i]) <= 1e-13 * std::abs(mp.values[i]) + 1e-16);
    }
}

TEST_CASE("flat grad M equals i P(lambda f) exactly") {
    PolarFrequencyGrid fg = build_polar_grid(-2, 2, 6, 96);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 8);
    PhaseField flat = PhaseField::flat();
    HalfDensity f = random_band_limited_density(fg, 32, 0);
    HalfDensity lf = f;
    for (std::size_t r = 0; r < fg.n_radial(); ++r)
        for (std::size_t a = 0; a < fg.n_angular(); ++a) lf.at(r, a) *= fg.radial_nodes[r];

    for (int sign : {+1, -1}) {
        VectorSpatialField g = apply_halfwave_vector(HalfWaveKind::GradM, sign, flat, fg, sg, f);
        VectorSpatialField p = apply_halfwave_vector(HalfWaveKind::P, sign, flat, fg, sg, lf);
        complexd is(0.0, sign > 0 ? 1.0 : -1.0);
        for (std::size_t i = 0; i < sg.size(); ++i) {
            CHECK(std::abs(g.x[i] - is * p.x[i]) <= 1e-12 * (std::abs(g.x[i]) + 1e-12));
            CHECK(std::abs(g.y[i] - is * p.y[i]) <= 1e-12 * (std::abs(g.y[i]) + 1e-12));
            CHECK(std::abs(g.z[i] - is * p.z[i]) <= 1e-12 * (std::abs(g.z[i]) + 1e-12));
        }
    }
}

TEST_CASE("Q - M is small of order eps with stable constant") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 2, 6, 96);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 12);
    auto qm_norm = [&](double eps) {
        PhaseField p = PhaseField::perturbed(eps);
        double worst = 0.0;
        for (int s = 0; s < 3; ++s) {
            HalfDensity f = random_band_limited_density(fg, 33, s);
            double fn = polar_l2_norm(f, fg);
            SpatialField q = apply_halfwave(HalfWaveKind::Q, +1, p, fg, sg, f);
            SpatialField m = apply_halfwave(HalfWaveKind::M, +1, p, fg, sg, f);
            double dn = 0.0;
            for (std::size_t i = 0; i < sg.size(); ++i)
                dn += std::norm(q.values[i] - m.values[i]) * sg.weights[i];
            worst = std::max(worst, std::sqrt(dn) / fn);
        }
        return worst;
    };
    double c1 = qm_norm(0.04) / 0.04;
    double c2 = qm_norm(0.02) / 0.02;
    CHECK(c1 / c2 > 0.5);
    CHECK(c1 / c2 < 2.0);
}

TEST_CASE("system adjoint probe") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 2, 5, 64);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 8);
    OperatorSystem sys(PhaseField::perturbed(0.05), fg, sg, 0.0);

    Rng rng(44);
    HalfDensityPair g{random_band_limited_density(fg, 44, 0),
                      random_band_limited_density(fg, 44, 1)};
    SystemField y(sg.size());
    for (std::size_t i = 0; i < sg.size(); ++i) {
        y.vec.x[i] = complexd(rng.next_gaussian(), rng.next_gaussian());
        y.vec.y[i] = complexd(rng.next_gaussian(), rng.next_gaussian());
        y.vec.z[i] = complexd(rng.next_gaussian(), rng.next_gaussian());
        y.scalar.values[i] = complexd(rng.next_gaussian(), rng.next_gaussian());
    }
    complexd lhs = sys.inner_target(sys.apply(g), y);
    complexd rhs = sys.inner_pair(g, sys.apply_adjoint(y));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
}

TEST_CASE("flat system maps the closed-form pair to the targets") {
    PolarFrequencyGrid fg = build_polar_grid(-5, 2, 8, 192);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 16);
    OperatorSystem sys(PhaseField::flat(), fg, sg, 0.0);
    InitialData data = gaussian_data(sg, true);
    // the unknowns are lambda-weighted
    HalfDensityPair fpm = gaussian_closed_form(fg, true);
    HalfDensityPair g = fpm;
    for (std::size_t r = 0; r < fg.n_radial(); ++r)
        for (std::size_t a = 0; a < fg.n_angular(); ++a) {
            g.f_plus.at(r, a) *= fg.radial_nodes[r];
            g.f_minus.at(r, a) *= fg.radial_nodes[r];
        }
    SystemField lhs = sys.apply(g);
    SystemField y = sys.target_from_data(data);
    double dn = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < sg.size(); ++i) {
        dn += std::norm(lhs.vec.x[i] - y.vec.x[i]) + std::norm(lhs.vec.y[i] - y.vec.y[i]) +
              std::norm(lhs.vec.z[i] - y.vec.z[i]) +
              std::norm(lhs.scalar.values[i] - y.scalar.values[i]);
        nn += std::norm(y.vec.x[i]) + std::norm(y.vec.y[i]) + std::norm(y.vec.z[i]) +
              std::norm(y.scalar.values[i]);
    }
    CHECK(std::sqrt(dn / nn) < 1e-3);

    // zero data gives the zero target
    SpatialField z0(sg.size()), z1(sg.size());
    InitialData zero = make_initial_data(std::move(z0), std::move(z1), sg);
    SystemField yz = sys.target_from_data(zero);
    CHECK(sys.norm_target(yz) == 0.0);
}

TEST_CASE("flat solve recovers the closed form (both data variants)") {
    PolarFrequencyGrid fg = build_polar_grid(-5, 2, 8, 192);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 16);
    OperatorSystem sys(PhaseField::flat(), fg, sg, 1e-8 * kTwoPiCubed);

    for (bool with_phi1 : {false, true}) {
        InitialData data = gaussian_data(sg, with_phi1);
        SolveResult res = solve_data(sys, data, 1e-8, 150);
        CHECK(res.converged);
        HalfDensityPair expect = gaussian_closed_form(fg, with_phi1);
        CHECK(rel_density_err(res.pair.f_plus, expect.f_plus, fg) < 1e-3);
        CHECK(rel_density_err(res.pair.f_minus, expect.f_minus, fg) < 1e-3);
    }
}

TEST_CASE("solve: uniqueness across starting points and homogeneity of the estimate") {
    PolarFrequencyGrid fg = build_polar_grid(-3, 1, 6, 96);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 10);
    OperatorSystem sys(PhaseField::perturbed(0.05), fg, sg, 1e-8 * kTwoPiCubed);
    InitialData data = gaussian_data(sg, true);
    double tol = 1e-7;
    SolveResult a = solve_data(sys, data, tol, 200);
    HalfDensityPair start{random_band_limited_density(fg, 55, 0),
                          random_band_limited_density(fg, 55, 1)};
    for (auto& v : start.f_plus.values) v *= 0.1;
    for (auto& v : start.f_minus.values) v *= 0.1;
    SolveResult b = solve_data(sys, data, tol, 200, start);
    CHECK(a.converged);
    CHECK(b.converged);
    double dd = rel_density_err(a.weighted.f_plus, b.weighted.f_plus, fg);
    CHECK(dd < 10 * tol);

    double r1 = estimate_ratio(a, data, sys);
    InitialData scaled = data;
    for (auto& v : scaled.phi0.values) v *= 3.0;
    for (auto& v : scaled.phi1.values) v *= 3.0;
    for (int c = 0; c < 3; ++c)
        for (auto& v : scaled.grad_phi0.comp(c)) v *= 3.0;
    SolveResult s = solve_data(sys, scaled, tol, 200);
    double r2 = estimate_ratio(s, scaled, sys);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-6));
}

TEST_CASE("perturbed solutions approach the flat closed form as eps -> 0") {
    PolarFrequencyGrid fg = build_polar_grid(-4, 1, 6, 96);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 12);
    InitialData data = gaussian_data(sg, true);
    HalfDensityPair flat_pair = gaussian_closed_form(fg, true);
    double nf_p = 0.0, nf_m = 0.0;
    {
        HalfDensity wp = flat_pair.f_plus, wm = flat_pair.f_minus;
        for (std::size_t r = 0; r < fg.n_radial(); ++r)
            for (std::size_t a = 0; a < fg.n_angular(); ++a) {
                wp.at(r, a) *= fg.radial_nodes[r];
                wm.at(r, a) *= fg.radial_nodes[r];
            }
        nf_p = polar_l2_norm(wp, fg);
        nf_m = polar_l2_norm(wm, fg);
    }
    std::vector<double> devs;
    for (double eps : {0.04, 0.02, 0.01}) {
        OperatorSystem sys(PhaseField::perturbed(eps), fg, sg, 1e-8 * kTwoPiCubed);
        SolveResult res = solve_data(sys, data, 1e-7, 200);
        double np = polar_l2_norm(res.weighted.f_plus, fg);
        double nm = polar_l2_norm(res.weighted.f_minus, fg);
        devs.push_back(std::abs(np - nf_p) + std::abs(nm - nf_m));
    }
    CHECK(devs[1] < devs[0]);
    CHECK(devs[2] < devs[1]);
}

TEST_CASE("flat evolution: trace, spectral oracle, time symmetry") {
    PolarFrequencyGrid fg = build_polar_grid(-3, 1, 8, 128);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 16);
    PhaseField flat = PhaseField::flat();
    OperatorSystem sys(flat, fg, sg, 1e-8 * kTwoPiCubed);
    InitialData data = gaussian_data(sg, true);
    SolveResult res = solve_data(sys, data, 1e-8, 150);

    SpatialField t0 = evolve_flat(res.pair, 0.0, flat, fg, sg);
    CHECK(rel_field_err(t0, data.phi0, sg) < 1e-3);

    SpatialField evolved = evolve_flat(res.pair, 0.5, flat, fg, sg);
    SpatialField oracle = evolve_spectral(data, 0.5, sg);
    CHECK(rel_field_err(evolved, oracle, sg) < 1e-3);

    // even data (phi1 = 0) give a field even in t
    InitialData even = gaussian_data(sg, false);
    SolveResult res_even = solve_data(sys, even, 1e-8, 150);
    SpatialField fwd = evolve_flat(res_even.pair, 0.3, flat, fg, sg);
    SpatialField bwd = evolve_flat(res_even.pair, -0.3, flat, fg, sg);
    double dn = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < sg.size(); ++i) {
        dn += std::norm(fwd.values[i] - bwd.values[i]) * sg.weights[i];
        nn += std::norm(fwd.values[i]) * sg.weights[i];
    }
    CHECK(std::sqrt(dn / nn) < 1e-6);

    CHECK_THROWS(evolve_flat(res.pair, 0.5, PhaseField::perturbed(0.01), fg, sg));
}
