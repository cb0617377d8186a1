#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rfio/fio.hpp"
#include "rfio/rng.hpp"

using namespace rfio;

namespace {
constexpr double kTwoPiPow32 = 15.749609945722419;

HalfDensity gaussian_density(const PolarFrequencyGrid& g) {
    HalfDensity f(g);
    for (std::size_t r = 0; r < g.n_radial(); ++r)
        for (std::size_t a = 0; a < g.n_angular(); ++a)
            f.at(r, a) = std::exp(-0.5 * g.radial_nodes[r] * g.radial_nodes[r]);
    return f;
}
} // namespace

TEST_CASE("flat unit-symbol apply reproduces the gaussian Fourier identity") {
    PolarFrequencyGrid fg = build_polar_grid(-6, 1, 10, 256);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 20);
    FioOperator op(PhaseField::flat(), SymbolField::unit(), fg, sg);
    SpatialField uf = apply(op, gaussian_density(fg));
    double dn = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < sg.size(); ++i) {
        double expect = kTwoPiPow32 * std::exp(-0.5 * norm2(sg.points[i]));
        dn += std::norm(uf.values[i] - complexd(expect, 0)) * sg.weights[i];
        nn += expect * expect * sg.weights[i];
    }
    CHECK(std::sqrt(dn / nn) < 1e-3);
}

TEST_CASE("apply: zero density, linearity") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 2, 6, 96);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 12);
    FioOperator op(PhaseField::perturbed(0.05), SymbolField::lapse_inverse(), fg, sg);

    HalfDensity zero(fg);
    SpatialField uz = apply(op, zero);
    for (auto v : uz.values) CHECK(v == complexd{});

    HalfDensity f = random_band_limited_density(fg, 5, 0);
    HalfDensity g = random_band_limited_density(fg, 5, 1);
    complexd alpha(0.7, -0.3), beta(-1.1, 0.2);
    HalfDensity combo(fg);
    for (std::size_t i = 0; i < combo.values.size(); ++i)
        combo.values[i] = alpha * f.values[i] + beta * g.values[i];
    SpatialField u_combo = apply(op, combo);
    SpatialField uf = apply(op, f);
    SpatialField ug = apply(op, g);
    double dn = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < sg.size(); ++i) {
        complexd lin = alpha * uf.values[i] + beta * ug.values[i];
        dn += std::norm(u_combo.values[i] - lin);
        nn += std::norm(lin);
    }
    CHECK(std::sqrt(dn / nn) < 1e-12);
}

TEST_CASE("perturbed apply agrees with doubled-resolution quadrature") {
    SpatialGrid sg = SpatialGrid::lattice(4.0, 12);
    PolarFrequencyGrid fg = build_polar_grid(-1, 2, 8, 128);
    PolarFrequencyGrid fg2 = build_polar_grid(-1, 2, 16, 256);
    PhaseField p = PhaseField::perturbed(0.05);
    auto smooth_on = [](const PolarFrequencyGrid& g) { return smooth_test_density(g); };
    FioOperator op(p, SymbolField::unit(), fg, sg);
    FioOperator op2(p, SymbolField::unit(), fg2, sg);
    SpatialField a = apply(op, smooth_on(fg));
    SpatialField b = apply(op2, smooth_on(fg2));
    double dn = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < sg.size(); ++i) {
        dn += std::norm(a.values[i] - b.values[i]) * sg.weights[i];
        nn += std::norm(b.values[i]) * sg.weights[i];
    }
    CHECK(std::sqrt(dn / nn) < 0.01);
}

TEST_CASE("piece decompositions recombine at all three levels") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 3, 6, 192);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 12);
    FioOperator op(PhaseField::perturbed(0.05), SymbolField::unit(), fg, sg, 1.0);
    HalfDensity f = random_band_limited_density(fg, 9, 0);

    SpatialField uf = apply(op, f);
    double un = spatial_l2_norm(uf, sg);
    SpatialField sum(sg.size());
    for (int j = -1; j <= op.family_j_max(); ++j) {
        SpatialField piece = apply_piece(op, f, j);
        for (std::size_t i = 0; i < sum.size(); ++i) sum.values[i] += piece.values[i];
    }
    double dj = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i)
        dj += std::norm(sum.values[i] - uf.values[i]) * sg.weights[i];
    CHECK(std::sqrt(dj) / un < 1e-8);

    int j = 2;
    SpatialField uj = apply_piece(op, f, j);
    SpatialField sum_nu(sg.size());
    for (std::size_t nu = 0; nu < op.angular_family(j).size(); ++nu) {
        SpatialField piece = apply_piece(op, f, j, nu);
        for (std::size_t i = 0; i < sum_nu.size(); ++i) sum_nu.values[i] += piece.values[i];
    }
    double dnu = 0.0, njn = 0.0;
    for (std::size_t i = 0; i < sum_nu.size(); ++i) {
        dnu += std::norm(sum_nu.values[i] - uj.values[i]) * sg.weights[i];
        njn += std::norm(uj.values[i]) * sg.weights[i];
    }
    CHECK(std::sqrt(dnu / njn) < 1e-8);

    SecondFrequencyFamily fam2 = build_second_frequency_family(j, 0.125, std::exp2(-16));
    CHECK(fam2.count == 4);
    std::size_t nu0 = op.angular_family(j).size() / 3;
    SpatialField ujnu = apply_piece(op, f, j, nu0);
    SpatialField sum_k(sg.size());
    for (int k = 0; k < fam2.count; ++k) {
        SpatialField piece = apply_piece(op, f, j, nu0, k, &fam2);
        for (std::size_t i = 0; i < sum_k.size(); ++i) sum_k.values[i] += piece.values[i];
    }
    double dk = 0.0, nk = 0.0;
    for (std::size_t i = 0; i < sum_k.size(); ++i) {
        dk += std::norm(sum_k.values[i] - ujnu.values[i]) * sg.weights[i];
        nk += std::norm(ujnu.values[i]) * sg.weights[i];
    }
    CHECK(std::sqrt(dk / nk) < 1e-8);

    CHECK_THROWS(apply_piece(op, f, 99));
    CHECK_THROWS(apply_piece(op, f, j, std::size_t(1 << 20)));
    CHECK_THROWS(apply_piece(op, f, j, nu0, 7, &fam2));
}

TEST_CASE("spectrum: Pythagoras, octave locality, zero density") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 4, 8, 128);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 8);
    FioOperator op(PhaseField::flat(), SymbolField::unit(), fg, sg, 1.0);

    HalfDensity f = random_band_limited_density(fg, 11, 2);
    PieceSpectrum sp = spectrum(op, f);
    double total2 = sp.total_norm * sp.total_norm;
    double sum_j = 0.0;
    for (double gj : sp.gamma_j) sum_j += gj * gj;
    CHECK(std::abs(sum_j - total2) / total2 < 1e-8);
    double sum_nu = 0.0;
    for (const auto& [j, gnu] : sp.gamma_j_nu)
        for (double g : gnu) sum_nu += g * g;
    sum_nu += sp.gamma_j[0] * sp.gamma_j[0]; // the low piece has no patches
    CHECK(std::abs(sum_nu - total2) / total2 < 1e-8);

    // density supported in one octave -> at most 3 adjacent gamma_j nonzero
    HalfDensity onej(fg);
    for (std::size_t r = 0; r < fg.n_radial(); ++r) {
        double l = fg.radial_nodes[r];
        if (l >= 4.0 && l <= 8.0)
            for (std::size_t a = 0; a < fg.n_angular(); ++a) onej.at(r, a) = 1.0;
    }
    PieceSpectrum sp1 = spectrum(op, onej);
    int nonzero = 0;
    for (double gj : sp1.gamma_j)
        if (gj > 1e-12 * sp1.total_norm) ++nonzero;
    CHECK(nonzero <= 3);

    HalfDensity zero(fg);
    PieceSpectrum sp0 = spectrum(op, zero);
    for (double gj : sp0.gamma_j) CHECK(gj == 0.0);
}

TEST_CASE("correlation: self term and flat disjoint octaves") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 4, 8, 192);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 16);
    FioOperator op(PhaseField::flat(), SymbolField::unit(), fg, sg);
    HalfDensity f = smooth_test_density(fg);

    complexd self = correlation(op, f, PieceIndex{2, {}, {}}, PieceIndex{2, {}, {}});
    SpatialField piece = apply_piece(op, f, 2);
    double n2 = spatial_l2_norm(piece, sg);
    CHECK(std::abs(self.imag()) < 1e-10 * std::abs(self.real()));
    CHECK(std::abs(self.real() - n2 * n2) < 1e-10 * n2 * n2);

    PieceSpectrum sp = spectrum(op, f);
    complexd far = correlation(op, f, PieceIndex{0, {}, {}}, PieceIndex{4, {}, {}});
    double g0 = sp.gamma_j[1], g4 = sp.gamma_j[5];
    REQUIRE(g0 > 0.0);
    REQUIRE(g4 > 0.0);
    CHECK(std::abs(far) <= 1e-6 * g0 * g4);
}

TEST_CASE("frequency orthogonality scan: flat ratios are tiny") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 4, 8, 192);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 16);
    FioOperator op(PhaseField::flat(), SymbolField::unit(), fg, sg);
    HalfDensity f = smooth_test_density(fg);
    DecayTable t = orthogonality_scan(op, f, ScanMode::Frequency);
    for (const auto& r : t.rows)
        if (r.separation > 2) CHECK(r.measured < 1e-4);
    CHECK(t.fitted_c < 1e-3);
}

TEST_CASE("angular scan medians decrease with separation") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 4, 8, 256);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 16);
    FioOperator op(PhaseField::perturbed(0.05), SymbolField::unit(), fg, sg, 1.0);
    HalfDensity f = smooth_test_density(fg);
    DecayTable t = orthogonality_scan(op, f, ScanMode::Angle, 3);
    REQUIRE(t.rows.size() > 20);
    auto med = t.binned_medians(5);
    REQUIRE(med.size() >= 3);
    CHECK(med.back().second < med.front().second);
}

TEST_CASE("diagonal term: flat bound and vanishing patch") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 3, 8, 256);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 16);
    FioOperator op(PhaseField::flat(), SymbolField::unit(), fg, sg, 1.0);
    HalfDensity f = smooth_test_density(fg);
    int j = 2;
    const auto& fam = op.angular_family(j);
    for (std::size_t nu : {std::size_t(0), fam.size() / 2, fam.size() - 1}) {
        DiagonalResult d = diagonal_norm(op, f, j, nu);
        if (d.skipped) continue;
        CHECK(d.ratio <= kTwoPiPow32 * (1.0 + 1e-3));
    }

    // density vanishing on a patch -> zero
    HalfDensity g(fg);
    const auto& nodes = op.patch_nodes(j)[0];
    std::vector<char> inside(fg.n_angular(), 0);
    for (std::size_t t = 0; t < nodes.node.size(); ++t) inside[nodes.node[t]] = 1;
    for (std::size_t r = 0; r < fg.n_radial(); ++r)
        for (std::size_t a = 0; a < fg.n_angular(); ++a)
            if (!inside[a]) g.at(r, a) = 1.0;
    DiagonalResult d0 = diagonal_norm(op, g, j, 0);
    CHECK((d0.skipped || d0.norm == 0.0));
}

TEST_CASE("operator norm: flat Plancherel, zero symbol, eps scaling") {
    PolarFrequencyGrid fg = build_polar_grid(-2, 2, 8, 128);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 16);
    FioOperator flat(PhaseField::flat(), SymbolField::unit(), fg, sg);
    OperatorNormResult res = operator_norm(flat, 2, 12, 99);
    CHECK(std::abs(res.sigma / kTwoPiPow32 - 1.0) < 0.01);

    FioOperator zero(PhaseField::flat(), SymbolField::zero(), fg, sg);
    CHECK(operator_norm(zero, 1, 6, 99).sigma == 0.0);

    FioOperator small(PhaseField::perturbed(0.02), SymbolField::lapse_inverse_minus_one(), fg,
                      sg);
    FioOperator half(PhaseField::perturbed(0.01), SymbolField::lapse_inverse_minus_one(), fg,
                     sg);
    double s1 = operator_norm(small, 1, 10, 99).sigma;
    double s2 = operator_norm(half, 1, 10, 99).sigma;
    double ratio = s1 / s2;
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.4);

    CHECK_THROWS(operator_norm(flat, 0, 10, 1));
    CHECK_THROWS(operator_norm(flat, 1, 2, 1));
}

TEST_CASE("lower bound: flat isometry and zero-symbol violation") {
    PolarFrequencyGrid fg = build_polar_grid(-2, 2, 8, 128);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 16);
    FioOperator flat(PhaseField::flat(), SymbolField::unit(), fg, sg);
    double baseline = operator_norm(flat, 2, 12, 7).sigma;
    LowerBoundResult lb = lower_bound_ratio(flat, 6, 7, baseline);
    CHECK(lb.hypothesis_ok);
    CHECK(std::abs(lb.min_ratio - 1.0) < 0.01);

    FioOperator zero(PhaseField::flat(), SymbolField::zero(), fg, sg);
    LowerBoundResult lz = lower_bound_ratio(zero, 2, 7, baseline);
    CHECK(!lz.hypothesis_ok);
    CHECK(lz.min_ratio < 1e-12);
}

TEST_CASE("adjoint consistency") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 2, 6, 96);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 10);
    FioOperator op(PhaseField::perturbed(0.05), SymbolField::lapse_inverse(), fg, sg);
    HalfDensity f = random_band_limited_density(fg, 21, 0);
    Rng rng(22);
    SpatialField F(sg.size());
    for (auto& v : F.values) v = complexd(rng.next_gaussian(), rng.next_gaussian());
    complexd lhs = spatial_inner(apply(op, f), F, sg);
    complexd rhs = polar_inner(f, apply_adjoint(op, F), fg);
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
}
