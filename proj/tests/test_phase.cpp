#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rfio/grid.hpp"
#include "rfio/phase.hpp"
#include "rfio/rng.hpp"

using namespace rfio;

namespace {

// geodesic step on the sphere
Vec3 geo(const Vec3& w, const Vec3& v, double t) {
    return normalized(w * std::cos(t) + v * std::sin(t));
}

std::vector<std::pair<Vec3, Vec3>> sample_points(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<Vec3, Vec3>> out;
    for (int i = 0; i < n; ++i) {
        Vec3 x{rng.uniform(-1.8, 1.8), rng.uniform(-1.8, 1.8), rng.uniform(-1.8, 1.8)};
        Vec3 w = normalized(Vec3{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()});
        out.emplace_back(x, w);
    }
    return out;
}

} // namespace

TEST_CASE("flat jet: a=1, N=omega, theta=0") {
    PhaseField flat = PhaseField::flat();
    for (auto& [x, w] : sample_points(20, 1)) {
        GeometricJet j = jet(flat, x, w);
        CHECK(std::abs(j.a - 1.0) < 1e-15);
        CHECK(norm(j.N - w) < 1e-15);
        CHECK(j.theta[0][0] == 0.0);
        CHECK(j.theta[0][1] == 0.0);
        CHECK(j.tr_theta == 0.0);
        CHECK(j.u == dot(x, w));
    }
}

TEST_CASE("perturbed phase is exactly flat outside |x| >= 2") {
    PhaseField p = PhaseField::perturbed(0.3);
    for (auto& [x0, w] : sample_points(10, 2)) {
        Vec3 x = normalized(x0) * 2.3;
        GeometricJet j = jet(p, x, w);
        CHECK(std::abs(j.a - 1.0) < 1e-15);
        CHECK(norm(j.N - w) < 1e-15);
        CHECK(j.u == dot(x, w));
        ChangeOfVariable cv = change_of_variable(p, w, x);
        CHECK(norm(cv.point - x) < 1e-14);
    }
}

TEST_CASE("analytic x-derivatives match finite differences") {
    PhaseField p = PhaseField::perturbed(0.08);
    const double h = 1e-5;
    for (auto& [x, w] : sample_points(12, 3)) {
        PhaseDerivs d = p.derivs(x, w, 2, 2);
        for (int c = 0; c < 3; ++c) {
            Vec3 dx{0, 0, 0};
            dx[c] = h;
            double up = p.u(x + dx, w), um = p.u(x - dx, w);
            CHECK(d.du[c] == doctest::Approx((up - um) / (2 * h)).epsilon(1e-6));
            PhaseDerivs dp = p.derivs(x + dx, w, 1, 1);
            PhaseDerivs dm = p.derivs(x - dx, w, 1, 1);
            for (int i = 0; i < 3; ++i) {
                CHECK(d.d2u(i, c) ==
                      doctest::Approx((dp.du[i] - dm.du[i]) / (2 * h)).epsilon(1e-5));
                // (2,1) block against FD of the mixed first derivatives
                for (int k = 0; k < 3; ++k)
                    CHECK(d.d2x_dw[k](i, c) == doctest::Approx((dp.dx_dw(i, k) - dm.dx_dw(i, k)) /
                                                               (2 * h))
                                                   .epsilon(1e-4));
            }
        }
    }
}

TEST_CASE("analytic omega-derivatives match geodesic central differences") {
    PhaseField p = PhaseField::perturbed(0.08);
    const double h = 1e-4;
    for (auto& [x, w] : sample_points(12, 4)) {
        PhaseDerivs d = p.derivs(x, w, 2, 2);
        auto frame = tangent_frame(w);
        for (const Vec3& v : frame) {
            double up = p.u(x, geo(w, v, h)), um = p.u(x, geo(w, v, -h));
            double analytic = dot(d.dw, v);
            CHECK(std::abs(analytic - (up - um) / (2 * h)) <
                  1e-6 * std::max(1.0, std::abs(analytic)));
            // mixed (1,1): d/dt grad_x u along the geodesic
            PhaseDerivs dp = p.derivs(x, geo(w, v, h), 1, 0);
            PhaseDerivs dm = p.derivs(x, geo(w, v, -h), 1, 0);
            for (int i = 0; i < 3; ++i) {
                double fd = (dp.du[i] - dm.du[i]) / (2 * h);
                double an = 0.0;
                for (int k = 0; k < 3; ++k) an += d.dx_dw(i, k) * v[k];
                CHECK(std::abs(an - fd) < 1e-5 * std::max(1.0, std::abs(an)));
            }
        }
    }
}

TEST_CASE("second omega-derivatives match geodesic differences") {
    PhaseField p = PhaseField::perturbed(0.08);
    const double h = 1e-4;
    for (auto& [x, w] : sample_points(10, 5)) {
        PhaseDerivs d = p.derivs(x, w, 1, 2);
        auto frame = tangent_frame(w);
        for (const Vec3& v : frame) {
            // geodesic second derivative = v^T dw2 v - w . dw
            double hess = 0.0;
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) hess += d.dw2(k, l) * v[k] * v[l];
            double analytic = hess - dot(w, d.dw);
            double fd =
                (p.u(x, geo(w, v, h)) - 2.0 * p.u(x, w) + p.u(x, geo(w, v, -h))) / (h * h);
            CHECK(std::abs(analytic - fd) < 1e-5 * std::max(1.0, std::abs(analytic)));
        }
    }
}

TEST_CASE("theta matches central differences of N; symmetry and alignment") {
    PhaseField p = PhaseField::perturbed(0.05);
    const double h = 1e-5;
    for (auto& [x, w] : sample_points(12, 6)) {
        GeometricJet j = jet(p, x, w);
        CHECK(std::abs(norm(j.N) - 1.0) < 1e-12);
        CHECK(std::abs(j.a * norm(j.grad_u) - 1.0) < 1e-12);
        CHECK(std::abs(dot(j.N, j.grad_u) - norm(j.grad_u)) < 1e-12);
        CHECK(std::abs(j.theta[0][1] - j.theta[1][0]) < 1e-12);
        CHECK(j.tr_theta == j.theta[0][0] + j.theta[1][1]);
        for (int A = 0; A < 2; ++A)
            for (int B = 0; B < 2; ++B) {
                Vec3 dxv = j.frame[A] * h;
                Vec3 np = jet(p, x + dxv, w).N;
                Vec3 nm = jet(p, x - dxv, w).N;
                double fd = dot((np - nm) / (2 * h), j.frame[B]);
                CHECK(std::abs(j.theta[A][B] - fd) < 1e-4);
            }
    }
}

TEST_CASE("change of variable: flat identity, perturbed det near 1") {
    PhaseField flat = PhaseField::flat();
    for (auto& [x, w] : sample_points(10, 7)) {
        ChangeOfVariable cv = change_of_variable(flat, w, x);
        CHECK(norm(cv.point - x) < 1e-14);
        CHECK(cv.jacobian_det == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(!cv.degenerate);
    }
    double eps = 0.05;
    PhaseField p = PhaseField::perturbed(eps);
    double worst = 0.0;
    for (auto& [x, w] : sample_points(300, 8)) {
        ChangeOfVariable cv = change_of_variable(p, w, x);
        worst = std::max(worst, std::abs(cv.jacobian_det - 1.0));
    }
    double fitted_c = worst / eps;
    CHECK(fitted_c < 20.0);
    CHECK(worst > 0.0);
}

TEST_CASE("jacobian determinant against finite differences") {
    PhaseField p = PhaseField::perturbed(0.1);
    const double h = 1e-5;
    for (auto& [x, w] : sample_points(8, 9)) {
        Mat3 jac_fd;
        for (int c = 0; c < 3; ++c) {
            Vec3 dx{0, 0, 0};
            dx[c] = h;
            Vec3 fp = change_of_variable(p, w, x + dx).point;
            Vec3 fm = change_of_variable(p, w, x - dx).point;
            for (int k = 0; k < 3; ++k) jac_fd(k, c) = (fp[k] - fm[k]) / (2 * h);
        }
        double det_fd = std::abs(det(jac_fd));
        CHECK(change_of_variable(p, w, x).jacobian_det ==
              doctest::Approx(det_fd).epsilon(1e-5));
    }
}

TEST_CASE("assumption checker: flat passes at eps = 0") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 2, 4, 64);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 16);
    AssumptionReport rep = check_assumptions(PhaseField::flat(), fg, sg, 0.0);
    for (const auto& e : rep.entries) {
        INFO("A", e.assumption, " ", e.label, " measured ", e.measured);
        CHECK(e.pass);
        if (e.eps_bounded) CHECK(e.measured < 1e-9);
    }
    CHECK(rep.all_pass);
}

TEST_CASE("assumption checker: eps-bounded entries scale linearly") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 2, 4, 64);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 16);
    AssumptionReport r1 = check_assumptions(PhaseField::perturbed(0.04), fg, sg, 0.04);
    AssumptionReport r2 = check_assumptions(PhaseField::perturbed(0.02), fg, sg, 0.02);
    REQUIRE(r1.entries.size() == r2.entries.size());
    for (std::size_t i = 0; i < r1.entries.size(); ++i) {
        if (!r1.entries[i].eps_bounded) continue;
        if (r1.entries[i].measured < 1e-8) continue;
        double ratio = r2.entries[i].measured / r1.entries[i].measured;
        INFO(r1.entries[i].label, " halving ratio ", ratio);
        CHECK(ratio > 0.4);
        CHECK(ratio < 0.6);
    }
}

TEST_CASE("assumption checker flags a degenerate change of variable") {
    PolarFrequencyGrid fg = build_polar_grid(-1, 2, 4, 64);
    SpatialGrid sg = SpatialGrid::lattice(4.0, 16);
    TrigPerturbation steep = TrigPerturbation::preset("steep");
    AssumptionReport rep =
        check_assumptions(PhaseField::perturbed(3.0, steep), fg, sg, 3.0, 8.0);
    bool a4_failed = false;
    for (const auto& e : rep.entries)
        if (e.assumption == 4 && !e.pass) a4_failed = true;
    CHECK(a4_failed);
}
