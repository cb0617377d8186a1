#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rfio/dyadic.hpp"
#include "rfio/rng.hpp"

using namespace rfio;

namespace {
constexpr double kPi = 3.14159265358979323846;

Vec3 random_direction(Rng& rng) {
    return normalized(Vec3{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()});
}
} // namespace

TEST_CASE("Littlewood-Paley partition telescopes to 1") {
    LittlewoodPaleyFamily f = build_lp_family(5);
    Rng rng(12);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double l = rng.uniform(0.0, std::exp2(5));
        worst = std::max(worst, std::abs(f.partition_sum(l) - 1.0));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("psi band values and supports") {
    LittlewoodPaleyFamily f = build_lp_family(6);
    for (int j = 0; j <= 6; ++j) {
        double inside = f.band_j(j, 3.0 * std::exp2(j - 2));
        CHECK(inside > 0.0);
        CHECK(inside < 1.0);
        CHECK(f.band_j(j, std::exp2(j + 2)) == 0.0);
        CHECK(f.band_j(j, std::exp2(j - 1) * 0.999) == 0.0);
        CHECK(f.band_j(j, std::exp2(j + 1) * 1.001) == 0.0);
    }
    CHECK_THROWS(build_lp_family(-1));
}

TEST_CASE("angular family: partition, count, support, derivative bound") {
    Rng rng(34);
    for (auto [j, delta] : {std::pair<int, double>{2, 1.0}, {3, 0.5}, {0, 0.25}}) {
        AngularPatchFamily fam = build_angular_family(j, delta);
        double scale = delta * std::exp2(-0.5 * j);

        // patch count within factor 4 of 2^j / delta^2 (area count)
        double nominal = std::exp2(j) / (delta * delta);
        if (fam.size() > 12)
            CHECK(fam.size() <= 4.0 * nominal);
        CHECK(fam.size() + 0.25 >= nominal / 4.0);

        // partition of unity at random points
        double worst = 0.0;
        for (int i = 0; i < 3000; ++i) {
            Vec3 w = random_direction(rng);
            double s = 0.0;
            for (std::size_t nu = 0; nu < fam.size(); ++nu) s += fam.eta(nu, w);
            worst = std::max(worst, std::abs(s - 1.0));
        }
        CHECK(worst <= 1e-10);

        // support: geodesic diameter <= 4 delta 2^{-j/2}, exact zero outside
        CHECK(2.0 * fam.cap_radius <= 4.0 * scale + 1e-12);
        for (int i = 0; i < 200; ++i) {
            Vec3 w = random_direction(rng);
            for (std::size_t nu : {std::size_t(0), fam.size() / 2}) {
                double dgeo = std::acos(std::clamp(dot(w, fam.centers[nu]), -1.0, 1.0));
                if (dgeo >= fam.cap_radius) CHECK(fam.eta(nu, w) == 0.0);
            }
        }

        // derivative bound |d eta| <= 10 / (delta 2^{-j/2}) via dense FD
        double dmax = 0.0;
        const double h = 1e-5;
        for (int i = 0; i < 400; ++i) {
            Vec3 w = random_direction(rng);
            auto frame = tangent_frame(w);
            for (std::size_t nu : fam.touching(w)) {
                for (const Vec3& v : frame) {
                    Vec3 wp = normalized(w * std::cos(h) + v * std::sin(h));
                    Vec3 wm = normalized(w * std::cos(h) - v * std::sin(h));
                    dmax = std::max(dmax,
                                    std::abs(fam.eta(nu, wp) - fam.eta(nu, wm)) / (2 * h));
                }
            }
        }
        INFO("j=", j, " delta=", delta, " max |d eta| * scale = ", dmax * scale);
        CHECK(dmax * scale <= 10.0);
    }
}

TEST_CASE("angular family guards") {
    CHECK_THROWS(build_angular_family(-1, 0.5));
    CHECK_THROWS(build_angular_family(2, 0.0));
    CHECK_THROWS(build_angular_family(2, 1.5));
    // too fine for a small grid
    AngularPatchFamily fine = build_angular_family(6, 0.25);
    PolarFrequencyGrid g = build_polar_grid(0, 6, 4, 64);
    CHECK_THROWS(fine.require_resolution(g));
}

TEST_CASE("second frequency family") {
    SecondFrequencyFamily one = build_second_frequency_family(3, 0.125, 1.0);
    CHECK(one.count == 1);
    CHECK(one.bump(0, 5.0) == 1.0);

    SecondFrequencyFamily two = build_second_frequency_family(3, 0.125, std::exp2(-8));
    CHECK(two.count == 2);

    Rng rng(56);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double l = rng.uniform(two.lambda_lo, two.lambda_hi);
        worst = std::max(worst, std::abs(two.partition_sum(l) - 1.0));
    }
    CHECK(worst <= 1e-10);

    CHECK_THROWS(build_second_frequency_family(3, 0.3, 0.5));
    CHECK_THROWS(build_second_frequency_family(3, 0.125, 3.0));
}

TEST_CASE("nested consistency: eta partition under psi") {
    LittlewoodPaleyFamily lp = build_lp_family(4);
    AngularPatchFamily fam = build_angular_family(3, 1.0);
    Rng rng(78);
    for (int i = 0; i < 500; ++i) {
        double l = rng.uniform(4.0, 16.0);
        Vec3 w = random_direction(rng);
        double psi = lp.band_j(3, l);
        double s = 0.0;
        for (std::size_t nu = 0; nu < fam.size(); ++nu) s += fam.eta(nu, w) * psi;
        CHECK(std::abs(s - psi) <= 1e-10);
    }
}
