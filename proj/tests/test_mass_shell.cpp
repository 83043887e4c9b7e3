#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "covpb/mass_shell.hpp"
#include "test_support.hpp"

using namespace covpb;
using covpb::testing::Rng;

TEST_CASE("cube lattice mode count and basic weights", "[mass_shell]") {
    const ModeLattice lat(1.0, 1);
    REQUIRE(lat.size() == 26); // 3^3 - 1

    const std::size_t j = lat.index_of(0, 0, 1);
    const Mode& m = lat.mode(j);
    CHECK(m.k0 == 1.0);
    CHECK(m.weight == 0.5); // dk^3 / (2 k0)

    const ModeLattice lat2(0.5, 2);
    CHECK(lat2.size() == 124); // 5^3 - 1
}

TEST_CASE("lattice is closed under k -> -k", "[mass_shell]") {
    const ModeLattice lat(0.7, 2);
    for (std::size_t j = 0; j < lat.size(); ++j) {
        const std::size_t jo = lat.opposite(j);
        const Mode& m = lat.mode(j);
        const Mode& mo = lat.mode(jo);
        for (int i = 0; i < 3; ++i) {
            CHECK(mo.k_spatial[static_cast<std::size_t>(i)] ==
                  -m.k_spatial[static_cast<std::size_t>(i)]);
        }
        CHECK(mo.weight == m.weight);
    }
}

TEST_CASE("all modes sit on the light cone", "[mass_shell]") {
    const ModeLattice lat(0.31, 3);
    for (const Mode& m : lat.modes()) {
        const double kk = minkowski_dot(m.k(), m.k());
        CHECK(std::abs(kk) < 1e-12 * m.k0 * m.k0);
    }
}

TEST_CASE("measure_sum of unity against a direct arithmetic oracle", "[mass_shell]") {
    const ModeLattice lat(1.0, 1);
    const double got = measure_sum(lat, [](const Mode&) { return 1.0; });

    // independent evaluation: sum over integer triples of 1/(2 |n|)
    double expect = 0.0;
    for (int n1 = -1; n1 <= 1; ++n1) {
        for (int n2 = -1; n2 <= 1; ++n2) {
            for (int n3 = -1; n3 <= 1; ++n3) {
                if (n1 == 0 && n2 == 0 && n3 == 0) continue;
                expect += 0.5 / std::sqrt(double(n1 * n1 + n2 * n2 + n3 * n3));
            }
        }
    }
    CHECK_THAT(got, Catch::Matchers::WithinRel(expect, 1e-15));
    // frozen value: 3 + 3 sqrt(2) + 4/sqrt(3)
    CHECK_THAT(got, Catch::Matchers::WithinRel(9.552041763877788, 1e-14));
}

TEST_CASE("odd integrands cancel on the symmetric lattice", "[mass_shell]") {
    const ModeLattice lat(0.8, 2);
    const double odd = measure_sum(lat, [](const Mode& m) {
        return m.k_spatial[0] + 0.3 * m.k_spatial[2] * m.k0;
    });
    const double even = measure_sum(lat, [](const Mode& m) { return m.k0; });
    CHECK(std::abs(odd) < 1e-13 * std::abs(even));

    const double onshell = measure_sum(lat, [](const Mode& m) {
        return minkowski_dot(m.k(), m.k());
    });
    CHECK(std::abs(onshell) < 1e-13);
}

TEST_CASE("measure_sum rejects non-finite integrands", "[mass_shell]") {
    const ModeLattice lat(1.0, 1);
    CHECK_THROWS_AS(measure_sum(lat, [](const Mode& m) {
                        return m.index == 5 ? std::nan("") : 1.0;
                    }),
                    std::domain_error);
}

TEST_CASE("lattice construction rejects bad parameters", "[mass_shell]") {
    CHECK_THROWS_AS(ModeLattice(0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(ModeLattice(-1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(ModeLattice(1.0, 0), std::invalid_argument);
}

TEST_CASE("tetrad for an axis-aligned wavevector", "[mass_shell]") {
    const Tetrad t = tetrad_for({0.0, 0.0, 2.5});
    CHECK(t[0][0] == 1.0);
    // e3 = z-hat, smallest component axis is x (tie with y broken toward x)
    CHECK(t[1][1] == 1.0);
    CHECK(t[2][2] == 1.0);
    CHECK(t[3][3] == 1.0);
}

TEST_CASE("tetrads are orthonormal and direction-only", "[mass_shell]") {
    Rng rng(201);
    for (int trial = 0; trial < 40; ++trial) {
        Triple k = {covpb::testing::uniform(rng, -2, 2),
                    covpb::testing::uniform(rng, -2, 2),
                    covpb::testing::uniform(rng, -2, 2)};
        if (norm3(k) < 1e-3) continue;
        const Tetrad t = tetrad_for(k);
        for (std::size_t i = 1; i < 4; ++i) {
            for (std::size_t j = 1; j < 4; ++j) {
                double dot = 0.0;
                for (std::size_t s = 1; s < 4; ++s) dot += t[i][s] * t[j][s];
                CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-14);
            }
        }
        // scaling k leaves the tetrad unchanged
        const Triple k2 = {2.0 * k[0], 2.0 * k[1], 2.0 * k[2]};
        const Tetrad t2 = tetrad_for(k2);
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t s = 0; s < 4; ++s) {
                CHECK(t2[i][s] == t[i][s]);
            }
        }
        // right-handedness: e3 x e1 = e2
        const Triple e1 = {t[1][1], t[1][2], t[1][3]};
        const Triple e3 = {t[3][1], t[3][2], t[3][3]};
        const Triple cx = cross3(e3, e1);
        for (std::size_t s = 0; s < 3; ++s) {
            CHECK(std::abs(cx[s] - t[2][s + 1]) < 1e-14);
        }
    }
}

TEST_CASE("tetrad rejects the zero vector", "[mass_shell]") {
    CHECK_THROWS_AS(tetrad_for({0.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("boosted modes stay on shell with their weights", "[mass_shell]") {
    Rng rng(202);
    const ModeLattice lat(1.0, 1);

    const Mode& m = lat.mode(lat.index_of(1, -1, 0));
    const Mode same = boost_mode(LorentzMap::identity(), m);
    CHECK(same.k0 == m.k0);
    CHECK(same.weight == m.weight);

    for (int trial = 0; trial < 20; ++trial) {
        const LorentzMap L = covpb::testing::random_lorentz(rng, 1.0);
        for (const Mode& mode : lat.modes()) {
            const Mode b = boost_mode(L, mode);
            CHECK(std::abs(minkowski_dot(b.k(), b.k())) < 1e-12 * b.k0 * b.k0);
            CHECK(b.weight == mode.weight);
        }
    }
}

TEST_CASE("boosted frequency follows the Doppler formula", "[mass_shell]") {
    Rng rng(203);
    const ModeLattice lat(0.9, 2);
    for (int trial = 0; trial < 20; ++trial) {
        const double chi = covpb::testing::uniform(rng, -1.5, 1.5);
        const LorentzMap L = LorentzMap::boost(Axis::z, chi);
        for (const Mode& m : lat.modes()) {
            const double cos_theta = m.k_spatial[2] / m.k0;
            const double expect = m.k0 * (std::cosh(chi) + cos_theta * std::sinh(chi));
            const Mode b = boost_mode(L, m);
            CHECK_THAT(b.k0, Catch::Matchers::WithinRel(expect, 1e-12));
        }
    }
}
