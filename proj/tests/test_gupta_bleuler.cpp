#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "covpb/gupta_bleuler.hpp"
#include "test_support.hpp"

using namespace covpb;
using covpb::testing::Rng;

namespace {

struct Fixture {
    LatticePtr lat = build_lattice(1.0, 1);
    BracketConfig cfg{lat};
    Rng rng{601};

    SystemState state() {
        return covpb::testing::random_system_state(rng, lat, 1.0);
    }
};

/// Random polynomial in polarization variables. With transverse_only the
/// field content uses lambda = 1,2 only; otherwise scalar and
/// longitudinal components appear through the constraint-compatible
/// combination u_j = A_0(j) + A_3(j).
PolyObservable random_pol_polynomial(Rng& rng, std::size_t n_modes,
                                     bool transverse_only) {
    std::uniform_int_distribution<int> n_terms(1, 3);
    std::uniform_int_distribution<int> degree(1, 2);
    std::uniform_int_distribution<std::size_t> mode(0, n_modes - 1);
    std::uniform_int_distribution<int> lam(1, 2);
    std::uniform_int_distribution<int> kind(0, transverse_only ? 3 : 5);

    PolyObservable p;
    const int nt = n_terms(rng);
    for (int t = 0; t < nt; ++t) {
        PolyObservable term = PolyObservable::constant(covpb::testing::random_complex(rng));
        const int deg = degree(rng);
        for (int d = 0; d < deg; ++d) {
            const std::size_t j = mode(rng);
            switch (kind(rng)) {
                case 0:
                    term = term * PolyObservable::variable(pol_var(j, lam(rng)));
                    break;
                case 1:
                    term = term * PolyObservable::variable(pol_conj_var(j, lam(rng)));
                    break;
                case 2:
                    term = term * PolyObservable::variable(x_var(lam(rng)));
                    break;
                case 3:
                    term = term * PolyObservable::variable(p_var(lam(rng)));
                    break;
                case 4:
                    term = term * (PolyObservable::variable(pol_var(j, 0)) +
                                   PolyObservable::variable(pol_var(j, 3)));
                    break;
                default:
                    term = term * (PolyObservable::variable(pol_conj_var(j, 0)) +
                                   PolyObservable::variable(pol_conj_var(j, 3)));
                    break;
            }
        }
        p += term;
    }
    return p;
}

} // namespace

TEST_CASE("decomposition of tetrad-aligned amplitudes", "[gupta_bleuler]") {
    Fixture fx;
    const std::size_t j = fx.lat->index_of(1, 0, 1);
    const Mode& m = fx.lat->mode(j);

    FieldState f1(fx.lat);
    f1.set_amp(j, to_complex(m.tetrad[1].lowered()));
    const PolarizationComponents pc1 = decompose(f1);
    CHECK(std::abs(pc1.comp[j][0]) < 1e-15);
    CHECK(std::abs(pc1.comp[j][1] - 1.0) < 1e-15);
    CHECK(std::abs(pc1.comp[j][2]) < 1e-15);
    CHECK(std::abs(pc1.comp[j][3]) < 1e-15);

    FieldState f2(fx.lat);
    CFourVector both = to_complex(m.tetrad[0].lowered());
    const CFourVector e3 = to_complex(m.tetrad[3].lowered());
    for (std::size_t mu = 0; mu < 4; ++mu) both[mu] += e3[mu];
    f2.set_amp(j, both);
    const PolarizationComponents pc2 = decompose(f2);
    CHECK(std::abs(pc2.comp[j][0] - 1.0) < 1e-15);
    CHECK(std::abs(pc2.comp[j][1]) < 1e-15);
    CHECK(std::abs(pc2.comp[j][2]) < 1e-15);
    CHECK(std::abs(pc2.comp[j][3] - 1.0) < 1e-15);
}

TEST_CASE("decompose/recompose roundtrip", "[gupta_bleuler]") {
    Fixture fx;
    for (int trial = 0; trial < 20; ++trial) {
        const FieldState f = covpb::testing::random_field_state(fx.rng, fx.lat, 2.0);
        const FieldState back = recompose(f, decompose(f));
        for (std::size_t j = 0; j < f.size(); ++j) {
            for (std::size_t mu = 0; mu < 4; ++mu) {
                CHECK(std::abs(back.amp(j)[mu] - f.amp(j)[mu]) < 1e-13);
            }
        }
    }
}

TEST_CASE("constraint residual in the polarization basis", "[gupta_bleuler]") {
    Fixture fx;
    PolarizationComponents pc;
    pc.comp.assign(3, {Complex{0}, Complex{0}, Complex{0}, Complex{0}});
    pc.comp[0] = {Complex{1}, Complex{0.5}, Complex{-2}, Complex{1}};
    pc.comp[1] = {Complex{1}, Complex{0}, Complex{0}, Complex{0}};
    pc.comp[2] = {Complex{0}, Complex{3}, Complex{-1}, Complex{0}};
    const std::vector<double> r = constraint_residual(pc);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 1.0);
    CHECK(r[2] == 0.0); // transverse-only
}

TEST_CASE("constraint projection averages scalar and longitudinal parts",
          "[gupta_bleuler]") {
    Fixture fx;
    const std::size_t j = fx.lat->index_of(0, 1, 1);
    const Mode& m = fx.lat->mode(j);

    FieldState f(fx.lat);
    f.set_amp(j, to_complex(m.tetrad[0].lowered())); // (1, ., ., 0)
    const FieldState projected = project_constraint(f);
    const PolarizationComponents pc = decompose(projected);
    CHECK(std::abs(pc.comp[j][0] - 0.5) < 1e-15);
    CHECK(std::abs(pc.comp[j][3] - 0.5) < 1e-15);

    // already constrained states are fixed points; projection idempotent
    Fixture fx2;
    for (int trial = 0; trial < 10; ++trial) {
        const FieldState g = covpb::testing::random_field_state(fx2.rng, fx2.lat, 1.5);
        const FieldState p1 = project_constraint(g);
        const FieldState p2 = project_constraint(p1);
        for (double r : constraint_residual(decompose(p1))) CHECK(r < 1e-14);
        for (std::size_t jj = 0; jj < g.size(); ++jj) {
            for (std::size_t mu = 0; mu < 4; ++mu) {
                CHECK(std::abs(p2.amp(jj)[mu] - p1.amp(jj)[mu]) < 1e-15);
            }
        }
    }
}

TEST_CASE("polarized bracket equals the Cartesian bracket after basis change",
          "[gupta_bleuler]") {
    Fixture fx;
    const SystemState st = fx.state();
    for (int trial = 0; trial < 20; ++trial) {
        const PolyObservable A =
            covpb::testing::random_polynomial(fx.rng, fx.lat->size(), true);
        const PolyObservable B =
            covpb::testing::random_polynomial(fx.rng, fx.lat->size(), true);
        const Complex cart = bracket_amp(A, B, st, fx.cfg);
        const Complex polz = bracket_polarized(to_polarization_basis(A, *fx.lat),
                                               to_polarization_basis(B, *fx.lat), st,
                                               fx.cfg);
        CHECK(std::abs(cart - polz) < 1e-12 * (1.0 + std::abs(cart)));
    }
}

TEST_CASE("polarized pair brackets carry the tetrad signature", "[gupta_bleuler]") {
    Fixture fx;
    const SystemState st = fx.state();
    const std::size_t j = fx.lat->index_of(0, 0, 1); // k0 = 1, w = 1/2
    const Mode& m = fx.lat->mode(j);
    const double mag = fx.cfg.a * m.k0 * m.k0 / m.weight; // = 8

    // transverse pair: spatial sign of the eta contraction
    const Complex t1 = bracket_polarized(PolyObservable::variable(pol_var(j, 1)),
                                         PolyObservable::variable(pol_conj_var(j, 1)),
                                         st, fx.cfg);
    CHECK_THAT(t1.real(), Catch::Matchers::WithinAbs(-mag, 1e-12));

    // scalar pair: opposite sign
    const Complex t0 = bracket_polarized(PolyObservable::variable(pol_var(j, 0)),
                                         PolyObservable::variable(pol_conj_var(j, 0)),
                                         st, fx.cfg);
    CHECK_THAT(t0.real(), Catch::Matchers::WithinAbs(mag, 1e-12));

    // longitudinal behaves like the transverse ones
    const Complex t3 = bracket_polarized(PolyObservable::variable(pol_var(j, 3)),
                                         PolyObservable::variable(pol_conj_var(j, 3)),
                                         st, fx.cfg);
    CHECK_THAT(t3.real(), Catch::Matchers::WithinAbs(-mag, 1e-12));

    // cross-polarization pairs vanish
    const Complex cross = bracket_polarized(PolyObservable::variable(pol_var(j, 1)),
                                            PolyObservable::variable(pol_conj_var(j, 2)),
                                            st, fx.cfg);
    CHECK(std::abs(cross) == 0.0);
}

TEST_CASE("scalar and longitudinal contributions cancel for compatible observables",
          "[gupta_bleuler]") {
    Fixture fx;
    const SystemState st = fx.state();
    for (int trial = 0; trial < 20; ++trial) {
        const PolyObservable A = random_pol_polynomial(fx.rng, fx.lat->size(), false);
        const PolyObservable B = random_pol_polynomial(fx.rng, fx.lat->size(), false);

        const Complex full = bracket_polarized(A, B, st, fx.cfg);
        const Complex reduced = bracket_reduced(A, B, st, fx.cfg);
        CHECK(std::abs(full - reduced) < 1e-12 * (1.0 + std::abs(full)));

        // per-mode witness: the 0- and 3-terms are equal and subtract away
        const Gradients gA = compute_gradients(A, st, FieldBasis::polarization);
        const Gradients gB = compute_gradients(B, st, FieldBasis::polarization);
        for (std::size_t j = 0; j < fx.lat->size(); ++j) {
            const Complex scalar_term = gA.d[j][0] * gB.d_conj[j][0] -
                                        gB.d[j][0] * gA.d_conj[j][0];
            const Complex longi_term = gA.d[j][3] * gB.d_conj[j][3] -
                                       gB.d[j][3] * gA.d_conj[j][3];
            CHECK(std::abs(scalar_term - longi_term) <
                  1e-12 * (1.0 + std::abs(scalar_term)));
        }
    }
}

TEST_CASE("transverse-only observables make the reduction trivial",
          "[gupta_bleuler]") {
    Fixture fx;
    const SystemState st = fx.state();
    for (int trial = 0; trial < 10; ++trial) {
        const PolyObservable A = random_pol_polynomial(fx.rng, fx.lat->size(), true);
        const PolyObservable B = random_pol_polynomial(fx.rng, fx.lat->size(), true);
        const Complex full = bracket_polarized(A, B, st, fx.cfg);
        const Complex reduced = bracket_reduced(A, B, st, fx.cfg);
        CHECK(std::abs(full - reduced) < 1e-13 * (1.0 + std::abs(full)));
    }
}

TEST_CASE("incompatible observables are rejected and genuinely differ",
          "[gupta_bleuler]") {
    Fixture fx;
    const SystemState st = fx.state();
    const std::size_t j = 5;
    const PolyObservable A = PolyObservable::variable(pol_var(j, 0));
    const PolyObservable B = PolyObservable::variable(pol_conj_var(j, 0));

    CHECK_THROWS_AS(bracket_reduced(A, B, st, fx.cfg), std::invalid_argument);

    // the polarized bracket is nonzero while the transverse part is empty
    const Complex full = bracket_polarized(A, B, st, fx.cfg);
    CHECK(std::abs(full) > 1.0);
    const Gradients gA = compute_gradients(A, st, FieldBasis::polarization);
    const Gradients gB = compute_gradients(B, st, FieldBasis::polarization);
    Complex transverse = 0.0;
    for (std::size_t jj = 0; jj < fx.lat->size(); ++jj) {
        for (std::size_t lam = 1; lam <= 2; ++lam) {
            transverse += gA.d[jj][lam] * gB.d_conj[jj][lam] -
                          gB.d[jj][lam] * gA.d_conj[jj][lam];
        }
    }
    CHECK(std::abs(transverse) == 0.0);
}

TEST_CASE("3d amplitude rescaling", "[gupta_bleuler]") {
    LatticePtr lat2 = build_lattice(2.0, 1);
    const std::size_t j2 = lat2->index_of(0, 0, 1); // k0 = 2
    FieldState f2(lat2);
    f2.set_amp(j2, to_complex(lat2->mode(j2).tetrad[1].lowered()));
    const auto a3 = to_3d_amplitudes(decompose(f2), *lat2);
    CHECK_THAT(a3[j2][0].real(), Catch::Matchers::WithinAbs(0.5, 1e-15));

    LatticePtr lat_half = build_lattice(0.5, 1);
    const std::size_t jh = lat_half->index_of(1, 0, 0); // k0 = 1/2
    FieldState fh(lat_half);
    CFourVector amp = to_complex(lat_half->mode(jh).tetrad[2].lowered());
    for (std::size_t mu = 0; mu < 4; ++mu) amp[mu] *= Complex(0, 1);
    fh.set_amp(jh, amp);
    const auto b3 = to_3d_amplitudes(decompose(fh), *lat_half);
    CHECK(std::abs(b3[jh][1] - Complex(0, 1)) < 1e-15);

    // roundtrip by sqrt(2 k0)
    Rng rng(602);
    LatticePtr lat = build_lattice(1.0, 1);
    const FieldState f = covpb::testing::random_field_state(rng, lat, 1.0);
    const PolarizationComponents pc = decompose(f);
    const auto three = to_3d_amplitudes(pc, *lat);
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double root = std::sqrt(2.0 * lat->mode(j).k0);
        CHECK(std::abs(three[j][0] * root - pc.comp[j][1]) < 1e-14);
        CHECK(std::abs(three[j][1] * root - pc.comp[j][2]) < 1e-14);
    }
}

TEST_CASE("standard-form bracket closes the reduction chain", "[gupta_bleuler]") {
    Fixture fx;
    const SystemState st = fx.state();

    // pair value: -a k0^2 / dk^3 on the diagonal, zero across polarizations
    const std::size_t j = fx.lat->index_of(0, 0, 1);
    const Mode& m = fx.lat->mode(j);
    const Complex pair = bracket_standard(PolyObservable::variable(pol3d_var(j, 1)),
                                          PolyObservable::variable(pol3d_conj_var(j, 1)),
                                          st, fx.cfg);
    CHECK_THAT(pair.real(),
               Catch::Matchers::WithinAbs(-fx.cfg.a * m.k0 * m.k0, 1e-12));
    const Complex cross = bracket_standard(
        PolyObservable::variable(pol3d_var(j, 1)),
        PolyObservable::variable(pol3d_conj_var(j, 2)), st, fx.cfg);
    CHECK(std::abs(cross) == 0.0);

    // chain link: reduced equals standard under the change of variables
    for (int trial = 0; trial < 15; ++trial) {
        const PolyObservable A = random_pol_polynomial(fx.rng, fx.lat->size(), true);
        const PolyObservable B = random_pol_polynomial(fx.rng, fx.lat->size(), true);
        const Complex reduced = bracket_reduced(A, B, st, fx.cfg);
        const Complex standard = bracket_standard(to_transverse3d_basis(A, *fx.lat),
                                                  to_transverse3d_basis(B, *fx.lat), st,
                                                  fx.cfg);
        CHECK(std::abs(reduced - standard) < 1e-12 * (1.0 + std::abs(reduced)));
    }
}

TEST_CASE("pair brackets of 4d and 3d amplitudes differ by 2 k0",
          "[gupta_bleuler]") {
    Fixture fx;
    const SystemState st = fx.state();
    for (std::size_t j : {std::size_t(1), std::size_t(9), std::size_t(20)}) {
        const Mode& m = fx.lat->mode(j);
        for (std::size_t lam = 1; lam <= 2; ++lam) {
            const Complex four_d =
                bracket_polarized(PolyObservable::variable(pol_var(j, lam)),
                                  PolyObservable::variable(pol_conj_var(j, lam)), st,
                                  fx.cfg);
            const Complex three_d =
                bracket_standard(PolyObservable::variable(pol3d_var(j, lam)),
                                 PolyObservable::variable(pol3d_conj_var(j, lam)), st,
                                 fx.cfg);
            CHECK_THAT((four_d / three_d).real(),
                       Catch::Matchers::WithinRel(2.0 * m.k0, 1e-12));
            CHECK(std::abs((four_d / three_d).imag()) < 1e-14);
        }
    }
}

TEST_CASE("polarized kernel accepts generic observables through FD gradients",
          "[gupta_bleuler]") {
    Fixture fx;
    const SystemState st = fx.state();
    const PolyObservable A = random_pol_polynomial(fx.rng, fx.lat->size(), false);
    const PolyObservable B = random_pol_polynomial(fx.rng, fx.lat->size(), false);
    GenericObservable GA{[A](const SystemState& s) { return A.evaluate(s); }, 1e-5};
    const Complex exact = bracket_polarized(A, B, st, fx.cfg);
    const Complex mixed = bracket_polarized(GA, B, st, fx.cfg);
    CHECK(std::abs(mixed - exact) < 1e-6 * (1.0 + std::abs(exact)));
}
