#pragma once

#include <complex>
#include <random>

#include "covpb/bracket.hpp"
#include "covpb/minkowski.hpp"
#include "covpb/observables.hpp"
#include "covpb/system_state.hpp"

namespace covpb::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Complex random_complex(Rng& rng, double scale = 1.0) {
    return {uniform(rng, -scale, scale), uniform(rng, -scale, scale)};
}

inline FourVector random_four_vector(Rng& rng, double scale = 1.0) {
    return FourVector(uniform(rng, -scale, scale), uniform(rng, -scale, scale),
                      uniform(rng, -scale, scale), uniform(rng, -scale, scale));
}

inline CFourVector random_amplitude(Rng& rng, double scale = 1.0) {
    return CFourVector(random_complex(rng, scale), random_complex(rng, scale),
                       random_complex(rng, scale), random_complex(rng, scale),
                       Variance::covariant);
}

inline LorentzMap random_lorentz(Rng& rng, double max_rapidity = 1.0) {
    LorentzMap L = LorentzMap::identity();
    const Axis axes[3] = {Axis::x, Axis::y, Axis::z};
    for (int i = 0; i < 3; ++i) {
        L = compose(L, LorentzMap::boost(axes[static_cast<std::size_t>(
                           std::uniform_int_distribution<int>(0, 2)(rng))],
                                         uniform(rng, -max_rapidity, max_rapidity)));
        L = compose(L, LorentzMap::rotation(axes[static_cast<std::size_t>(
                           std::uniform_int_distribution<int>(0, 2)(rng))],
                                            uniform(rng, 0.0, 6.28)));
    }
    return L;
}

inline FieldState random_field_state(Rng& rng, LatticePtr lat, double scale = 1.0,
                                     double c = 1.0, double a = 4.0) {
    FieldState f(std::move(lat), c, a);
    for (std::size_t j = 0; j < f.size(); ++j) {
        f.set_amp(j, random_amplitude(rng, scale));
    }
    return f;
}

inline SystemState random_system_state(Rng& rng, LatticePtr lat, double scale = 1.0) {
    ParticleState pt;
    pt.x = random_four_vector(rng, scale);
    pt.p = random_four_vector(rng, scale).with_variance(Variance::covariant);
    pt.m0 = uniform(rng, 0.5, 2.0);
    pt.e = uniform(rng, -1.0, 1.0);
    return SystemState(pt, random_field_state(rng, std::move(lat), scale));
}

/// Random polynomial observable over a handful of modes; degree <= 3.
inline PolyObservable random_polynomial(Rng& rng, std::size_t n_modes,
                                        bool field_only = false,
                                        int max_terms = 4) {
    std::uniform_int_distribution<int> n_terms(1, max_terms);
    std::uniform_int_distribution<int> degree(1, 3);
    std::uniform_int_distribution<int> mu(0, 3);
    std::uniform_int_distribution<std::size_t> mode(0, n_modes - 1);
    std::uniform_int_distribution<int> kind(0, field_only ? 1 : 3);

    PolyObservable p;
    const int nt = n_terms(rng);
    for (int t = 0; t < nt; ++t) {
        PolyObservable term = PolyObservable::constant(random_complex(rng));
        const int deg = degree(rng);
        for (int d = 0; d < deg; ++d) {
            VarRef v;
            switch (kind(rng)) {
                case 0: v = amp_var(mode(rng), mu(rng)); break;
                case 1: v = amp_conj_var(mode(rng), mu(rng)); break;
                case 2: v = x_var(mu(rng)); break;
                default: v = p_var(mu(rng)); break;
            }
            term = term * PolyObservable::variable(v);
        }
        p += term;
    }
    return p;
}

/// Observable with a real value at every state: P + conj(P).
inline PolyObservable random_real_polynomial(Rng& rng, std::size_t n_modes,
                                             bool field_only = false) {
    const PolyObservable p = random_polynomial(rng, n_modes, field_only);
    return p + p.conjugate();
}

} // namespace covpb::testing
