#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "covpb/bracket.hpp"
#include "covpb/field_state.hpp"
#include "covpb/observables.hpp"

namespace covpb {

/// Per-mode tetrad coefficients (A_0, A_1, A_2, A_3): scalar, two
/// transverse, longitudinal.
struct PolarizationComponents {
    std::vector<std::array<Complex, 4>> comp;

    std::size_t size() const { return comp.size(); }
};

inline PolarizationComponents decompose(const FieldState& f) {
    PolarizationComponents pc;
    pc.comp.resize(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) {
        const Mode& m = f.lattice().mode(j);
        for (std::size_t i = 0; i < 4; ++i) {
            pc.comp[j][i] = polarization_component(m, f.amp(j), i);
        }
    }
    return pc;
}

/// Rebuild covariant amplitudes A_mu = A_0 eps0_mu + sum_i A_i eps^i_mu
/// (lowered tetrad vectors); exact inverse of decompose.
inline FieldState recompose(const FieldState& like, const PolarizationComponents& pc) {
    if (pc.size() != like.size()) {
        throw std::invalid_argument("recompose: component count mismatch");
    }
    FieldState f(like.lattice_ptr(), like.c(), like.a());
    for (std::size_t j = 0; j < pc.size(); ++j) {
        const Mode& m = like.lattice().mode(j);
        CFourVector a({0, 0}, {0, 0}, {0, 0}, {0, 0}, Variance::covariant);
        a[0] = pc.comp[j][0];
        for (std::size_t i = 1; i < 4; ++i) {
            const FourVector& e = m.tetrad[i];
            for (std::size_t s = 1; s < 4; ++s) a[s] -= pc.comp[j][i] * e[s];
        }
        f.set_amp(j, a);
    }
    return f;
}

/// |A_0 - A_3| per mode: the polarization-basis form of the Lorentz
/// condition k^mu A_mu = 0 (which equals k0 (A_0 - A_3)).
inline std::vector<double> constraint_residual(const PolarizationComponents& pc) {
    std::vector<double> r(pc.size());
    for (std::size_t j = 0; j < pc.size(); ++j) {
        r[j] = std::abs(pc.comp[j][0] - pc.comp[j][3]);
    }
    return r;
}

/// Orthogonal projection onto the constraint surface in the flat
/// component metric: A_0 and A_3 are replaced by their mean, transverse
/// components untouched. Linear and idempotent.
inline FieldState project_constraint(const FieldState& f) {
    PolarizationComponents pc = decompose(f);
    for (std::size_t j = 0; j < pc.size(); ++j) {
        const Complex avg = 0.5 * (pc.comp[j][0] + pc.comp[j][3]);
        pc.comp[j][0] = avg;
        pc.comp[j][3] = avg;
    }
    return recompose(f, pc);
}

/// A_lambda(k_j) = A_lambda(j) / sqrt(2 k0), lambda = 1, 2.
inline std::vector<std::array<Complex, 2>> to_3d_amplitudes(
    const PolarizationComponents& pc, const ModeLattice& lat) {
    std::vector<std::array<Complex, 2>> out(pc.size());
    for (std::size_t j = 0; j < pc.size(); ++j) {
        const double root = std::sqrt(2.0 * lat.mode(j).k0);
        out[j][0] = pc.comp[j][1] / root;
        out[j][1] = pc.comp[j][2] / root;
    }
    return out;
}

// --------------------------------------------------------------------------
// Observable basis changes
// --------------------------------------------------------------------------

/// Rewrites every variable reference through a caller-supplied linear map
/// and expands the products. Conjugate sectors get the conjugated map.
inline PolyObservable substitute_refs(
    const PolyObservable& p,
    const std::function<PolyObservable(const VarRef&)>& map) {
    PolyObservable out;
    for (const auto& term : p.terms()) {
        PolyObservable prod = PolyObservable::constant(term.coeff);
        for (const VarRef& v : term.refs) prod = prod * map(v);
        out += prod;
    }
    return out;
}

/// Cartesian amplitudes -> tetrad coefficients: A_mu(j) with mu = 0 maps
/// to A_0(j); a spatial lower component maps to -sum_i e_i^m A_i(j).
inline PolyObservable to_polarization_basis(const PolyObservable& p,
                                            const ModeLattice& lat) {
    return substitute_refs(p, [&](const VarRef& v) {
        if (v.sector != Sector::amp && v.sector != Sector::amp_conj) {
            if (is_field_sector(v.sector)) {
                throw std::invalid_argument(
                    "to_polarization_basis: expected Cartesian amplitude variables");
            }
            return PolyObservable::variable(v);
        }
        const bool cj = v.sector == Sector::amp_conj;
        const std::size_t j = static_cast<std::size_t>(v.mode);
        auto pvar = [&](std::size_t i, Complex coeff) {
            return PolyObservable::variable(cj ? pol_conj_var(j, i) : pol_var(j, i),
                                            coeff);
        };
        if (v.mu == 0) return pvar(0, 1.0);
        const Mode& m = lat.mode(j);
        PolyObservable out;
        for (std::size_t i = 1; i < 4; ++i) {
            out += pvar(i, -m.tetrad[i][v.mu]);
        }
        return out;
    });
}

/// Tetrad coefficients -> Cartesian amplitudes: A_0(j) -> A_0-component,
/// A_i(j) -> -sum_m e_i^m A_m(j) (lower components).
inline PolyObservable to_cartesian_basis(const PolyObservable& p,
                                         const ModeLattice& lat) {
    return substitute_refs(p, [&](const VarRef& v) {
        if (v.sector != Sector::pol && v.sector != Sector::pol_conj) {
            if (is_field_sector(v.sector)) {
                throw std::invalid_argument(
                    "to_cartesian_basis: expected polarization variables");
            }
            return PolyObservable::variable(v);
        }
        const bool cj = v.sector == Sector::pol_conj;
        const std::size_t j = static_cast<std::size_t>(v.mode);
        auto avar = [&](std::size_t mu, Complex coeff) {
            return PolyObservable::variable(cj ? amp_conj_var(j, mu) : amp_var(j, mu),
                                            coeff);
        };
        if (v.mu == 0) return avar(0, 1.0);
        const Mode& m = lat.mode(j);
        PolyObservable out;
        for (std::size_t s = 1; s < 4; ++s) {
            out += avar(s, -m.tetrad[v.mu][s]);
        }
        return out;
    });
}

/// Transverse coefficients -> 3d amplitudes, A_lambda(j) =
/// sqrt(2 k0) A_lambda(k_j). Scalar or longitudinal references have no 3d
/// counterpart and are rejected.
inline PolyObservable to_transverse3d_basis(const PolyObservable& p,
                                            const ModeLattice& lat) {
    return substitute_refs(p, [&](const VarRef& v) {
        if (v.sector != Sector::pol && v.sector != Sector::pol_conj) {
            if (is_field_sector(v.sector)) {
                throw std::invalid_argument(
                    "to_transverse3d_basis: expected polarization variables");
            }
            return PolyObservable::variable(v);
        }
        if (v.mu != 1 && v.mu != 2) {
            throw std::invalid_argument(
                "to_transverse3d_basis: scalar/longitudinal variable has no 3d image");
        }
        const bool cj = v.sector == Sector::pol_conj;
        const std::size_t j = static_cast<std::size_t>(v.mode);
        const double root = std::sqrt(2.0 * lat.mode(j).k0);
        return PolyObservable::variable(cj ? pol3d_conj_var(j, v.mu) : pol3d_var(j, v.mu),
                                        root);
    });
}

// --------------------------------------------------------------------------
// Reduction-chain kernels
// --------------------------------------------------------------------------

/// Amplitude bracket written in tetrad coefficients. Because the tetrad
/// is Minkowski-orthonormal the eta contraction keeps signature (1,3):
/// the scalar term enters with +, the three spatial ones with -.
inline Complex bracket_polarized_from_gradients(const Gradients& gA,
                                                const Gradients& gB,
                                                const BracketConfig& cfg) {
    const ModeLattice& lat = *cfg.lattice;
    KahanComplexSum acc;
    for (std::size_t j = 0; j < lat.size(); ++j) {
        const Mode& m = lat.mode(j);
        const double scale = cfg.a * m.k0 * m.k0 / m.weight;
        Complex mode_sum = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            const double sign = (i == 0) ? 1.0 : -1.0;
            mode_sum += sign * (gA.d[j][i] * gB.d_conj[j][i] -
                                gB.d[j][i] * gA.d_conj[j][i]);
        }
        acc.add(scale * mode_sum);
    }
    return acc.value();
}

inline Complex bracket_polarized(const Observable& A, const Observable& B,
                                 const SystemState& st, const BracketConfig& cfg) {
    const Gradients gA = A.gradients(st, FieldBasis::polarization);
    const Gradients gB = B.gradients(st, FieldBasis::polarization);
    return bracket_polarized_from_gradients(gA, gB, cfg);
}

/// Largest per-mode mismatch between scalar and longitudinal partials,
/// relative to the gradient scale. Zero is what makes the scalar and
/// longitudinal contributions cancel mode by mode.
inline double constraint_compatibility_residual(const Gradients& g) {
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < g.d.size(); ++j) {
        for (std::size_t i = 0; i < 4; ++i) {
            scale = std::max({scale, std::abs(g.d[j][i]), std::abs(g.d_conj[j][i])});
        }
        worst = std::max({worst, std::abs(g.d[j][0] - g.d[j][3]),
                          std::abs(g.d_conj[j][0] - g.d_conj[j][3])});
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

inline double reduced_compatibility_tolerance() { return 1e-10; }

/// Transverse-only form of the polarized bracket, valid for observables
/// whose scalar and longitudinal partials agree (the constraint-
/// compatible class). For those the 0- and 3-contributions cancel exactly
/// and only lambda = 1,2 survive, with the overall spatial sign.
inline Complex bracket_reduced(const Observable& A, const Observable& B,
                               const SystemState& st, const BracketConfig& cfg) {
    const Gradients gA = A.gradients(st, FieldBasis::polarization);
    const Gradients gB = B.gradients(st, FieldBasis::polarization);
    const double ra = constraint_compatibility_residual(gA);
    const double rb = constraint_compatibility_residual(gB);
    if (ra > reduced_compatibility_tolerance() || rb > reduced_compatibility_tolerance()) {
        throw std::invalid_argument(
            "bracket_reduced: observable is not constraint-compatible (residual " +
            std::to_string(std::max(ra, rb)) + ")");
    }
    const ModeLattice& lat = *cfg.lattice;
    KahanComplexSum acc;
    for (std::size_t j = 0; j < lat.size(); ++j) {
        const Mode& m = lat.mode(j);
        const double scale = -cfg.a * m.k0 * m.k0 / m.weight;
        Complex mode_sum = 0.0;
        for (std::size_t lam = 1; lam <= 2; ++lam) {
            mode_sum += gA.d[j][lam] * gB.d_conj[j][lam] -
                        gB.d[j][lam] * gA.d_conj[j][lam];
        }
        acc.add(scale * mode_sum);
    }
    return acc.value();
}

/// The same functional in 3d transverse amplitudes. The sqrt(2 k0) change
/// of variables turns the per-mode weight k0^2/w into k0^2/dk^3.
inline Complex bracket_standard(const Observable& A, const Observable& B,
                                const SystemState& st, const BracketConfig& cfg) {
    const Gradients gA = A.gradients(st, FieldBasis::transverse3d);
    const Gradients gB = B.gradients(st, FieldBasis::transverse3d);
    const ModeLattice& lat = *cfg.lattice;
    const double dk3 = lat.delta_k() * lat.delta_k() * lat.delta_k();
    KahanComplexSum acc;
    for (std::size_t j = 0; j < lat.size(); ++j) {
        const Mode& m = lat.mode(j);
        const double scale = -cfg.a * m.k0 * m.k0 / dk3;
        Complex mode_sum = 0.0;
        for (std::size_t lam = 1; lam <= 2; ++lam) {
            mode_sum += gA.d[j][lam] * gB.d_conj[j][lam] -
                        gB.d[j][lam] * gA.d_conj[j][lam];
        }
        acc.add(scale * mode_sum);
    }
    return acc.value();
}

} // namespace covpb
