#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <variant>
#include <vector>

#include "covpb/field_state.hpp"
#include "covpb/mass_shell.hpp"
#include "covpb/observables.hpp"
#include "covpb/summation.hpp"
#include "covpb/system_state.hpp"

namespace covpb {

/// Bracket kernel parameters. The kernel vector is V_mu = a k0 k_mu;
/// a = 4 is the value that lands on the standard transverse-mode bracket
/// after the polarization reduction.
struct BracketConfig {
    double a = 4.0;
    double c = 1.0;
    LatticePtr lattice;

    BracketConfig(LatticePtr lat, double a_ = 4.0, double c_ = 1.0)
        : a(a_), c(c_), lattice(std::move(lat)) {
        if (!lattice) throw std::invalid_argument("BracketConfig: null lattice");
        if (a == 0.0) throw std::invalid_argument("BracketConfig: a must be nonzero");
        if (!(c > 0.0)) throw std::invalid_argument("BracketConfig: c must be > 0");
    }
};

/// Thrown when the two independent evaluation routes of a bracket drift
/// apart beyond tolerance.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FieldBasis { cartesian, polarization, transverse3d };

/// Per-mode gradient tables of one observable at one state. d holds
/// derivatives with respect to the basis variables, d_conj with respect
/// to their conjugates; for transverse3d only mu = 1,2 are populated.
struct Gradients {
    std::vector<std::array<Complex, 4>> d;
    std::vector<std::array<Complex, 4>> d_conj;
    std::array<Complex, 4> dx{};
    std::array<Complex, 4> dp{};

    explicit Gradients(std::size_t n_modes)
        : d(n_modes, {Complex{}, Complex{}, Complex{}, Complex{}}),
          d_conj(n_modes, {Complex{}, Complex{}, Complex{}, Complex{}}) {}

    void check_finite() const {
        auto ok = [](Complex z) {
            return std::isfinite(z.real()) && std::isfinite(z.imag());
        };
        for (std::size_t j = 0; j < d.size(); ++j) {
            for (std::size_t mu = 0; mu < 4; ++mu) {
                if (!ok(d[j][mu]) || !ok(d_conj[j][mu])) {
                    throw std::domain_error("Gradients: non-finite field gradient");
                }
            }
        }
        for (std::size_t mu = 0; mu < 4; ++mu) {
            if (!ok(dx[mu]) || !ok(dp[mu])) {
                throw std::domain_error("Gradients: non-finite particle gradient");
            }
        }
    }
};

namespace detail {

inline bool sector_matches_basis(Sector s, FieldBasis basis) {
    switch (s) {
        case Sector::amp:
        case Sector::amp_conj:
            return basis == FieldBasis::cartesian;
        case Sector::pol:
        case Sector::pol_conj:
            return basis == FieldBasis::polarization;
        case Sector::pol3d:
        case Sector::pol3d_conj:
            return basis == FieldBasis::transverse3d;
        default:
            return true; // particle sectors are basis-independent
    }
}

inline void slot_for(Gradients& g, const VarRef& v, Complex value) {
    switch (v.sector) {
        case Sector::particle_x:
            g.dx[v.mu] += value;
            return;
        case Sector::particle_p:
            g.dp[v.mu] += value;
            return;
        default:
            break;
    }
    const std::size_t j = static_cast<std::size_t>(v.mode);
    if (is_conjugate_sector(v.sector)) {
        g.d_conj[j][v.mu] += value;
    } else {
        g.d[j][v.mu] += value;
    }
}

} // namespace detail

/// Exact gradients of a polynomial observable. The polynomial's field
/// references must live in the requested basis; mixing bases inside one
/// bracket operand has no defined kernel and is rejected.
inline Gradients compute_gradients(const PolyObservable& p, const SystemState& st,
                                   FieldBasis basis) {
    Gradients g(st.field.size());
    for (const auto& term : p.terms()) {
        for (const VarRef& v : term.refs) {
            if (is_field_sector(v.sector) && !detail::sector_matches_basis(v.sector, basis)) {
                throw std::invalid_argument(
                    "compute_gradients: observable not expressed in the kernel basis");
            }
            if (is_field_sector(v.sector) &&
                (v.mode < 0 || static_cast<std::size_t>(v.mode) >= st.field.size())) {
                throw std::out_of_range("compute_gradients: mode index out of range");
            }
        }
        for (std::size_t i = 0; i < term.refs.size(); ++i) {
            Complex prod = term.coeff;
            for (std::size_t k = 0; k < term.refs.size(); ++k) {
                if (k != i) prod *= variable_value(st, term.refs[k]);
            }
            detail::slot_for(g, term.refs[i], prod);
        }
    }
    g.check_finite();
    return g;
}

/// Finite-difference gradients of a generic observable over every mode
/// variable of the requested basis plus the particle coordinates.
inline Gradients compute_gradients(const GenericObservable& o, const SystemState& st,
                                   FieldBasis basis) {
    Gradients g(st.field.size());
    const Sector base_sector = basis == FieldBasis::cartesian  ? Sector::amp
                               : basis == FieldBasis::polarization ? Sector::pol
                                                                   : Sector::pol3d;
    const std::size_t mu_lo = basis == FieldBasis::transverse3d ? 1 : 0;
    const std::size_t mu_hi = basis == FieldBasis::transverse3d ? 2 : 3;
    for (std::size_t j = 0; j < st.field.size(); ++j) {
        for (std::size_t mu = mu_lo; mu <= mu_hi; ++mu) {
            const VarRef v{base_sector, static_cast<std::int32_t>(j),
                           static_cast<std::uint8_t>(mu)};
            auto [dz, dzbar] = fd_wirtinger(o, st, v);
            g.d[j][mu] = dz;
            g.d_conj[j][mu] = dzbar;
        }
    }
    for (std::size_t mu = 0; mu < 4; ++mu) {
        g.dx[mu] = fd_gradient_real(o, st, x_var(mu));
        g.dp[mu] = fd_gradient_real(o, st, p_var(mu));
    }
    g.check_finite();
    return g;
}

/// Either a polynomial with exact gradients or a generic functional with
/// finite-difference ones; brackets accept both interchangeably.
class Observable {
public:
    Observable(PolyObservable p) : impl_(std::move(p)) {}
    Observable(GenericObservable g) : impl_(std::move(g)) {}

    Complex evaluate(const SystemState& st) const {
        return std::visit([&](const auto& o) { return o.evaluate(st); }, impl_);
    }

    Gradients gradients(const SystemState& st, FieldBasis basis) const {
        return std::visit([&](const auto& o) { return compute_gradients(o, st, basis); },
                          impl_);
    }

    const PolyObservable* poly() const { return std::get_if<PolyObservable>(&impl_); }

private:
    std::variant<PolyObservable, GenericObservable> impl_;
};

// --------------------------------------------------------------------------
// Equal-time kernels
// --------------------------------------------------------------------------

/// Amplitude-variable bracket
///   {A,B} = a sum_j (k0_j^2 / w_j) eta^{mu nu}
///           [dA/dA_mu(j) dB/dA*_nu(j) - dB/dA_mu(j) dA/dA*_nu(j)],
/// the lattice image of the shell integral with kernel V = a k0 k. The
/// 1/w_j is what survives of the measure weight against the two
/// functional-derivative conventions dF/dA(k_j) = (1/w_j) dF/dA_j.
inline Complex bracket_amp_from_gradients(const Gradients& gA, const Gradients& gB,
                                          const BracketConfig& cfg) {
    const ModeLattice& lat = *cfg.lattice;
    KahanComplexSum acc;
    for (std::size_t j = 0; j < lat.size(); ++j) {
        const Mode& m = lat.mode(j);
        const double scale = cfg.a * m.k0 * m.k0 / m.weight;
        Complex mode_sum = 0.0;
        for (std::size_t mu = 0; mu < 4; ++mu) {
            mode_sum += kMetricDiag[mu] * (gA.d[j][mu] * gB.d_conj[j][mu] -
                                           gB.d[j][mu] * gA.d_conj[j][mu]);
        }
        acc.add(scale * mode_sum);
    }
    return acc.value();
}

inline Complex bracket_amp(const Observable& A, const Observable& B,
                           const SystemState& st, const BracketConfig& cfg) {
    const Gradients gA = A.gradients(st, FieldBasis::cartesian);
    const Gradients gB = B.gradients(st, FieldBasis::cartesian);
    return bracket_amp_from_gradients(gA, gB, cfg);
}

/// Natural magnitude of the amplitude-bracket mode sum (absolute values
/// throughout). Brackets that vanish through cross-mode cancellation are
/// tiny relative to this, which is the right yardstick for route
/// comparisons.
inline double bracket_amp_magnitude(const Gradients& gA, const Gradients& gB,
                                    const BracketConfig& cfg) {
    const ModeLattice& lat = *cfg.lattice;
    KahanSum acc;
    for (std::size_t j = 0; j < lat.size(); ++j) {
        const Mode& m = lat.mode(j);
        const double scale = std::abs(cfg.a) * m.k0 * m.k0 / m.weight;
        double mode_sum = 0.0;
        for (std::size_t mu = 0; mu < 4; ++mu) {
            mode_sum += std::abs(gA.d[j][mu]) * std::abs(gB.d_conj[j][mu]) +
                        std::abs(gB.d[j][mu]) * std::abs(gA.d_conj[j][mu]);
        }
        acc.add(scale * mode_sum);
    }
    return acc.value();
}

/// Particle-variable bracket eta^{mu nu} [dA/dx_mu dB/dp_nu - (A<->B)].
inline Complex bracket_particle_from_gradients(const Gradients& gA,
                                               const Gradients& gB) {
    Complex sum = 0.0;
    for (std::size_t mu = 0; mu < 4; ++mu) {
        sum += kMetricDiag[mu] *
               (gA.dx[mu] * gB.dp[mu] - gB.dx[mu] * gA.dp[mu]);
    }
    return sum;
}

inline Complex bracket_particle(const Observable& A, const Observable& B,
                                const SystemState& st) {
    // lattice size only used for array shape; cartesian basis is arbitrary
    const Gradients gA = A.gradients(st, FieldBasis::cartesian);
    const Gradients gB = B.gradients(st, FieldBasis::cartesian);
    return bracket_particle_from_gradients(gA, gB);
}

// --------------------------------------------------------------------------
// Canonical (q, pi) route
// --------------------------------------------------------------------------

/// Gradients with respect to the real mode pairs (q_mu, s_mu) carrying
/// plane-wave phases attached at a declared point, plus the particle
/// block. Obtained from amplitude gradients by the exact linear map.
struct CanonicalGradients {
    std::vector<std::array<Complex, 4>> dq;
    std::vector<std::array<Complex, 4>> ds;
    std::array<Complex, 4> dx{};
    std::array<Complex, 4> dp{};
    FourVector phase_x{0, 0, 0, 0};

    explicit CanonicalGradients(std::size_t n)
        : dq(n, {Complex{}, Complex{}, Complex{}, Complex{}}),
          ds(n, {Complex{}, Complex{}, Complex{}, Complex{}}) {}
};

/// Chain rule through A_mu(j) = sqrt(2 pi c k0) (s_mu + i q_mu) e^{+ik.x}:
///   dF/dq_mu = i sqrt(2 pi c k0) [e^{ik.x} dF/dA_mu - e^{-ik.x} dF/dA*_mu]
///   dF/ds_mu =   sqrt(2 pi c k0) [e^{ik.x} dF/dA_mu + e^{-ik.x} dF/dA*_mu]
inline CanonicalGradients canonical_gradients(const Gradients& g,
                                              const ModeLattice& lat, double c,
                                              const FourVector& phase_x) {
    CanonicalGradients cg(lat.size());
    cg.dx = g.dx;
    cg.dp = g.dp;
    cg.phase_x = phase_x;
    const Complex i(0.0, 1.0);
    for (std::size_t j = 0; j < lat.size(); ++j) {
        const Mode& m = lat.mode(j);
        const double root = std::sqrt(2.0 * kPi * c * m.k0);
        const Complex ph = std::conj(mode_phase(m, phase_x)); // e^{+ik.x}
        const Complex phc = std::conj(ph);
        for (std::size_t mu = 0; mu < 4; ++mu) {
            const Complex da = ph * g.d[j][mu];
            const Complex dac = phc * g.d_conj[j][mu];
            cg.dq[j][mu] = i * root * (da - dac);
            cg.ds[j][mu] = root * (da + dac);
        }
    }
    return cg;
}

/// (q, pi)-form kernel. Contracting the rank-one momentum pi = k (x) s
/// against V = a k0 k collapses the pi-leg to a k0 s-derivative:
///   {A,B} = sum_j (a k0_j / w_j) eta^{mu nu}
///           [dA/dq_mu dB/ds_nu - dB/dq_mu dA/ds_nu].
inline Complex bracket_canonical_field(const CanonicalGradients& gA,
                                       const CanonicalGradients& gB,
                                       const BracketConfig& cfg) {
    const ModeLattice& lat = *cfg.lattice;
    KahanComplexSum acc;
    for (std::size_t j = 0; j < lat.size(); ++j) {
        const Mode& m = lat.mode(j);
        const double scale = cfg.a * m.k0 / m.weight;
        Complex mode_sum = 0.0;
        for (std::size_t mu = 0; mu < 4; ++mu) {
            mode_sum += kMetricDiag[mu] * (gA.dq[j][mu] * gB.ds[j][mu] -
                                           gB.dq[j][mu] * gA.ds[j][mu]);
        }
        acc.add(scale * mode_sum);
    }
    return acc.value();
}

struct QpiResult {
    Complex value;                 // route (i): 4 pi i c x amplitude bracket
    Complex direct;                // route (ii): (q, pi) quadrature
    double consistency_residual;   // relative disagreement of the routes
};

inline double qpi_consistency_tolerance() { return 1e-10; }

/// Field bracket in the canonical normalization. Route (i) scales the
/// amplitude bracket by 4 pi i c; route (ii) evaluates the (q, pi) kernel
/// through the exact chain rule at the given phase point. The two must
/// agree; drift beyond 1e-10 relative is an internal-consistency error.
inline QpiResult bracket_qpi_checked(const Observable& A, const Observable& B,
                                     const SystemState& st, const BracketConfig& cfg,
                                     const FourVector& phase_x = FourVector(0, 0, 0, 0)) {
    const Gradients gA = A.gradients(st, FieldBasis::cartesian);
    const Gradients gB = B.gradients(st, FieldBasis::cartesian);

    const Complex amp = bracket_amp_from_gradients(gA, gB, cfg);
    const Complex route_i = Complex(0.0, 4.0 * kPi * cfg.c) * amp;

    const CanonicalGradients cA = canonical_gradients(gA, *cfg.lattice, cfg.c, phase_x);
    const CanonicalGradients cB = canonical_gradients(gB, *cfg.lattice, cfg.c, phase_x);
    const Complex route_ii = bracket_canonical_field(cA, cB, cfg);

    const double mag = 4.0 * kPi * cfg.c * bracket_amp_magnitude(gA, gB, cfg);
    const double scale =
        std::max({std::abs(route_i), std::abs(route_ii), mag, 1e-300});
    QpiResult r{route_i, route_ii, std::abs(route_i - route_ii) / scale};
    if (r.consistency_residual > qpi_consistency_tolerance()) {
        throw ConsistencyError("bracket_qpi: (q,pi) and amplitude routes disagree, "
                               "relative residual " +
                               std::to_string(r.consistency_residual));
    }
    return r;
}

inline Complex bracket_qpi(const Observable& A, const Observable& B,
                           const SystemState& st, const BracketConfig& cfg) {
    return bracket_qpi_checked(A, B, st, cfg).value;
}

/// Joint bracket over the union of particle and field canonical variables.
struct BracketReport {
    Complex value;
    Complex field_part;
    Complex particle_part;
    double consistency_residual = 0.0;
};

inline BracketReport bracket_joint(const Observable& A, const Observable& B,
                                   const SystemState& st, const BracketConfig& cfg,
                                   const FourVector& phase_x = FourVector(0, 0, 0, 0)) {
    const Gradients gA = A.gradients(st, FieldBasis::cartesian);
    const Gradients gB = B.gradients(st, FieldBasis::cartesian);

    const Complex amp = bracket_amp_from_gradients(gA, gB, cfg);
    const Complex field = Complex(0.0, 4.0 * kPi * cfg.c) * amp;
    const CanonicalGradients cA = canonical_gradients(gA, *cfg.lattice, cfg.c, phase_x);
    const CanonicalGradients cB = canonical_gradients(gB, *cfg.lattice, cfg.c, phase_x);
    const Complex direct = bracket_canonical_field(cA, cB, cfg);
    const double fscale =
        std::max({std::abs(field), std::abs(direct),
                  4.0 * kPi * cfg.c * bracket_amp_magnitude(gA, gB, cfg), 1e-300});

    BracketReport rep;
    rep.field_part = field;
    rep.particle_part = bracket_particle_from_gradients(gA, gB);
    rep.value = rep.field_part + rep.particle_part;
    rep.consistency_residual = std::abs(field - direct) / fscale;
    if (rep.consistency_residual > qpi_consistency_tolerance()) {
        throw ConsistencyError("bracket_joint: field-route disagreement");
    }
    return rep;
}

// --------------------------------------------------------------------------
// Algebraic (polynomial-closed) brackets
// --------------------------------------------------------------------------

/// Amplitude bracket of two polynomials as a polynomial. Only modes that
/// actually appear contribute, so the result stays small.
inline PolyObservable poisson_amp_algebraic(const PolyObservable& A,
                                            const PolyObservable& B,
                                            const BracketConfig& cfg) {
    std::vector<std::int32_t> modes;
    auto collect = [&](const PolyObservable& p) {
        for (const auto& t : p.terms()) {
            for (const VarRef& v : t.refs) {
                if (!is_field_sector(v.sector)) continue;
                if (v.sector != Sector::amp && v.sector != Sector::amp_conj) {
                    throw std::invalid_argument(
                        "poisson_amp_algebraic: needs Cartesian amplitude variables");
                }
                if (std::find(modes.begin(), modes.end(), v.mode) == modes.end()) {
                    modes.push_back(v.mode);
                }
            }
        }
    };
    collect(A);
    collect(B);

    PolyObservable out;
    for (std::int32_t jm : modes) {
        const std::size_t j = static_cast<std::size_t>(jm);
        const Mode& m = cfg.lattice->mode(j);
        const double scale = cfg.a * m.k0 * m.k0 / m.weight;
        for (std::size_t mu = 0; mu < 4; ++mu) {
            const VarRef va = amp_var(j, mu);
            const VarRef vc = amp_conj_var(j, mu);
            const Complex w = scale * kMetricDiag[mu];
            out += w * (A.partial(va) * B.partial(vc) - B.partial(va) * A.partial(vc));
        }
    }
    return out;
}

inline PolyObservable poisson_particle_algebraic(const PolyObservable& A,
                                                 const PolyObservable& B) {
    PolyObservable out;
    for (std::size_t mu = 0; mu < 4; ++mu) {
        const VarRef vx = x_var(mu);
        const VarRef vp = p_var(mu);
        const Complex w = kMetricDiag[mu];
        out += w * (A.partial(vx) * B.partial(vp) - B.partial(vx) * A.partial(vp));
    }
    return out;
}

/// Joint algebraic bracket: 4 pi i c x amplitude part + particle part.
/// Closed on polynomials, which is what makes the Jacobi identity testable
/// without quadrature error.
inline PolyObservable poisson_joint_algebraic(const PolyObservable& A,
                                              const PolyObservable& B,
                                              const BracketConfig& cfg) {
    return Complex(0.0, 4.0 * kPi * cfg.c) * poisson_amp_algebraic(A, B, cfg) +
           poisson_particle_algebraic(A, B);
}

// --------------------------------------------------------------------------
// Named linear observables of the free field
// --------------------------------------------------------------------------

/// q_mu(j; x) = i (A*_mu e^{+ik.x} - A_mu e^{-ik.x}) / sqrt(8 pi c k0).
inline PolyObservable q_observable(const ModeLattice& lat, double c, std::size_t j,
                                   std::size_t mu, const FourVector& x) {
    const Mode& m = lat.mode(j);
    const Complex ph = mode_phase(m, x); // e^{-ik.x}
    const double norm = canonical_norm(c, m.k0);
    const Complex i(0.0, 1.0);
    return PolyObservable::variable(amp_conj_var(j, mu), i * std::conj(ph) / norm) +
           PolyObservable::variable(amp_var(j, mu), -i * ph / norm);
}

/// s_mu(j; x) = (A*_mu e^{+ik.x} + A_mu e^{-ik.x}) / sqrt(8 pi c k0).
inline PolyObservable s_observable(const ModeLattice& lat, double c, std::size_t j,
                                   std::size_t mu, const FourVector& x) {
    const Mode& m = lat.mode(j);
    const Complex ph = mode_phase(m, x);
    const double norm = canonical_norm(c, m.k0);
    return PolyObservable::variable(amp_conj_var(j, mu), std::conj(ph) / norm) +
           PolyObservable::variable(amp_var(j, mu), ph / norm);
}

/// pi_{lambda nu}(j; x) = k_lambda(j) s_nu(j; x).
inline PolyObservable pi_observable(const ModeLattice& lat, double c, std::size_t j,
                                    std::size_t lambda, std::size_t nu,
                                    const FourVector& x) {
    const double k_lo = lat.mode(j).k_lower()[lambda];
    return Complex(k_lo) * s_observable(lat, c, j, nu, x);
}

/// A_nu(x) as a linear functional of the amplitudes.
inline PolyObservable potential_observable(const ModeLattice& lat, std::size_t nu,
                                           const FourVector& x) {
    PolyObservable out;
    for (std::size_t j = 0; j < lat.size(); ++j) {
        const Mode& m = lat.mode(j);
        const Complex ph = mode_phase(m, x);
        const Complex coeff = m.weight / kEightPiCubed;
        out += PolyObservable::variable(amp_var(j, nu), coeff * ph);
        out += PolyObservable::variable(amp_conj_var(j, nu), coeff * std::conj(ph));
    }
    return out;
}

/// theta_{lambda nu}(x) = -(4 pi c)^-1 d_lambda A_nu(x) as a linear
/// functional of the amplitudes.
inline PolyObservable theta_observable(const ModeLattice& lat, double c,
                                       std::size_t lambda, std::size_t nu,
                                       const FourVector& x) {
    PolyObservable out;
    const Complex i(0.0, 1.0);
    for (std::size_t j = 0; j < lat.size(); ++j) {
        const Mode& m = lat.mode(j);
        const Complex ph = mode_phase(m, x);
        const double k_lo = m.k_lower()[lambda];
        const Complex base = -m.weight / (4.0 * kPi * c * kEightPiCubed);
        out += PolyObservable::variable(amp_var(j, nu), base * (-i * k_lo) * ph);
        out += PolyObservable::variable(amp_conj_var(j, nu),
                                        base * (i * k_lo) * std::conj(ph));
    }
    return out;
}

// --------------------------------------------------------------------------
// Non-equal-time bracket via tangent-map pullback
// --------------------------------------------------------------------------

/// Tangent map of a flow on the canonical field pairs plus the particle
/// block. pull_back must turn gradients with respect to the state at
/// time tau0 into gradients with respect to the state at time s0.
class CanonicalFlow {
public:
    virtual ~CanonicalFlow() = default;
    virtual void pull_back(CanonicalGradients& g, double tau0, double s0) const = 0;
};

class IdentityFlow final : public CanonicalFlow {
public:
    void pull_back(CanonicalGradients&, double, double) const override {}
};

/// Free-field flow: each mode pair (s, q) rotates by k0 (tau0 - s0), the
/// particle block is untouched. The pullback multiplies gradients by the
/// transposed rotation, which is exact.
class FreeFieldFlow final : public CanonicalFlow {
public:
    explicit FreeFieldFlow(LatticePtr lat) : lattice_(std::move(lat)) {
        if (!lattice_) throw std::invalid_argument("FreeFieldFlow: null lattice");
    }

    void pull_back(CanonicalGradients& g, double tau0, double s0) const override {
        const double dt = tau0 - s0;
        for (std::size_t j = 0; j < lattice_->size(); ++j) {
            const double phi = lattice_->mode(j).k0 * dt;
            const double cph = std::cos(phi);
            const double sph = std::sin(phi);
            if (!std::isfinite(cph) || !std::isfinite(sph)) {
                throw std::domain_error("FreeFieldFlow: non-finite rotation");
            }
            for (std::size_t mu = 0; mu < 4; ++mu) {
                // s(tau) = c s(s) + s q(s); q(tau) = -s s(s) + c q(s)
                const Complex ds_tau = g.ds[j][mu];
                const Complex dq_tau = g.dq[j][mu];
                g.ds[j][mu] = cph * ds_tau - sph * dq_tau;
                g.dq[j][mu] = sph * ds_tau + cph * dq_tau;
            }
        }
    }

private:
    LatticePtr lattice_;
};

/// Non-equal-time bracket: express A (an observable of the state at time
/// tau_a0) and B (at tau_b0) through the initial data at time s0 by the
/// flow's tangent map, then apply the equal-time kernel at s0. Times are
/// x0 values. For the free field the result is s0-independent.
inline Complex bracket_nonequal_time(const Observable& A, double tau_a0,
                                     const Observable& B, double tau_b0, double s0,
                                     const CanonicalFlow& flow, const SystemState& st,
                                     const BracketConfig& cfg) {
    const Gradients gA = A.gradients(st, FieldBasis::cartesian);
    const Gradients gB = B.gradients(st, FieldBasis::cartesian);

    CanonicalGradients cA = canonical_gradients(gA, *cfg.lattice, cfg.c,
                                                FourVector(tau_a0, 0, 0, 0));
    CanonicalGradients cB = canonical_gradients(gB, *cfg.lattice, cfg.c,
                                                FourVector(tau_b0, 0, 0, 0));
    flow.pull_back(cA, tau_a0, s0);
    flow.pull_back(cB, tau_b0, s0);

    const Complex field = bracket_canonical_field(cA, cB, cfg);
    Complex particle = 0.0;
    for (std::size_t mu = 0; mu < 4; ++mu) {
        particle += kMetricDiag[mu] * (cA.dx[mu] * cB.dp[mu] - cB.dx[mu] * cA.dp[mu]);
    }
    return field + particle;
}

// --------------------------------------------------------------------------
// Independent oracles: K_mu mode sum and Pauli-Jordan quadratures
// --------------------------------------------------------------------------

/// Lattice Pauli-Jordan function
///   D(x) = -(2 pi)^-3 sum_j dk^3 sin(k0 x0 - k.x) / k0.
inline double pauli_jordan_lattice(const ModeLattice& lat, const FourVector& x) {
    return checked_sum(lat.size(), [&](std::size_t j) {
               const Mode& m = lat.mode(j);
               const double phase = minkowski_dot(m.k(), x.raised());
               return -2.0 * m.weight * std::sin(phase);
           }) /
           kEightPiCubed;
}

/// Analytic gradient d_lambda D(x), covariant components.
inline FourVector pauli_jordan_grad(const ModeLattice& lat, const FourVector& x) {
    FourVector g(0, 0, 0, 0, Variance::covariant);
    for (std::size_t lam = 0; lam < 4; ++lam) {
        g[lam] = checked_sum(lat.size(), [&](std::size_t j) {
                     const Mode& m = lat.mode(j);
                     const double phase = minkowski_dot(m.k(), x.raised());
                     return -2.0 * m.weight * m.k_lower()[lam] * std::cos(phase);
                 }) /
                 kEightPiCubed;
    }
    return g;
}

/// Unweighted lattice Dirichlet kernel, the mode-sum image of the spatial
/// delta: (2 pi)^-3 sum_j dk^3 cos(k.r).
inline double dirichlet_kernel(const ModeLattice& lat, const Triple& r) {
    const double dk3 = lat.delta_k() * lat.delta_k() * lat.delta_k();
    return checked_sum(lat.size(), [&](std::size_t j) {
               return dk3 * std::cos(dot3(lat.mode(j).k_spatial, r));
           }) /
           kEightPiCubed;
}

/// k0^2-weighted Dirichlet kernel. This is the delta image the bracket
/// kernel actually produces: the pair bracket carries k0^2 per mode, so
/// position-space brackets concentrate like this sum rather than like the
/// unweighted one.
inline double dirichlet_kernel_weighted(const ModeLattice& lat, const Triple& r) {
    const double dk3 = lat.delta_k() * lat.delta_k() * lat.delta_k();
    return checked_sum(lat.size(), [&](std::size_t j) {
               const Mode& m = lat.mode(j);
               return dk3 * m.k0 * m.k0 * std::cos(dot3(m.k_spatial, r));
           }) /
           kEightPiCubed;
}

/// k0-weighted Pauli-Jordan sum, the x-profile of the non-equal-time
/// field-field bracket: -(2 pi)^-3 sum_j dk^3 k0 sin(k.x).
inline double pauli_jordan_weighted(const ModeLattice& lat, const FourVector& x) {
    const double dk3 = lat.delta_k() * lat.delta_k() * lat.delta_k();
    return checked_sum(lat.size(), [&](std::size_t j) {
               const Mode& m = lat.mode(j);
               const double phase = minkowski_dot(m.k(), x.raised());
               return -dk3 * m.k0 * std::sin(phase);
           }) /
           kEightPiCubed;
}

inline FourVector pauli_jordan_weighted_grad(const ModeLattice& lat,
                                             const FourVector& x) {
    const double dk3 = lat.delta_k() * lat.delta_k() * lat.delta_k();
    FourVector g(0, 0, 0, 0, Variance::covariant);
    for (std::size_t lam = 0; lam < 4; ++lam) {
        g[lam] = checked_sum(lat.size(), [&](std::size_t j) {
                     const Mode& m = lat.mode(j);
                     const double phase = minkowski_dot(m.k(), x.raised());
                     return -dk3 * m.k0 * m.k_lower()[lam] * std::cos(phase);
                 }) /
                 kEightPiCubed;
    }
    return g;
}

/// The normalization constant that stands in for the continuum
/// delta^2(0)/(8 pi^3) prefactor once the weighted kernels above are taken
/// as the delta images: C_lat = 1/(2 pi^3). Verified numerically by the
/// least-squares extraction in the verification suite.
inline double lattice_bracket_norm() { return 1.0 / (2.0 * kPi * kPi * kPi); }

struct FieldThetaBracket {
    // index order [mu][lambda][nu]
    double oracle[4][4][4] = {};
    double chain[4][4][4] = {};
};

/// Equal-time {A_mu(x), theta_{lambda nu}(x')} both ways. The oracle is
/// the direct mode sum derived from the fundamental pair brackets,
///   (a / 32 pi^6) sum_j w_j k0^2 k_lambda
///     [sin(k.x) sin(k.x') + cos(k.x) cos(k.x')] eta_{mu nu},
/// i.e. the K_lambda structure with V = a k0 k under the lattice
/// conventions. The chain route goes through the (q, pi) bracket of the
/// reconstruction observables. Both share only the lattice.
inline FieldThetaBracket field_theta_bracket_oracle(const Triple& xs, const Triple& xps,
                                                    double x0, const SystemState& st,
                                                    const BracketConfig& cfg) {
    FieldThetaBracket out;
    const ModeLattice& lat = *cfg.lattice;

    for (std::size_t lam = 0; lam < 4; ++lam) {
        const double profile = checked_sum(lat.size(), [&](std::size_t j) {
            const Mode& m = lat.mode(j);
            const double px = dot3(m.k_spatial, xs);
            const double pxp = dot3(m.k_spatial, xps);
            return m.weight * m.k0 * m.k0 * m.k_lower()[lam] *
                   (std::sin(px) * std::sin(pxp) + std::cos(px) * std::cos(pxp));
        });
        const double scale = cfg.a / (32.0 * kPi * kPi * kPi * kPi * kPi * kPi);
        for (std::size_t mu = 0; mu < 4; ++mu) {
            out.oracle[mu][lam][mu] = scale * profile * kMetricDiag[mu];
        }
    }

    const FourVector x(x0, xs[0], xs[1], xs[2]);
    const FourVector xp(x0, xps[0], xps[1], xps[2]);
    for (std::size_t mu = 0; mu < 4; ++mu) {
        const Observable A = potential_observable(lat, mu, x);
        for (std::size_t lam = 0; lam < 4; ++lam) {
            for (std::size_t nu = 0; nu < 4; ++nu) {
                const Observable Th = theta_observable(lat, cfg.c, lam, nu, xp);
                out.chain[mu][lam][nu] = bracket_qpi(A, Th, st, cfg).real();
            }
        }
    }
    return out;
}

struct BoostInvarianceResult {
    double value_x = 0.0;
    double value_boosted = 0.0;
    double deviation = 0.0; // relative
};

/// Evaluates the Pauli-Jordan sum at x and at Lambda x on one lattice.
/// The continuum function is invariant; the lattice deviation measures
/// quadrature anisotropy and should shrink under refinement.
inline BoostInvarianceResult boost_invariance_check(const FourVector& x,
                                                    const LorentzMap& L,
                                                    double delta_k, int n_max) {
    const ModeLattice lat(delta_k, n_max);
    BoostInvarianceResult r;
    r.value_x = pauli_jordan_lattice(lat, x);
    r.value_boosted = pauli_jordan_lattice(lat, L.apply(x.raised()));
    r.deviation = std::abs(r.value_boosted - r.value_x) /
                  std::max(std::abs(r.value_x), 1e-300);
    return r;
}

} // namespace covpb
