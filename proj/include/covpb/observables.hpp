#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "covpb/system_state.hpp"

namespace covpb {

/// Primitive phase-space coordinates an observable may reference. The
/// Cartesian amplitudes are the canonical set; pol/pol3d are the same
/// degrees of freedom in the per-mode polarization basis and its
/// sqrt(2 k0)-rescaled transverse form.
enum class Sector : std::uint8_t {
    amp,        // A_mu(j), covariant component
    amp_conj,   // conj(A_mu(j))
    pol,        // tetrad coefficient A_i(j), i = 0..3
    pol_conj,
    pol3d,      // transverse A_lambda(k_j) = A_lambda(j)/sqrt(2 k0), lambda = 1,2
    pol3d_conj,
    particle_x, // x_mu, covariant component
    particle_p, // p_mu, covariant component
};

inline bool is_field_sector(Sector s) {
    return s != Sector::particle_x && s != Sector::particle_p;
}

inline bool is_conjugate_sector(Sector s) {
    return s == Sector::amp_conj || s == Sector::pol_conj || s == Sector::pol3d_conj;
}

inline Sector conjugate_sector(Sector s) {
    switch (s) {
        case Sector::amp: return Sector::amp_conj;
        case Sector::amp_conj: return Sector::amp;
        case Sector::pol: return Sector::pol_conj;
        case Sector::pol_conj: return Sector::pol;
        case Sector::pol3d: return Sector::pol3d_conj;
        case Sector::pol3d_conj: return Sector::pol3d;
        default: return s;
    }
}

struct VarRef {
    Sector sector = Sector::amp;
    std::int32_t mode = -1; // lattice index for field sectors, -1 otherwise
    std::uint8_t mu = 0;

    friend bool operator==(const VarRef& a, const VarRef& b) {
        return a.sector == b.sector && a.mode == b.mode && a.mu == b.mu;
    }
    friend bool operator<(const VarRef& a, const VarRef& b) {
        return std::tuple(static_cast<int>(a.sector), a.mode, a.mu) <
               std::tuple(static_cast<int>(b.sector), b.mode, b.mu);
    }
};

inline VarRef amp_var(std::size_t j, std::size_t mu) {
    return {Sector::amp, static_cast<std::int32_t>(j), static_cast<std::uint8_t>(mu)};
}
inline VarRef amp_conj_var(std::size_t j, std::size_t mu) {
    return {Sector::amp_conj, static_cast<std::int32_t>(j), static_cast<std::uint8_t>(mu)};
}
inline VarRef pol_var(std::size_t j, std::size_t i) {
    return {Sector::pol, static_cast<std::int32_t>(j), static_cast<std::uint8_t>(i)};
}
inline VarRef pol_conj_var(std::size_t j, std::size_t i) {
    return {Sector::pol_conj, static_cast<std::int32_t>(j), static_cast<std::uint8_t>(i)};
}
inline VarRef pol3d_var(std::size_t j, std::size_t lambda) {
    return {Sector::pol3d, static_cast<std::int32_t>(j), static_cast<std::uint8_t>(lambda)};
}
inline VarRef pol3d_conj_var(std::size_t j, std::size_t lambda) {
    return {Sector::pol3d_conj, static_cast<std::int32_t>(j),
            static_cast<std::uint8_t>(lambda)};
}
inline VarRef x_var(std::size_t mu) {
    return {Sector::particle_x, -1, static_cast<std::uint8_t>(mu)};
}
inline VarRef p_var(std::size_t mu) {
    return {Sector::particle_p, -1, static_cast<std::uint8_t>(mu)};
}

/// Tetrad coefficient A_i(j) of a covariant amplitude: A_0 is the lower
/// time component, A_i (i = 1..3) the projection of the contravariant
/// spatial part onto e_i.
inline Complex polarization_component(const Mode& m, const CFourVector& amp,
                                      std::size_t i) {
    if (i == 0) return amp[0];
    const FourVector& e = m.tetrad[i];
    // contravariant spatial part is minus the stored covariant components
    return -(amp[1] * e[1] + amp[2] * e[2] + amp[3] * e[3]);
}

inline Complex variable_value(const SystemState& st, const VarRef& v) {
    switch (v.sector) {
        case Sector::particle_x:
            return st.particle.x.lowered()[v.mu];
        case Sector::particle_p:
            return st.particle.p[v.mu];
        default:
            break;
    }
    if (v.mode < 0 || static_cast<std::size_t>(v.mode) >= st.field.size()) {
        throw std::out_of_range("variable_value: mode index out of range");
    }
    const std::size_t j = static_cast<std::size_t>(v.mode);
    const Mode& m = st.field.lattice().mode(j);
    switch (v.sector) {
        case Sector::amp:
            return st.field.amp(j)[v.mu];
        case Sector::amp_conj:
            return std::conj(st.field.amp(j)[v.mu]);
        case Sector::pol:
            return polarization_component(m, st.field.amp(j), v.mu);
        case Sector::pol_conj:
            return std::conj(polarization_component(m, st.field.amp(j), v.mu));
        case Sector::pol3d:
            return polarization_component(m, st.field.amp(j), v.mu) /
                   std::sqrt(2.0 * m.k0);
        case Sector::pol3d_conj:
            return std::conj(polarization_component(m, st.field.amp(j), v.mu)) /
                   std::sqrt(2.0 * m.k0);
        default:
            throw std::logic_error("variable_value: unhandled sector");
    }
}

/// Polynomial in the phase-space variables, kept in a canonical form:
/// refs sorted within each monomial, monomials sorted, equal monomials
/// merged, zero coefficients purged. Formal partial derivatives are exact.
class PolyObservable {
public:
    struct Term {
        Complex coeff;
        std::vector<VarRef> refs; // sorted
    };

    PolyObservable() = default;

    static PolyObservable constant(Complex c) {
        PolyObservable p;
        if (c != 0.0) p.terms_.push_back({c, {}});
        return p;
    }

    static PolyObservable variable(VarRef v, Complex coeff = 1.0) {
        PolyObservable p;
        if (coeff != 0.0) p.terms_.push_back({coeff, {v}});
        return p;
    }

    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    PolyObservable& operator+=(const PolyObservable& o) {
        terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
        normalize();
        return *this;
    }

    PolyObservable& operator-=(const PolyObservable& o) {
        for (const Term& t : o.terms_) terms_.push_back({-t.coeff, t.refs});
        normalize();
        return *this;
    }

    friend PolyObservable operator+(PolyObservable a, const PolyObservable& b) {
        return a += b;
    }
    friend PolyObservable operator-(PolyObservable a, const PolyObservable& b) {
        return a -= b;
    }

    friend PolyObservable operator*(const PolyObservable& a, const PolyObservable& b) {
        PolyObservable r;
        r.terms_.reserve(a.terms_.size() * b.terms_.size());
        for (const Term& ta : a.terms_) {
            for (const Term& tb : b.terms_) {
                Term t;
                t.coeff = ta.coeff * tb.coeff;
                t.refs = ta.refs;
                t.refs.insert(t.refs.end(), tb.refs.begin(), tb.refs.end());
                r.terms_.push_back(std::move(t));
            }
        }
        r.normalize();
        return r;
    }

    friend PolyObservable operator*(Complex s, PolyObservable p) {
        for (Term& t : p.terms_) t.coeff *= s;
        p.normalize();
        return p;
    }

    friend PolyObservable operator*(PolyObservable p, Complex s) {
        return s * std::move(p);
    }

    PolyObservable operator-() const { return Complex(-1.0) * (*this); }

    PolyObservable conjugate() const {
        PolyObservable r;
        r.terms_.reserve(terms_.size());
        for (const Term& t : terms_) {
            Term ct;
            ct.coeff = std::conj(t.coeff);
            ct.refs.reserve(t.refs.size());
            for (const VarRef& v : t.refs) {
                ct.refs.push_back({conjugate_sector(v.sector), v.mode, v.mu});
            }
            r.terms_.push_back(std::move(ct));
        }
        r.normalize();
        return r;
    }

    /// Formal partial derivative; the product rule is exact, repeated
    /// factors contribute once per occurrence.
    PolyObservable partial(const VarRef& v) const {
        PolyObservable r;
        for (const Term& t : terms_) {
            for (std::size_t i = 0; i < t.refs.size(); ++i) {
                if (!(t.refs[i] == v)) continue;
                Term dt;
                dt.coeff = t.coeff;
                dt.refs.reserve(t.refs.size() - 1);
                for (std::size_t k = 0; k < t.refs.size(); ++k) {
                    if (k != i) dt.refs.push_back(t.refs[k]);
                }
                r.terms_.push_back(std::move(dt));
            }
        }
        r.normalize();
        return r;
    }

    Complex evaluate(const SystemState& st) const {
        KahanComplexSum acc;
        for (const Term& t : terms_) {
            Complex prod = t.coeff;
            for (const VarRef& v : t.refs) prod *= variable_value(st, v);
            acc.add(prod);
        }
        return acc.value();
    }

    /// Sectors referenced anywhere in the polynomial.
    std::vector<Sector> sectors() const {
        std::vector<Sector> out;
        for (const Term& t : terms_) {
            for (const VarRef& v : t.refs) {
                if (std::find(out.begin(), out.end(), v.sector) == out.end()) {
                    out.push_back(v.sector);
                }
            }
        }
        return out;
    }

    double coefficient_scale() const {
        double s = 0.0;
        for (const Term& t : terms_) s = std::max(s, std::abs(t.coeff));
        return s;
    }

private:
    void normalize() {
        for (Term& t : terms_) std::sort(t.refs.begin(), t.refs.end());
        std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
            return std::lexicographical_compare(a.refs.begin(), a.refs.end(),
                                                b.refs.begin(), b.refs.end());
        });
        std::vector<Term> merged;
        for (Term& t : terms_) {
            if (!merged.empty() && merged.back().refs == t.refs) {
                merged.back().coeff += t.coeff;
            } else {
                merged.push_back(std::move(t));
            }
        }
        terms_.clear();
        for (Term& t : merged) {
            if (t.coeff != 0.0) terms_.push_back(std::move(t));
        }
    }

    std::vector<Term> terms_;
};

/// Opaque functional of the state with finite-difference gradients.
struct GenericObservable {
    std::function<Complex(const SystemState&)> evaluator;
    double fd_step = 1e-5;

    Complex evaluate(const SystemState& st) const {
        const Complex v = evaluator(st);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw std::domain_error("GenericObservable: non-finite evaluation");
        }
        return v;
    }
};

/// Shifts the underlying state coordinate addressed by a VarRef. For
/// polarization-basis refs the Cartesian amplitudes move along the
/// corresponding (lowered) tetrad direction.
inline void perturb_variable(SystemState& st, const VarRef& v, Complex delta) {
    if (v.sector == Sector::particle_x) {
        // stored contravariant; shifting the covariant component mu by h
        // shifts the contravariant one by eta_mumu h
        st.particle.x[v.mu] += kMetricDiag[v.mu] * delta.real();
        return;
    }
    if (v.sector == Sector::particle_p) {
        st.particle.p[v.mu] += delta.real();
        return;
    }
    const std::size_t j = static_cast<std::size_t>(v.mode);
    const Mode& m = st.field.lattice().mode(j);
    CFourVector a = st.field.amp(j);
    switch (v.sector) {
        case Sector::amp:
        case Sector::amp_conj:
            a[v.mu] += delta;
            break;
        case Sector::pol:
        case Sector::pol_conj:
            if (v.mu == 0) {
                a[0] += delta;
            } else {
                const FourVector& e = m.tetrad[v.mu];
                for (std::size_t s = 1; s < 4; ++s) a[s] -= delta * e[s];
            }
            break;
        case Sector::pol3d:
        case Sector::pol3d_conj: {
            const double scale = std::sqrt(2.0 * m.k0);
            const FourVector& e = m.tetrad[v.mu];
            for (std::size_t s = 1; s < 4; ++s) a[s] -= scale * delta * e[s];
            break;
        }
        default:
            throw std::logic_error("perturb_variable: unhandled sector");
    }
    st.field.set_amp(j, a);
}

/// Wirtinger pair (dF/dz, dF/dz*) for the complex coordinate addressed by
/// v (non-conjugate sector), from central differences in the real and
/// imaginary directions.
inline std::pair<Complex, Complex> fd_wirtinger(const GenericObservable& o,
                                                const SystemState& st,
                                                const VarRef& v) {
    if (!(o.fd_step > 0.0)) {
        throw std::invalid_argument("fd_wirtinger: fd_step must be positive");
    }
    const double h = o.fd_step;
    auto shifted = [&](Complex delta) {
        SystemState s = st;
        perturb_variable(s, v, delta);
        return o.evaluate(s);
    };
    const Complex d_re = (shifted({h, 0}) - shifted({-h, 0})) / (2.0 * h);
    const Complex d_im = (shifted({0, h}) - shifted({0, -h})) / (2.0 * h);
    const Complex i(0.0, 1.0);
    return {0.5 * (d_re - i * d_im), 0.5 * (d_re + i * d_im)};
}

/// Central difference for the real particle coordinates.
inline Complex fd_gradient_real(const GenericObservable& o, const SystemState& st,
                                const VarRef& v) {
    const double h = o.fd_step;
    auto shifted = [&](double delta) {
        SystemState s = st;
        perturb_variable(s, v, {delta, 0.0});
        return o.evaluate(s);
    };
    return (shifted(h) - shifted(-h)) / (2.0 * h);
}

/// fd_gradient for any single variable; conjugate-sector refs return the
/// dF/dz* Wirtinger component.
inline Complex fd_gradient(const GenericObservable& o, const SystemState& st,
                           const VarRef& v) {
    if (v.sector == Sector::particle_x || v.sector == Sector::particle_p) {
        return fd_gradient_real(o, st, v);
    }
    const VarRef base{is_conjugate_sector(v.sector) ? conjugate_sector(v.sector)
                                                    : v.sector,
                      v.mode, v.mu};
    auto [dz, dzbar] = fd_wirtinger(o, st, base);
    return is_conjugate_sector(v.sector) ? dzbar : dz;
}

} // namespace covpb
