#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "covpb/mass_shell.hpp"
#include "covpb/minkowski.hpp"
#include "covpb/summation.hpp"

namespace covpb {

inline constexpr double kPi = std::numbers::pi;
/// (2 pi)^3, the normalization of the mode expansion.
inline constexpr double kEightPiCubed = 8.0 * kPi * kPi * kPi;

using Complex = std::complex<double>;

/// Simple rank-2 component holder, first index mu (derivative slot),
/// second nu (field slot); both covariant.
struct Tensor2 {
    double m[4][4] = {};

    double& operator()(std::size_t i, std::size_t j) { return m[i][j]; }
    double operator()(std::size_t i, std::size_t j) const { return m[i][j]; }
};

/// Per-mode complex amplitude four-vectors of the potential, stored as
/// covariant components. The amplitudes are the time-independent data of
/// a free field; all x-dependence lives in the reconstruction phases.
class FieldState {
public:
    FieldState(LatticePtr lattice, double c = 1.0, double a = 4.0)
        : lattice_(std::move(lattice)), c_(c), a_(a) {
        if (!lattice_) throw std::invalid_argument("FieldState: null lattice");
        if (!(c_ > 0.0)) throw std::invalid_argument("FieldState: c must be > 0");
        if (a_ == 0.0) throw std::invalid_argument("FieldState: a must be nonzero");
        amp_.assign(lattice_->size(),
                    CFourVector({0, 0}, {0, 0}, {0, 0}, {0, 0}, Variance::covariant));
    }

    const ModeLattice& lattice() const { return *lattice_; }
    LatticePtr lattice_ptr() const { return lattice_; }
    double c() const { return c_; }
    double a() const { return a_; }

    std::size_t size() const { return amp_.size(); }

    const CFourVector& amp(std::size_t j) const { return amp_.at(j); }

    void set_amp(std::size_t j, const CFourVector& a) {
        amp_.at(j) = a.with_variance(Variance::covariant);
    }

    Complex amp_component(std::size_t j, std::size_t mu) const {
        return amp_.at(j)[mu];
    }

    void set_amp_component(std::size_t j, std::size_t mu, Complex v) {
        amp_.at(j)[mu] = v;
    }

    bool finite() const {
        for (const auto& a : amp_) {
            for (std::size_t mu = 0; mu < 4; ++mu) {
                if (!std::isfinite(a[mu].real()) || !std::isfinite(a[mu].imag())) {
                    return false;
                }
            }
        }
        return true;
    }

private:
    LatticePtr lattice_;
    double c_;
    double a_;
    std::vector<CFourVector> amp_;
};

/// Real mode variables q_nu and s_nu (pi_{mu nu} = k_mu s_nu) with the
/// plane-wave phases attached at the declared space-time point. The
/// conjugate momentum is never stored densely; its rank-one factor s is.
struct CanonicalState {
    LatticePtr lattice;
    double c = 1.0;
    double a = 4.0;
    FourVector phase_x;
    std::vector<FourVector> q; // covariant components
    std::vector<FourVector> s; // covariant components

    /// pi_{mu nu}(j) = k_mu(j) s_nu(j), covariant components.
    double pi(std::size_t j, std::size_t mu, std::size_t nu) const {
        const FourVector klo = lattice->mode(j).k_lower();
        return klo[mu] * s.at(j)[nu];
    }
};

inline double canonical_norm(double c, double k0) {
    return std::sqrt(8.0 * kPi * c * k0);
}

/// Phase factor e^{-i k.x} for mode j.
inline Complex mode_phase(const Mode& m, const FourVector& x) {
    return std::polar(1.0, -minkowski_dot(m.k(), x.raised()));
}

/// Split the phased amplitude a_mu = A_mu e^{-ik.x} into the real pair
///   q_nu = i (a*_nu - a_nu) / sqrt(8 pi c k0),
///   s_nu =   (a*_nu + a_nu) / sqrt(8 pi c k0).
inline CanonicalState to_canonical(const FieldState& f, const FourVector& x) {
    CanonicalState cs;
    cs.lattice = f.lattice_ptr();
    cs.c = f.c();
    cs.a = f.a();
    cs.phase_x = x;
    cs.q.resize(f.size());
    cs.s.resize(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) {
        const Mode& m = f.lattice().mode(j);
        const Complex ph = mode_phase(m, x);
        const double norm = canonical_norm(f.c(), m.k0);
        FourVector q(0, 0, 0, 0, Variance::covariant);
        FourVector s(0, 0, 0, 0, Variance::covariant);
        for (std::size_t nu = 0; nu < 4; ++nu) {
            const Complex a = f.amp(j)[nu] * ph;
            q[nu] = 2.0 * a.imag() / norm;
            s[nu] = 2.0 * a.real() / norm;
        }
        cs.q[j] = q;
        cs.s[j] = s;
    }
    return cs;
}

/// Inverse of to_canonical: a = sqrt(8 pi c k0) (s + i q) / 2, then the
/// phase is peeled off at the state's own phase point. Calling it with a
/// different point is an error, not a silent re-interpretation.
inline FieldState from_canonical(const CanonicalState& cs, const FourVector& x) {
    for (std::size_t mu = 0; mu < 4; ++mu) {
        if (cs.phase_x[mu] != x[mu]) {
            throw std::invalid_argument("from_canonical: phase-point mismatch");
        }
    }
    FieldState f(cs.lattice, cs.c, cs.a);
    for (std::size_t j = 0; j < f.size(); ++j) {
        const Mode& m = f.lattice().mode(j);
        const Complex unph = std::conj(mode_phase(m, x)); // e^{+ik.x}
        const double norm = canonical_norm(cs.c, m.k0);
        CFourVector a({0, 0}, {0, 0}, {0, 0}, {0, 0}, Variance::covariant);
        for (std::size_t nu = 0; nu < 4; ++nu) {
            const Complex phased =
                0.5 * norm * Complex(cs.s[j][nu], cs.q[j][nu]);
            a[nu] = phased * unph;
        }
        f.set_amp(j, a);
    }
    return f;
}

/// A_nu(x) = (2 pi)^-3 sum_j w_j [ A_nu(j) e^{-ik.x} + c.c. ]. Real by the
/// conjugate pairing; returned as covariant components.
inline FourVector reconstruct_potential(const FieldState& f, const FourVector& x) {
    FourVector A(0, 0, 0, 0, Variance::covariant);
    for (std::size_t nu = 0; nu < 4; ++nu) {
        A[nu] = checked_sum(f.size(), [&](std::size_t j) {
                    const Mode& m = f.lattice().mode(j);
                    const Complex ph = mode_phase(m, x);
                    return m.weight * 2.0 * (f.amp(j)[nu] * ph).real();
                }) /
                kEightPiCubed;
    }
    return A;
}

/// d_mu A_nu(x), evaluated analytically from the mode sum.
inline Tensor2 potential_gradient(const FieldState& f, const FourVector& x) {
    Tensor2 g;
    for (std::size_t mu = 0; mu < 4; ++mu) {
        for (std::size_t nu = 0; nu < 4; ++nu) {
            g(mu, nu) = checked_sum(f.size(), [&](std::size_t j) {
                            const Mode& m = f.lattice().mode(j);
                            const Complex ph = mode_phase(m, x);
                            const double klo = m.k_lower()[mu];
                            const Complex dmu = Complex(0.0, -klo) * f.amp(j)[nu] * ph;
                            return m.weight * 2.0 * dmu.real();
                        }) /
                        kEightPiCubed;
        }
    }
    return g;
}

/// theta_{mu nu}(x) = -(4 pi c)^-1 d_mu A_nu(x).
inline Tensor2 conjugate_momentum(const FieldState& f, const FourVector& x) {
    Tensor2 th = potential_gradient(f, x);
    const double scale = -1.0 / (4.0 * kPi * f.c());
    for (std::size_t mu = 0; mu < 4; ++mu) {
        for (std::size_t nu = 0; nu < 4; ++nu) th(mu, nu) *= scale;
    }
    return th;
}

/// d_mu A^mu(x) from the analytic mode sum.
inline double potential_divergence(const FieldState& f, const FourVector& x) {
    return checked_sum(f.size(), [&](std::size_t j) {
               const Mode& m = f.lattice().mode(j);
               const Complex ph = mode_phase(m, x);
               // k^mu A_mu: plain contraction of contravariant k with the
               // covariant amplitude
               Complex kA = 0.0;
               const FourVector k = m.k();
               for (std::size_t mu = 0; mu < 4; ++mu) kA += k[mu] * f.amp(j)[mu];
               const Complex div = Complex(0.0, -1.0) * kA * ph;
               return m.weight * 2.0 * div.real();
           }) /
           kEightPiCubed;
}

/// |k^mu A_mu| per mode; zero exactly when the mode satisfies the Lorentz
/// condition (equivalently A0 - A3 = 0 in its polarization basis).
inline std::vector<double> lorentz_condition_residual(const FieldState& f) {
    std::vector<double> r(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) {
        const FourVector k = f.lattice().mode(j).k();
        Complex kA = 0.0;
        for (std::size_t mu = 0; mu < 4; ++mu) kA += k[mu] * f.amp(j)[mu];
        r[j] = std::abs(kA);
    }
    return r;
}

/// Free-field Hamiltonian density of mode j in amplitude form,
/// -(k.k) A*.A / (4 pi c k0). The contraction k.k is kept as an explicit
/// argument: it vanishes on shell, but the density's derivatives do not,
/// so callers doing derivative checks pass the symbolic off-shell value.
inline double ddw_free_density_amp(const FieldState& f, std::size_t j, double kk) {
    const Mode& m = f.lattice().mode(j);
    const Complex aa = minkowski_dot(conj(f.amp(j)), f.amp(j));
    return -kk * aa.real() / (4.0 * kPi * f.c() * m.k0);
}

inline double ddw_free_density_amp(const FieldState& f, std::size_t j) {
    const FourVector k = f.lattice().mode(j).k();
    return ddw_free_density_amp(f, j, minkowski_dot(k, k));
}

/// Same density in canonical form, -(1/2) pi.pi - (k.k/2) q.q, with
/// pi_{mu nu} pi^{mu nu} = (k.k)(s.s) through the rank-one structure.
inline double ddw_free_density(const CanonicalState& cs, std::size_t j, double kk) {
    const double pipi = kk * minkowski_dot(cs.s.at(j), cs.s.at(j));
    return -0.5 * pipi - 0.5 * kk * minkowski_dot(cs.q.at(j), cs.q.at(j));
}

inline double ddw_free_density(const CanonicalState& cs, std::size_t j) {
    const FourVector k = cs.lattice->mode(j).k();
    return ddw_free_density(cs, j, minkowski_dot(k, k));
}

} // namespace covpb
