#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

#include "covpb/minkowski.hpp"
#include "covpb/summation.hpp"

namespace covpb {

using Triple = std::array<double, 3>;

inline double norm3(const Triple& v) {
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

inline double dot3(const Triple& a, const Triple& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Triple cross3(const Triple& a, const Triple& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}

/// Per-mode polarization basis: eps0 = (1,0,0,0), eps1/eps2 transverse,
/// eps3 longitudinal (unit vector along k). All contravariant.
struct Tetrad {
    std::array<FourVector, 4> eps;

    const FourVector& operator[](std::size_t i) const { return eps[i]; }
};

/// Builds the tetrad for a spatial wavevector. e3 = k-hat; e1 comes from
/// Gram-Schmidt of the coordinate axis with the smallest |k-hat| component
/// (ties broken in x->y->z order); e2 = e3 x e1. Depends on the direction
/// of k only.
inline Tetrad tetrad_for(const Triple& k_spatial) {
    const double kn = norm3(k_spatial);
    if (!(kn > 0.0)) {
        throw std::invalid_argument("tetrad_for: zero wavevector");
    }
    const Triple e3 = {k_spatial[0] / kn, k_spatial[1] / kn, k_spatial[2] / kn};

    std::size_t seed_axis = 0;
    double best = std::abs(e3[0]);
    for (std::size_t a = 1; a < 3; ++a) {
        if (std::abs(e3[a]) < best) {
            best = std::abs(e3[a]);
            seed_axis = a;
        }
    }
    Triple e1 = {0.0, 0.0, 0.0};
    e1[seed_axis] = 1.0;
    const double proj = dot3(e1, e3);
    for (std::size_t i = 0; i < 3; ++i) e1[i] -= proj * e3[i];
    const double n1 = norm3(e1);
    for (std::size_t i = 0; i < 3; ++i) e1[i] /= n1;
    const Triple e2 = cross3(e3, e1);

    Tetrad t;
    t.eps[0] = FourVector(1.0, 0.0, 0.0, 0.0);
    t.eps[1] = FourVector(0.0, e1[0], e1[1], e1[2]);
    t.eps[2] = FourVector(0.0, e2[0], e2[1], e2[2]);
    t.eps[3] = FourVector(0.0, e3[0], e3[1], e3[2]);
    return t;
}

/// One on-shell wavevector with its invariant-measure weight
/// w = dk^3 / (2 k0) and polarization tetrad.
struct Mode {
    std::size_t index = 0;
    Triple k_spatial = {0.0, 0.0, 0.0};
    double k0 = 0.0;
    double weight = 0.0;
    Tetrad tetrad;

    /// Contravariant on-shell wavevector (k0, k).
    FourVector k() const {
        return FourVector(k0, k_spatial[0], k_spatial[1], k_spatial[2]);
    }

    /// Covariant components (k0, -k).
    FourVector k_lower() const { return k().lowered(); }
};

/// Cubic lattice of on-shell modes k = delta_k * (n1,n2,n3) for integer
/// triples in [-n_max, n_max]^3 with the origin excluded. Excluding k = 0
/// is the infrared regulator, the finite n_max the ultraviolet one. The
/// point set is symmetric under k -> -k, which the equal-time bracket
/// structure relies on. Immutable after construction.
class ModeLattice {
public:
    ModeLattice(double delta_k, int n_max) : delta_k_(delta_k), n_max_(n_max) {
        if (!(delta_k > 0.0) || !std::isfinite(delta_k)) {
            throw std::invalid_argument("ModeLattice: delta_k must be positive");
        }
        if (n_max < 1) {
            throw std::invalid_argument("ModeLattice: n_max must be >= 1");
        }
        const double dk3 = delta_k * delta_k * delta_k;
        modes_.reserve(static_cast<std::size_t>(2 * n_max + 1) *
                           static_cast<std::size_t>(2 * n_max + 1) *
                           static_cast<std::size_t>(2 * n_max + 1) -
                       1);
        for (int n1 = -n_max; n1 <= n_max; ++n1) {
            for (int n2 = -n_max; n2 <= n_max; ++n2) {
                for (int n3 = -n_max; n3 <= n_max; ++n3) {
                    if (n1 == 0 && n2 == 0 && n3 == 0) continue;
                    Mode m;
                    m.index = modes_.size();
                    m.k_spatial = {delta_k * n1, delta_k * n2, delta_k * n3};
                    m.k0 = norm3(m.k_spatial);
                    m.weight = dk3 / (2.0 * m.k0);
                    m.tetrad = tetrad_for(m.k_spatial);
                    modes_.push_back(m);
                }
            }
        }
    }

    double delta_k() const { return delta_k_; }
    int n_max() const { return n_max_; }
    std::size_t size() const { return modes_.size(); }
    const Mode& mode(std::size_t j) const { return modes_.at(j); }
    const std::vector<Mode>& modes() const { return modes_; }

    /// Index of the mode at -k_spatial(j). The cube is closed under this.
    std::size_t opposite(std::size_t j) const {
        const Mode& m = mode(j);
        const int n1 = static_cast<int>(std::lround(m.k_spatial[0] / delta_k_));
        const int n2 = static_cast<int>(std::lround(m.k_spatial[1] / delta_k_));
        const int n3 = static_cast<int>(std::lround(m.k_spatial[2] / delta_k_));
        return index_of(-n1, -n2, -n3);
    }

    std::size_t index_of(int n1, int n2, int n3) const {
        const int w = 2 * n_max_ + 1;
        if (std::abs(n1) > n_max_ || std::abs(n2) > n_max_ || std::abs(n3) > n_max_ ||
            (n1 == 0 && n2 == 0 && n3 == 0)) {
            throw std::out_of_range("ModeLattice::index_of: no such mode");
        }
        std::size_t linear = static_cast<std::size_t>(((n1 + n_max_) * w + (n2 + n_max_)) * w +
                                                      (n3 + n_max_));
        // modes before the origin keep their linear index; after it, one less
        const std::size_t origin =
            static_cast<std::size_t>((n_max_ * w + n_max_) * w + n_max_);
        return linear < origin ? linear : linear - 1;
    }

private:
    double delta_k_;
    int n_max_;
    std::vector<Mode> modes_;
};

using LatticePtr = std::shared_ptr<const ModeLattice>;

inline LatticePtr build_lattice(double delta_k, int n_max) {
    return std::make_shared<const ModeLattice>(delta_k, n_max);
}

/// Discrete image of the invariant shell integral: sum_j w_j f(mode_j),
/// in fixed lattice order with compensated accumulation. Non-finite
/// integrand values are an error, never silently absorbed.
template <class F>
double measure_sum(const ModeLattice& lat, F&& f) {
    return checked_sum(lat.size(), [&](std::size_t j) {
        const Mode& m = lat.mode(j);
        return m.weight * f(m);
    });
}

/// Boost a single mode: k' = Lambda k re-projected onto the shell
/// (k0' recomputed from |k'|), weight kept (d^3k / 2k0 is the invariant
/// measure), tetrad rebuilt from the new direction. Boosted point sets are
/// irregular and only good for invariant-integrand checks.
inline Mode boost_mode(const LorentzMap& L, const Mode& m) {
    const FourVector kp = L.apply(m.k());
    Mode out;
    out.index = m.index;
    out.k_spatial = {kp[1], kp[2], kp[3]};
    out.k0 = norm3(out.k_spatial);
    out.weight = m.weight;
    out.tetrad = tetrad_for(out.k_spatial);
    return out;
}

} // namespace covpb
