#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

namespace covpb {

/// Metric signature (+,-,-,-), stored as the diagonal of eta.
inline constexpr std::array<double, 4> kMetricDiag = {1.0, -1.0, -1.0, -1.0};

enum class Variance { contravariant, covariant };

/// A four-component vector over T (double for geometry, complex<double>
/// for mode amplitudes). Components are stored as given; the variance tag
/// records whether they are contravariant or covariant. Raising/lowering
/// flips the sign of the spatial components, which is exact in floating
/// point, so raise(lower(v)) == v bitwise.
template <class T>
class Vec4 {
public:
    constexpr Vec4() : c_{T{}, T{}, T{}, T{}}, var_(Variance::contravariant) {}

    constexpr Vec4(T t, T x, T y, T z, Variance var = Variance::contravariant)
        : c_{t, x, y, z}, var_(var) {}

    T& operator[](std::size_t i) { return c_[i]; }
    const T& operator[](std::size_t i) const { return c_[i]; }

    T t() const { return c_[0]; }
    T x() const { return c_[1]; }
    T y() const { return c_[2]; }
    T z() const { return c_[3]; }

    Variance variance() const { return var_; }

    Vec4 lowered() const {
        if (var_ == Variance::covariant) return *this;
        return Vec4(c_[0], -c_[1], -c_[2], -c_[3], Variance::covariant);
    }

    Vec4 raised() const {
        if (var_ == Variance::contravariant) return *this;
        return Vec4(c_[0], -c_[1], -c_[2], -c_[3], Variance::contravariant);
    }

    /// Same components, opposite tag. Useful when a quantity is naturally
    /// defined through its covariant components (e.g. amplitudes).
    Vec4 with_variance(Variance var) const {
        return Vec4(c_[0], c_[1], c_[2], c_[3], var);
    }

    Vec4 operator-() const { return Vec4(-c_[0], -c_[1], -c_[2], -c_[3], var_); }

    Vec4& operator+=(const Vec4& o) {
        for (std::size_t i = 0; i < 4; ++i) c_[i] += o.c_[i];
        return *this;
    }

    Vec4& operator-=(const Vec4& o) {
        for (std::size_t i = 0; i < 4; ++i) c_[i] -= o.c_[i];
        return *this;
    }

    friend Vec4 operator+(Vec4 a, const Vec4& b) { return a += b; }
    friend Vec4 operator-(Vec4 a, const Vec4& b) { return a -= b; }

    friend Vec4 operator*(T s, Vec4 v) {
        for (std::size_t i = 0; i < 4; ++i) v.c_[i] = s * v.c_[i];
        return v;
    }

    friend Vec4 operator*(Vec4 v, T s) { return s * v; }

private:
    std::array<T, 4> c_;
    Variance var_;
};

using FourVector = Vec4<double>;
using CFourVector = Vec4<std::complex<double>>;

inline CFourVector to_complex(const FourVector& v) {
    return CFourVector({v[0], 0.0}, {v[1], 0.0}, {v[2], 0.0}, {v[3], 0.0},
                       v.variance());
}

inline CFourVector conj(const CFourVector& v) {
    return CFourVector(std::conj(v[0]), std::conj(v[1]), std::conj(v[2]),
                       std::conj(v[3]), v.variance());
}

/// eta-contraction u^0 v^0 - u.v, treating both argument component arrays
/// as contravariant. Since eta is its own inverse this gives the invariant
/// for a same-variance pair regardless of the tag.
template <class T>
T minkowski_dot(const Vec4<T>& u, const Vec4<T>& v) {
    return u[0] * v[0] - u[1] * v[1] - u[2] * v[2] - u[3] * v[3];
}

/// Plain index contraction u_mu v^mu of a covariant/contravariant pair.
template <class T>
T contract(const Vec4<T>& u_co, const Vec4<T>& v_contra) {
    return u_co[0] * v_contra[0] + u_co[1] * v_contra[1] +
           u_co[2] * v_contra[2] + u_co[3] * v_contra[3];
}

enum class Axis { x = 1, y = 2, z = 3 };

/// Proper orthochronous Lorentz transformation. Instances are only
/// produced by the boost/rotation factories and composition, which keeps
/// the eta-preservation invariant structural rather than something to
/// re-validate per use.
class LorentzMap {
public:
    static LorentzMap identity() { return LorentzMap(); }

    static LorentzMap boost(Axis axis, double rapidity) {
        if (!std::isfinite(rapidity)) {
            throw std::invalid_argument("boost: rapidity must be finite");
        }
        LorentzMap L;
        const std::size_t i = static_cast<std::size_t>(axis);
        const double ch = std::cosh(rapidity);
        const double sh = std::sinh(rapidity);
        L.m_[0][0] = ch;
        L.m_[0][i] = sh;
        L.m_[i][0] = sh;
        L.m_[i][i] = ch;
        return L;
    }

    static LorentzMap rotation(Axis axis, double angle) {
        if (!std::isfinite(angle)) {
            throw std::invalid_argument("rotation: angle must be finite");
        }
        LorentzMap L;
        const std::size_t a = static_cast<std::size_t>(axis);
        const std::size_t i = 1 + a % 3;      // cyclic pair orthogonal to axis
        const std::size_t j = 1 + (a + 1) % 3;
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        L.m_[i][i] = c;
        L.m_[i][j] = -s;
        L.m_[j][i] = s;
        L.m_[j][j] = c;
        return L;
    }

    friend LorentzMap compose(const LorentzMap& a, const LorentzMap& b) {
        LorentzMap r;
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < 4; ++k) s += a.m_[i][k] * b.m_[k][j];
                r.m_[i][j] = s;
            }
        }
        return r;
    }

    LorentzMap inverse() const {
        // eta Lambda^T eta
        LorentzMap r;
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                r.m_[i][j] = kMetricDiag[i] * m_[j][i] * kMetricDiag[j];
            }
        }
        return r;
    }

    double operator()(std::size_t i, std::size_t j) const { return m_[i][j]; }

    /// Covariant components transform with the inverse transpose, which
    /// for a Lorentz map is eta Lambda eta.
    template <class T>
    Vec4<T> apply(const Vec4<T>& v) const {
        Vec4<T> r(T{}, T{}, T{}, T{}, v.variance());
        if (v.variance() == Variance::contravariant) {
            for (std::size_t i = 0; i < 4; ++i) {
                T s{};
                for (std::size_t j = 0; j < 4; ++j) s += m_[i][j] * v[j];
                r[i] = s;
            }
        } else {
            for (std::size_t i = 0; i < 4; ++i) {
                T s{};
                for (std::size_t j = 0; j < 4; ++j) {
                    s += kMetricDiag[i] * m_[i][j] * kMetricDiag[j] * v[j];
                }
                r[i] = s;
            }
        }
        return r;
    }

    /// max |Lambda^T eta Lambda - eta|; < 1e-12 for every constructible map.
    double eta_residual() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < 4; ++k) {
                    s += m_[k][i] * kMetricDiag[k] * m_[k][j];
                }
                const double target = (i == j) ? kMetricDiag[i] : 0.0;
                worst = std::max(worst, std::abs(s - target));
            }
        }
        return worst;
    }

private:
    LorentzMap() {
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) m_[i][j] = (i == j) ? 1.0 : 0.0;
        }
    }

    double m_[4][4];
};

} // namespace covpb
