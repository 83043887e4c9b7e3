#pragma once

#include <cmath>
#include <stdexcept>

#include "covpb/field_state.hpp"
#include "covpb/minkowski.hpp"

namespace covpb {

/// Point particle with the canonical momentum convention
/// p_mu = -m0 du_mu/dtau - (e/c) A_mu(u). Position is stored with
/// contravariant components, momentum with covariant ones.
struct ParticleState {
    FourVector x{0, 0, 0, 0, Variance::contravariant};
    FourVector p{0, 0, 0, 0, Variance::covariant};
    double m0 = 1.0;
    double e = 0.0;

    /// Kinetic momentum pi_kin = -(p + (e/c) A), contravariant. For the
    /// free particle A drops out.
    FourVector kinetic_momentum(const FourVector& A_co, double c) const {
        FourVector pk(0, 0, 0, 0, Variance::contravariant);
        const FourVector p_up = p.raised();
        const FourVector A_up = A_co.raised();
        for (std::size_t mu = 0; mu < 4; ++mu) {
            pk[mu] = -(p_up[mu] + (e / c) * A_up[mu]);
        }
        return pk;
    }

    /// |pi_kin.pi_kin - (m0 c)^2| / (m0 c)^2, the mass-shell monitor.
    double mass_shell_residual(const FourVector& A_co, double c) const {
        const FourVector pk = kinetic_momentum(A_co, c);
        const double target = m0 * c * m0 * c;
        return std::abs(minkowski_dot(pk, pk) - target) / target;
    }
};

/// Full phase-space point: particle + field amplitudes + reference time.
struct SystemState {
    ParticleState particle;
    FieldState field;
    double time = 0.0;

    SystemState(ParticleState pt, FieldState f, double t = 0.0)
        : particle(std::move(pt)), field(std::move(f)), time(t) {}

    explicit SystemState(FieldState f) : field(std::move(f)) {}

    bool finite() const {
        for (std::size_t mu = 0; mu < 4; ++mu) {
            if (!std::isfinite(particle.x[mu]) || !std::isfinite(particle.p[mu])) {
                return false;
            }
        }
        return std::isfinite(time) && field.finite();
    }
};

} // namespace covpb
