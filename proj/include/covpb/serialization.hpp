#pragma once

#include <string>

#include <json.hpp>

#include "covpb/bracket.hpp"
#include "covpb/field_state.hpp"

namespace covpb {

using Json = nlohmann::json;

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw std::invalid_argument("expected [re, im] pair");
    }
    return Complex(j[0].get<double>(), j[1].get<double>());
}

/// Field states serialize as lattice parameters plus per-mode covariant
/// components as [re, im] pairs in lattice order.
inline Json field_state_to_json(const FieldState& f) {
    Json j;
    j["lattice"] = {{"delta_k", f.lattice().delta_k()}, {"n_max", f.lattice().n_max()}};
    j["c"] = f.c();
    j["a"] = f.a();
    Json amps = Json::array();
    for (std::size_t m = 0; m < f.size(); ++m) {
        Json row = Json::array();
        for (std::size_t mu = 0; mu < 4; ++mu) {
            row.push_back(complex_to_json(f.amp(m)[mu]));
        }
        amps.push_back(std::move(row));
    }
    j["amplitudes"] = std::move(amps);
    return j;
}

inline FieldState field_state_from_json(const Json& j) {
    const auto& lat = j.at("lattice");
    LatticePtr lattice =
        build_lattice(lat.at("delta_k").get<double>(), lat.at("n_max").get<int>());
    FieldState f(lattice, j.value("c", 1.0), j.value("a", 4.0));
    const auto& amps = j.at("amplitudes");
    if (amps.size() != f.size()) {
        throw std::invalid_argument("field_state_from_json: amplitude count mismatch");
    }
    for (std::size_t m = 0; m < f.size(); ++m) {
        CFourVector a({0, 0}, {0, 0}, {0, 0}, {0, 0}, Variance::covariant);
        for (std::size_t mu = 0; mu < 4; ++mu) {
            a[mu] = complex_from_json(amps[m][mu]);
        }
        f.set_amp(m, a);
    }
    return f;
}

inline Json bracket_report_to_json(const std::string& kind, const BracketReport& r) {
    return Json{{"kind", kind},
                {"value", complex_to_json(r.value)},
                {"field_part", complex_to_json(r.field_part)},
                {"particle_part", complex_to_json(r.particle_part)},
                {"consistency_residual", r.consistency_residual}};
}

} // namespace covpb
