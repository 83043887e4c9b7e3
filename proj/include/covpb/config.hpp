#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "covpb/dynamics.hpp"
#include "covpb/verification.hpp"

namespace covpb {

/// One JSON document drives every batch run. Unknown keys are rejected so
/// a typo cannot silently fall back to a default.
struct RunConfig {
    double delta_k = 1.0;
    int n_max = 1;
    double a = 4.0;
    double c = 1.0;
    std::vector<std::string> suites = all_suite_names();
    // dynamics block
    double m0 = 1.0;
    double e = 0.0;
    double dt = 0.01;
    int steps = 100;
    Coupling coupling = Coupling::external_only;
    std::optional<WaveSpec> wave;
    std::array<double, 4> x0 = {0, 0, 0, 0};
    std::array<double, 4> p0 = {-1, 0, 0, 0};
    double amplitude_scale = 0.0; // seeded random initial amplitudes
    // output
    std::string output_dir = ".";
    std::uint64_t seed = 20250809;

    VerifyParams verify_params() const {
        VerifyParams p;
        p.delta_k = delta_k;
        p.n_max = n_max;
        p.a = a;
        p.c = c;
        p.seed = seed;
        return p;
    }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace config_detail {

using Json = nlohmann::json;

inline void reject_unknown(const Json& j, std::initializer_list<const char*> keys,
                           const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

inline std::array<double, 4> four_array(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4) {
        throw ConfigError(where + " must be an array of four numbers");
    }
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) out[i] = j[i].get<double>();
    return out;
}

} // namespace config_detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using config_detail::four_array;
    using config_detail::reject_unknown;
    RunConfig cfg;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j, {"lattice", "constants", "suites", "dynamics", "output", "seed"},
                   "config");

    if (j.contains("lattice")) {
        const auto& lat = j.at("lattice");
        reject_unknown(lat, {"delta_k", "n_max"}, "lattice");
        cfg.delta_k = lat.value("delta_k", cfg.delta_k);
        cfg.n_max = lat.value("n_max", cfg.n_max);
        if (!(cfg.delta_k > 0.0)) throw ConfigError("lattice.delta_k must be > 0");
        if (cfg.n_max < 1) throw ConfigError("lattice.n_max must be >= 1");
        if (cfg.n_max > 6) throw ConfigError("lattice.n_max > 6 exceeds desk scale");
    }
    if (j.contains("constants")) {
        const auto& cst = j.at("constants");
        reject_unknown(cst, {"a", "c"}, "constants");
        cfg.a = cst.value("a", cfg.a);
        cfg.c = cst.value("c", cfg.c);
        if (cfg.a == 0.0) throw ConfigError("constants.a must be nonzero");
        if (!(cfg.c > 0.0)) throw ConfigError("constants.c must be > 0");
    }
    if (j.contains("suites")) {
        cfg.suites.clear();
        for (const auto& s : j.at("suites")) {
            const std::string name = s.get<std::string>();
            bool ok = false;
            for (const std::string& known : all_suite_names()) ok |= (known == name);
            if (!ok) throw ConfigError("unknown suite '" + name + "'");
            cfg.suites.push_back(name);
        }
        if (cfg.suites.empty()) throw ConfigError("suites must not be empty");
    }
    if (j.contains("dynamics")) {
        const auto& dyn = j.at("dynamics");
        reject_unknown(dyn,
                       {"m0", "e", "dt", "steps", "coupling", "wave", "x0", "p0",
                        "amplitude_scale"},
                       "dynamics");
        cfg.m0 = dyn.value("m0", cfg.m0);
        cfg.e = dyn.value("e", cfg.e);
        cfg.dt = dyn.value("dt", cfg.dt);
        cfg.steps = dyn.value("steps", cfg.steps);
        if (!(cfg.m0 > 0.0)) throw ConfigError("dynamics.m0 must be > 0");
        if (cfg.dt == 0.0 || !std::isfinite(cfg.dt)) {
            throw ConfigError("dynamics.dt must be finite and nonzero");
        }
        if (cfg.steps < 0) throw ConfigError("dynamics.steps must be >= 0");
        if (dyn.contains("coupling")) {
            const std::string cpl = dyn.at("coupling").get<std::string>();
            if (cpl == "external_only") {
                cfg.coupling = Coupling::external_only;
            } else if (cpl == "coupled") {
                cfg.coupling = Coupling::coupled;
            } else {
                throw ConfigError("dynamics.coupling must be external_only|coupled");
            }
        }
        if (dyn.contains("wave")) {
            const auto& w = dyn.at("wave");
            reject_unknown(w, {"amplitude", "wavevector", "phase"}, "wave");
            WaveSpec spec;
            const auto amp = four_array(w.at("amplitude"), "wave.amplitude");
            const auto k = four_array(w.at("wavevector"), "wave.wavevector");
            spec.amplitude = FourVector(amp[0], amp[1], amp[2], amp[3],
                                        Variance::covariant);
            spec.wavevector = FourVector(k[0], k[1], k[2], k[3]);
            spec.phase = w.value("phase", 0.0);
            const double kk = minkowski_dot(spec.wavevector, spec.wavevector);
            const double k0 = spec.wavevector[0];
            if (std::abs(kk) > 1e-10 * (1.0 + k0 * k0)) {
                throw ConfigError("wave.wavevector must be null");
            }
            cfg.wave = spec;
        }
        if (dyn.contains("x0")) cfg.x0 = four_array(dyn.at("x0"), "dynamics.x0");
        if (dyn.contains("p0")) cfg.p0 = four_array(dyn.at("p0"), "dynamics.p0");
        cfg.amplitude_scale = dyn.value("amplitude_scale", cfg.amplitude_scale);
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        reject_unknown(o, {"dir"}, "output");
        cfg.output_dir = o.value("dir", cfg.output_dir);
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

/// Applies one "path.to.key=value" override onto the raw JSON document.
/// The value is parsed as JSON when possible, as a string otherwise;
/// "suites" accepts a comma-separated list.
inline void apply_override(nlohmann::json& j, const std::string& kv) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override must look like key=value: " + kv);
    }
    const std::string path = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);

    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        if (dot == std::string::npos) {
            parts.push_back(path.substr(start));
            break;
        }
        parts.push_back(path.substr(start, dot - start));
        start = dot + 1;
    }
    nlohmann::json value;
    if (parts.back() == "suites" || path == "suites") {
        value = nlohmann::json::array();
        std::size_t s = 0;
        while (true) {
            const std::size_t comma = raw.find(',', s);
            value.push_back(raw.substr(s, comma == std::string::npos ? comma
                                                                     : comma - s));
            if (comma == std::string::npos) break;
            s = comma + 1;
        }
    } else {
        value = nlohmann::json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
    }

    nlohmann::json* node = &j;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        node = &(*node)[parts[i]];
    }
    (*node)[parts.back()] = value;
}

/// Builds a SystemState from the config's dynamics block. Random initial
/// amplitudes come from the config seed, so reruns are bit-identical.
inline SystemState initial_state(const RunConfig& cfg) {
    LatticePtr lat = build_lattice(cfg.delta_k, cfg.n_max);
    FieldState f(lat, cfg.c, cfg.a);
    if (cfg.amplitude_scale != 0.0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> u(-cfg.amplitude_scale,
                                                 cfg.amplitude_scale);
        for (std::size_t j = 0; j < f.size(); ++j) {
            f.set_amp(j, CFourVector({u(rng), u(rng)}, {u(rng), u(rng)},
                                     {u(rng), u(rng)}, {u(rng), u(rng)},
                                     Variance::covariant));
        }
    }
    ParticleState pt;
    pt.x = FourVector(cfg.x0[0], cfg.x0[1], cfg.x0[2], cfg.x0[3]);
    pt.p = FourVector(cfg.p0[0], cfg.p0[1], cfg.p0[2], cfg.p0[3], Variance::covariant);
    pt.m0 = cfg.m0;
    pt.e = cfg.e;
    return SystemState(pt, std::move(f));
}

inline EvolutionConfig evolution_config(const RunConfig& cfg) {
    EvolutionConfig ec(cfg.dt, cfg.steps);
    ec.wave = cfg.wave;
    ec.coupling = cfg.coupling;
    return ec;
}

} // namespace covpb
