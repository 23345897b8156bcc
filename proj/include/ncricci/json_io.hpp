#pragma once

// JSON forms of torus elements and experiment configs.
//
//   element:  [{"m": 1, "n": 0, "re": 0.3, "im": 0.0}, ...]
//   matrix:   {"00": element, "01": element, "10": element, "11": element}
//             | "identity" | {"random": {"seed": 7, "band": 2, "amp": 1.0}}

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "algebra.hpp"
#include "errors.hpp"

namespace ncricci {

using nlohmann::json;

inline json element_to_json(const TorusElement& a) {
    json out = json::array();
    for (const auto& [md, c] : a.terms()) out.push_back({{"m", md.m}, {"n", md.n}, {"re", c.real()}, {"im", c.imag()}});
    return out;
}

inline TorusElement element_from_json(const AlgebraContext& ctx, const json& j) {
    if (!j.is_array()) throw InputError("cli", "torus element must be an array of {m, n, re, im}");
    std::vector<TorusElement::Term> t;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("m") || !e.contains("n"))
            throw InputError("cli", "torus element term needs integer fields m and n");
        t.push_back({Mode{e.at("m").get<int>(), e.at("n").get<int>()},
                     cplx(e.value("re", 0.0), e.value("im", 0.0))});
    }
    return TorusElement(ctx, std::move(t));
}

inline json matrix_to_json(const MatrixElement& F) {
    return {{"00", element_to_json(F(0, 0))},
            {"01", element_to_json(F(0, 1))},
            {"10", element_to_json(F(1, 0))},
            {"11", element_to_json(F(1, 1))}};
}

inline MatrixElement matrix_from_json(const AlgebraContext& ctx, const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "identity") return MatrixElement::identity_times(TorusElement::one(ctx));
        throw InputError("cli", "unknown matrix element keyword '" + j.get<std::string>() + "'");
    }
    if (j.is_object() && j.contains("random")) {
        const json& r = j.at("random");
        std::mt19937_64 rng(r.value("seed", std::uint64_t{1}));
        return random_self_adjoint_matrix(ctx, r.value("band", 2), r.value("amp", 1.0), rng);
    }
    if (!j.is_object()) throw InputError("cli", "matrix element must be an object with keys 00, 01, 10, 11");
    auto entry = [&](const char* key) {
        return j.contains(key) ? element_from_json(ctx, j.at(key)) : TorusElement::zero(ctx);
    };
    return MatrixElement(entry("00"), entry("01"), entry("10"), entry("11"));
}

struct ExperimentConfig {
    AlgebraContext context;
    TorusElement dilaton;
    std::vector<json> smearing;  // raw specs, resolved against the context on use
    int grid_N = 16;             // spectral truncation
    int guard = 0;
    int modular_N = 8;           // grid for the modular operator
    std::vector<double> t_grid;  // empty: window rule
    std::map<std::string, double> tolerances;
    std::string golden_dir = "data/golden";
    std::string output_dir = "out";
    json source;  // the parsed document, for hashing

    std::vector<MatrixElement> smearing_elements() const {
        std::vector<MatrixElement> out;
        for (const auto& s : smearing) out.push_back(matrix_from_json(context, s));
        return out;
    }
    double tol(const std::string& name) const {
        auto it = tolerances.find(name);
        if (it == tolerances.end()) throw InputError("cli", "unknown tolerance '" + name + "'");
        return it->second;
    }
};

inline std::map<std::string, double> default_tolerances() {
    return {{"identity", 1e-8},         {"ricci_match", 1e-8},  {"commutative", 1e-8},
            {"flat", 1e-12},            {"spectral_rel", 0.05}, {"spectral_abs", 1e-6},
            {"kernel_threshold", 1e-6},
            {"remainder_slope", -2.8}};
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.source = j;
    try {
        c.context.theta = j.value("theta", 0.0);
        if (j.contains("tau")) {
            const json& t = j.at("tau");
            if (t.is_array() && t.size() == 2)
                c.context.tau = {t[0].get<double>(), t[1].get<double>()};
            else if (t.is_object())
                c.context.tau = {t.value("re", 0.0), t.value("im", 1.0)};
            else
                throw InputError("cli", "tau must be [re, im] or {re, im}");
        }
        c.context.prune_tol = j.value("prune_tol", c.context.prune_tol);
        c.context.band_cap = j.value("band_cap", c.context.band_cap);
        c.context.validate();

        c.dilaton = j.contains("dilaton") ? element_from_json(c.context, j.at("dilaton")) : TorusElement::zero(c.context);
        if (!is_self_adjoint(c.dilaton, 1e-12)) throw InputError("cli", "dilaton must be self-adjoint");

        if (j.contains("smearing_F")) {
            const json& f = j.at("smearing_F");
            if (f.is_array())
                c.smearing.assign(f.begin(), f.end());
            else
                c.smearing.push_back(f);
        } else {
            c.smearing.push_back("identity");
        }
        for (const auto& s : c.smearing) {
            MatrixElement F = matrix_from_json(c.context, s);
            if ((F - adjoint(F)).max_abs() > 1e-12) throw InputError("cli", "smearing_F must be self-adjoint");
        }

        if (j.contains("grid")) {
            const json& g = j.at("grid");
            c.grid_N = g.value("N", c.grid_N);
            c.guard = g.value("guard", c.guard);
            c.modular_N = g.value("modular_N", c.modular_N);
        }
        if (c.grid_N < 1 || c.modular_N < 1 || c.guard < 0) throw InputError("cli", "grid sizes must be positive");

        if (j.contains("t_grid")) c.t_grid = j.at("t_grid").get<std::vector<double>>();
        for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
            if (!(c.t_grid[i] > 0.0)) throw InputError("cli", "t_grid entries must be positive");
            if (i > 0 && !(c.t_grid[i] > c.t_grid[i - 1])) throw InputError("cli", "t_grid must be strictly increasing");
        }

        c.tolerances = default_tolerances();
        if (j.contains("tolerances"))
            for (const auto& [k, v] : j.at("tolerances").items()) c.tolerances[k] = v.get<double>();

        if (j.contains("outputs")) {
            c.output_dir = j.at("outputs").value("dir", c.output_dir);
            c.golden_dir = j.at("outputs").value("golden_dir", c.golden_dir);
        }
    } catch (const json::exception& e) {
        throw InputError("cli", std::string("malformed config: ") + e.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cli", "cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("cli", std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

// FNV-1a over the canonical dump (object keys sorted, no whitespace).
inline std::string config_hash(const json& j) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace ncricci
