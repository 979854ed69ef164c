#pragma once

// Pipeline configuration read from JSON; the schema is in docs/config.md.

#include "ttkl/cumulant.hpp"
#include "ttkl/error.hpp"
#include "ttkl/kernels.hpp"
#include "ttkl/nurbs.hpp"
#include "ttkl/ttcross.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ttkl {

struct GeometrySpec {
    std::string type = "unit_interval"; ///< unit_interval | bilinear_surface | hemispherical_shell | nurbs
    double inner_radius = 1.0;
    double outer_radius = 1.2;
    // explicit NURBS
    std::size_t phys_dim = 3;
    std::vector<int> degrees;
    std::vector<std::vector<double>> knots;
    std::vector<Point3> control_points;
    std::vector<double> weights;

    NurbsGeometry build() const {
        if (type == "unit_interval") return geometries::unit_interval();
        if (type == "bilinear_surface") return geometries::bilinear_surface();
        if (type == "hemispherical_shell") return geometries::hemispherical_shell(inner_radius, outer_radius);
        if (type == "nurbs") return NurbsGeometry(phys_dim, degrees, knots, control_points, weights);
        throw ConfigError("unknown geometry type '" + type + "'");
    }
};

/// Registry entry: spectral_series | squared_exponential | triple_exponential.
struct KernelSpec {
    std::string type;
    double sigma = 1.0; ///< sigma^2 for order 2, sigma_3 for order 3
    double b = 1.0;
    double L = 1.0;
    std::size_t terms = 80;

    Kernel build(std::size_t order) const {
        if (!(sigma > 0.0 && b > 0.0 && L > 0.0)) throw ConfigError("kernel parameters must be positive");
        if (type == "spectral_series") {
            if (terms < 1) throw ConfigError("spectral series needs at least one term");
            return kernels::spectral_series(order, terms);
        }
        if (type == "squared_exponential") {
            if (order != 2) throw ConfigError("squared_exponential is a second-order kernel");
            return kernels::squared_exponential(sigma, b, L);
        }
        if (type == "triple_exponential") {
            if (order != 3) throw ConfigError("triple_exponential is a third-order kernel");
            return kernels::triple_exponential(sigma, b, L);
        }
        throw ConfigError("unknown kernel type '" + type + "'");
    }
};

struct PipelineConfig {
    std::string name = "run";
    GeometrySpec geometry;
    KernelSpec kernel2;
    std::optional<KernelSpec> kernel3;
    CrossConfig cross2;
    CrossConfig cross3;
    double tol_g2 = 1e-5;
    double tol_g3 = 1e-4;
    std::size_t max_retries = 2;
    double tol3 = 0.9999;
    SpectrumRatio ratio = SpectrumRatio::Energy;
    ModeOptions modes;
    std::size_t test_points = 1000; ///< N in the global random tests
    std::uint64_t seed = 1;

    void check() const {
        cross2.check();
        if (kernel3) cross3.check();
        for (double t : {tol_g2, tol_g3, tol3})
            if (!(t > 0.0 && t < 1.0)) throw ConfigError("tol_g2, tol_g3 and tol3 must lie in (0, 1)");
        if (test_points < 1) throw ConfigError("test_points must be positive");
        if (modes.drop_tol < 0.0 || modes.energy_eps < 0.0 || modes.energy_eps >= 1.0)
            throw ConfigError("mode truncation tolerances out of range");
        (void)geometry.build();
        (void)kernel2.build(2);
        if (kernel3) (void)kernel3->build(3);
    }

    /// Overrides every seed in the file.
    void set_seed(std::uint64_t s) {
        seed = s;
        cross2.seed = s;
        cross3.seed = s;
    }
};

namespace detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

inline CrossConfig read_cross(const nlohmann::json& j, CrossConfig c, std::uint64_t seed) {
    c.seed = seed;
    if (!j.is_object()) throw ConfigError("cross section must be an object");
    reject_unknown(j, {"tol", "mk", "m0", "maxswp", "seed", "fiber_tol", "max_condition"}, "cross");
    read_opt(j, "tol", c.tol);
    read_opt(j, "mk", c.mk);
    read_opt(j, "m0", c.m0);
    read_opt(j, "maxswp", c.maxswp);
    read_opt(j, "seed", c.seed);
    read_opt(j, "fiber_tol", c.fiber_tol);
    read_opt(j, "max_condition", c.max_condition);
    return c;
}

inline KernelSpec read_kernel(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type")) throw ConfigError("kernel needs a type");
    reject_unknown(j, {"type", "sigma", "sigma2", "sigma3", "b", "L", "terms"}, "kernel");
    KernelSpec k;
    read_opt(j, "type", k.type);
    read_opt(j, "sigma", k.sigma);
    read_opt(j, "sigma2", k.sigma);
    read_opt(j, "sigma3", k.sigma);
    read_opt(j, "b", k.b);
    read_opt(j, "L", k.L);
    read_opt(j, "terms", k.terms);
    return k;
}

inline GeometrySpec read_geometry(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type")) throw ConfigError("geometry needs a type");
    reject_unknown(j, {"type", "inner_radius", "outer_radius", "phys_dim", "degrees", "knots", "control_points", "weights"}, "geometry");
    GeometrySpec g;
    read_opt(j, "type", g.type);
    read_opt(j, "inner_radius", g.inner_radius);
    read_opt(j, "outer_radius", g.outer_radius);
    read_opt(j, "phys_dim", g.phys_dim);
    read_opt(j, "degrees", g.degrees);
    read_opt(j, "knots", g.knots);
    read_opt(j, "weights", g.weights);
    if (j.contains("control_points")) {
        for (const auto& p : j.at("control_points")) {
            if (!p.is_array() || p.size() < 1 || p.size() > 3) throw ConfigError("control point must have 1 to 3 coordinates");
            Point3 q{0.0, 0.0, 0.0};
            for (std::size_t d = 0; d < p.size(); ++d) q[d] = p[d].get<double>();
            g.control_points.push_back(q);
        }
    }
    return g;
}

} // namespace detail

inline PipelineConfig parse_config(const nlohmann::json& j) {
    using detail::read_opt;
    if (!j.is_object()) throw ConfigError("config root must be an object");
    detail::reject_unknown(j, {"name", "seed", "geometry", "kernels", "cross", "validation", "modes", "compression"}, "config");
    PipelineConfig c;
    read_opt(j, "name", c.name);
    read_opt(j, "seed", c.seed);
    c.cross2.seed = c.cross3.seed = c.seed;
    if (!j.contains("geometry")) throw ConfigError("config needs a geometry section");
    c.geometry = detail::read_geometry(j.at("geometry"));
    if (!j.contains("kernels") || !j.at("kernels").contains("order2")) throw ConfigError("config needs kernels.order2");
    const auto& ks = j.at("kernels");
    detail::reject_unknown(ks, {"order2", "order3"}, "kernels");
    c.kernel2 = detail::read_kernel(ks.at("order2"));
    if (ks.contains("order3") && !ks.at("order3").is_null()) c.kernel3 = detail::read_kernel(ks.at("order3"));
    if (j.contains("cross")) {
        const auto& cs = j.at("cross");
        detail::reject_unknown(cs, {"order2", "order3"}, "cross");
        if (cs.contains("order2")) c.cross2 = detail::read_cross(cs.at("order2"), c.cross2, c.seed);
        if (cs.contains("order3")) c.cross3 = detail::read_cross(cs.at("order3"), c.cross3, c.seed);
    }
    if (j.contains("validation")) {
        const auto& v = j.at("validation");
        detail::reject_unknown(v, {"tol_g2", "tol_g3", "max_retries", "test_points"}, "validation");
        read_opt(v, "tol_g2", c.tol_g2);
        read_opt(v, "tol_g3", c.tol_g3);
        read_opt(v, "max_retries", c.max_retries);
        read_opt(v, "test_points", c.test_points);
    }
    if (j.contains("modes")) {
        const auto& m = j.at("modes");
        detail::reject_unknown(m, {"qr", "drop_tol", "energy_eps"}, "modes");
        std::string qr = "householder";
        read_opt(m, "qr", qr);
        if (qr == "householder") c.modes.qr = QrMethod::Householder;
        else if (qr == "cholesky") c.modes.qr = QrMethod::Cholesky;
        else throw ConfigError("modes.qr must be householder or cholesky");
        read_opt(m, "drop_tol", c.modes.drop_tol);
        read_opt(m, "energy_eps", c.modes.energy_eps);
    }
    if (j.contains("compression")) {
        const auto& h = j.at("compression");
        detail::reject_unknown(h, {"tol3", "ratio"}, "compression");
        read_opt(h, "tol3", c.tol3);
        std::string ratio = "energy";
        read_opt(h, "ratio", ratio);
        if (ratio == "energy") c.ratio = SpectrumRatio::Energy;
        else if (ratio == "projected") c.ratio = SpectrumRatio::Projected;
        else throw ConfigError("compression.ratio must be energy or projected");
    }
    c.check();
    return c;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

} // namespace ttkl
