#pragma once

// The six-step run: pullback, TT(K=2), test, modes, TT(K=3), projection + HOSVD, final test.

#include "ttkl/config.hpp"
#include "ttkl/cumulant.hpp"
#include "ttkl/klmodes.hpp"
#include "ttkl/serialization.hpp"
#include "ttkl/ttcross.hpp"
#include "ttkl/validate.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ttkl {

struct StageRecord {
    std::string name;
    double seconds = 0.0;
};

struct CrossAttempt {
    std::size_t order = 2;
    double tol = 0.0;
    std::size_t mk = 0;
    std::vector<std::size_t> ranks;
    std::size_t sweeps = 0;
    bool converged = false;
    double eps = -1.0; ///< -1 when the attempt did not reach the test
};

struct RunReport {
    std::string name;
    std::size_t m = 1;
    std::uint64_t seed = 0;
    std::vector<StageRecord> stages;
    std::vector<CrossAttempt> attempts;
    std::vector<std::string> retry_log;
    std::vector<std::size_t> ranks2, ranks3;
    std::vector<std::size_t> eigen_counts; ///< n1, n2, n3
    std::size_t latent_before = 0, latent_after = 0;
    std::optional<ErrorReport> eps_g2, eps_g3, eps_gf2, eps_gf3;

    double stage_seconds(const std::string& stage) const {
        for (const auto& s : stages)
            if (s.name == stage) return s.seconds;
        return 0.0;
    }

    /// With timings=false the output depends only on config and seeds.
    nlohmann::json to_json(bool timings = true) const {
        using nlohmann::json;
        auto err = [timings](const std::optional<ErrorReport>& e) -> json {
            if (!e) return nullptr;
            json j{{"metric", e->metric}, {"N", e->n}, {"value", e->value}, {"seed", e->seed}};
            if (timings) j["seconds"] = e->seconds;
            return j;
        };
        json j;
        j["name"] = name;
        j["m"] = m;
        j["seed"] = seed;
        j["ranks2"] = ranks2;
        j["ranks3"] = ranks3;
        j["eigen_counts"] = eigen_counts;
        j["latent_before"] = latent_before;
        j["latent_after"] = latent_after;
        j["eps_g2"] = err(eps_g2);
        j["eps_g3"] = err(eps_g3);
        j["eps_gf2"] = err(eps_gf2);
        j["eps_gf3"] = err(eps_gf3);
        j["retry_log"] = retry_log;
        json at = json::array();
        for (const auto& a : attempts)
            at.push_back({{"order", a.order}, {"tol", a.tol}, {"mk", a.mk}, {"ranks", a.ranks}, {"half_sweeps", a.sweeps},
                          {"converged", a.converged}, {"eps", a.eps}});
        j["cross_attempts"] = at;
        json st = json::array();
        for (const auto& s : stages) {
            json e{{"stage", s.name}};
            if (timings) e["seconds"] = s.seconds;
            st.push_back(e);
        }
        j["stages"] = st;
        if (timings) {
            // columns: C_TT, eps_g, modes, eps_gf, total
            auto row = [this](const char* tt, const char* eg, const char* md, const char* gf) {
                const double v[4] = {stage_seconds(tt), stage_seconds(eg), stage_seconds(md), stage_seconds(gf)};
                return json{{"tt", v[0]}, {"eps_g", v[1]}, {"modes", v[2]}, {"eps_gf", v[3]}, {"total", v[0] + v[1] + v[2] + v[3]}};
            };
            j["timing_table"] = {{"k2", row("cross2", "eps_g2", "modes", "eps_gf2")}};
            if (!ranks3.empty()) j["timing_table"]["k3"] = row("cross3", "eps_g3", "cumulant3", "eps_gf3");
        }
        return j;
    }

    std::string to_text() const {
        std::ostringstream os;
        auto list = [&os](const std::vector<std::size_t>& v) {
            os << '(';
            for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
            os << ')';
        };
        os << "run " << name << "  m=" << m << "  seed=" << seed << '\n';
        os << "ranks2 ";
        list(ranks2);
        os << '\n';
        if (!ranks3.empty()) {
            os << "ranks3 ";
            list(ranks3);
            os << '\n';
        }
        os << "eigenvalue counts ";
        list(eigen_counts);
        os << '\n';
        os << "latent factors " << latent_before << " -> " << latent_after << '\n';
        for (const auto* e : {&eps_g2, &eps_g3, &eps_gf2, &eps_gf3})
            if (*e) os << (*e)->metric << " = " << (*e)->value << "  (N=" << (*e)->n << ")\n";
        for (const auto& s : stages) os << "time " << s.name << " " << s.seconds << " s\n";
        for (const auto& r : retry_log) os << "retry: " << r << '\n';
        return os.str();
    }
};

struct PipelineResult {
    FinalExpansion expansion;
    RunReport report;
    CrossResult cross2;
    std::optional<CrossResult> cross3;

    SavedExpansion saved() const {
        SavedExpansion s{expansion, cross2.train, std::nullopt};
        if (cross3) s.train3 = cross3->train;
        return s;
    }
};

/// Pullbacks of the configured kernels in the layouts the pipeline uses.
struct PipelineKernels {
    std::shared_ptr<const NurbsGeometry> geometry;
    std::size_t m = 1;
    std::optional<ParametricKernel> train2;   ///< mirrored, fed to the K=2 cross
    std::optional<ParametricKernel> blocked2; ///< (p, q) layout for the final covariance test
    std::optional<ParametricKernel> blocked3;

    explicit PipelineKernels(const PipelineConfig& c) {
        geometry = std::make_shared<const NurbsGeometry>(c.geometry.build());
        m = geometry->param_dim();
        if (m < 1 || m > 3) throw ConfigError("parametric dimension must be 1, 2 or 3");
        const Kernel k2 = c.kernel2.build(2);
        train2.emplace(geometry, k2, VariableOrdering::mirrored(m));
        blocked2.emplace(geometry, k2, VariableOrdering::blocked(m, 2));
        if (c.kernel3) blocked3.emplace(geometry, c.kernel3->build(3), VariableOrdering::blocked(m, 3));
    }
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4e", v);
    return buf;
}

// Cross + global test with the doubling retry rule.
inline CrossResult cross_with_retries(std::size_t order, const ParametricKernel& kernel, bool bivariate, CrossConfig cfg,
                                      double tol_g, const PipelineConfig& pc, RunReport& report) {
    const std::string tt = "cross" + std::to_string(order), eg = "eps_g" + std::to_string(order);
    const Target g = [&kernel](std::span<const double> u) { return kernel(u); };
    double tt_time = 0.0, eg_time = 0.0;
    for (std::size_t attempt = 0;; ++attempt) {
        CrossAttempt rec{order, cfg.tol, cfg.mk, {}, 0, false, -1.0};
        std::string why;
        std::optional<CrossResult> res;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            res = bivariate ? cross_decompose_bivariate(g, cfg) : cross_decompose(g, kernel.dim(), cfg);
        } catch (const NotConverged& e) {
            rec.sweeps = e.diagnostics().sweeps_used;
            why = e.what();
        } catch (const Error& e) {
            tt_time += seconds_since(t0);
            report.attempts.push_back(rec);
            report.stages.push_back({tt, tt_time});
            throw StageFailed(tt, e.what());
        }
        tt_time += seconds_since(t0);
        if (res) {
            rec.ranks = res->train.ranks();
            rec.sweeps = res->diagnostics.sweeps_used;
            rec.converged = res->diagnostics.converged;
            const auto t1 = std::chrono::steady_clock::now();
            const FunctionTrain& tr = res->train;
            ErrorReport e = global_relative_error(g, [&tr](std::span<const double> u) { return tr(u); }, kernel.dim(),
                                                  pc.test_points, pc.seed, eg);
            eg_time += seconds_since(t1);
            rec.eps = e.value;
            if (e.value <= tol_g) {
                report.attempts.push_back(rec);
                report.stages.push_back({tt, tt_time});
                report.stages.push_back({eg, eg_time});
                (order == 2 ? report.eps_g2 : report.eps_g3) = e;
                (order == 2 ? report.ranks2 : report.ranks3) = rec.ranks;
                return std::move(*res);
            }
            why = eg + " = " + sci(e.value) + " exceeds tol_g = " + sci(tol_g);
        }
        report.attempts.push_back(rec);
        if (attempt >= pc.max_retries) {
            report.stages.push_back({tt, tt_time});
            throw StageFailed(tt, why + " after " + std::to_string(attempt) + " retries");
        }
        cfg.mk *= 2;
        cfg.tol /= 10.0;
        report.retry_log.push_back("order " + std::to_string(order) + ": " + why + "; retrying with mk=" +
                                   std::to_string(cfg.mk) + ", tol=" + sci(cfg.tol));
    }
}

} // namespace detail

inline PipelineResult run_pipeline(const PipelineConfig& c) {
    c.check();
    const auto start = std::chrono::steady_clock::now();
    PipelineResult out;
    RunReport& rep = out.report;
    rep.name = c.name;
    rep.seed = c.seed;

    auto t0 = std::chrono::steady_clock::now();
    const PipelineKernels pk(c);
    rep.m = pk.m;
    rep.stages.push_back({"transform", detail::seconds_since(t0)});
    const std::size_t m = pk.m;

    out.cross2 = detail::cross_with_retries(2, *pk.train2, m == 1, c.cross2, c.tol_g2, c, rep);

    t0 = std::chrono::steady_clock::now();
    DirectionalModes modes;
    try {
        modes = compute_modes(out.cross2.train, c.modes);
    } catch (const Error& e) {
        throw StageFailed("modes", e.what());
    }
    rep.stages.push_back({"modes", detail::seconds_since(t0)});
    rep.eigen_counts.push_back(modes.f.cols());
    if (m > 1) rep.eigen_counts.push_back(modes.g->cols());
    if (m > 2) rep.eigen_counts.push_back(modes.h->cols());
    rep.latent_before = rep.latent_after = modes.count();

    const PointFunction ref2 = [&pk](std::span<const double> u) { return (*pk.blocked2)(u); };
    if (!c.kernel3) {
        out.expansion = assemble_final(modes, std::nullopt, std::nullopt);
    } else {
        out.cross3 = detail::cross_with_retries(3, *pk.blocked3, false, c.cross3, c.tol_g3, c, rep);
        t0 = std::chrono::steady_clock::now();
        try {
            const LatentCumulant3 lc = project_third_cumulant(out.cross3->train, modes);
            const Compression comp = hosvd_truncate(gram_mode1(lc), modes.eigenvalues(), c.tol3, c.ratio);
            out.expansion = assemble_final(modes, comp, lc);
        } catch (const Error& e) {
            throw StageFailed("cumulant3", e.what());
        }
        rep.stages.push_back({"cumulant3", detail::seconds_since(t0)});
        rep.latent_after = out.expansion.latent();
    }

    t0 = std::chrono::steady_clock::now();
    rep.eps_gf2 = final_cumulant_error(out.expansion, 2, ref2, c.test_points, c.seed);
    rep.stages.push_back({"eps_gf2", detail::seconds_since(t0)});
    if (c.kernel3) {
        t0 = std::chrono::steady_clock::now();
        const PointFunction ref3 = [&pk](std::span<const double> u) { return (*pk.blocked3)(u); };
        rep.eps_gf3 = final_cumulant_error(out.expansion, 3, ref3, c.test_points, c.seed);
        rep.stages.push_back({"eps_gf3", detail::seconds_since(t0)});
    }
    rep.stages.push_back({"total", detail::seconds_since(start)});
    return out;
}

/// Replays the global tests of a saved expansion against the configured kernels.
inline RunReport verify_expansion(const SavedExpansion& s, const PipelineConfig& c) {
    const PipelineKernels pk(c);
    if (pk.m != s.expansion.modes.m) throw ConfigError("config and expansion disagree on the parametric dimension");
    RunReport rep;
    rep.name = c.name;
    rep.m = pk.m;
    rep.seed = c.seed;
    const DirectionalModes& md = s.expansion.modes;
    rep.eigen_counts.push_back(md.f.cols());
    if (md.g) rep.eigen_counts.push_back(md.g->cols());
    if (md.h) rep.eigen_counts.push_back(md.h->cols());
    rep.latent_before = md.count();
    rep.latent_after = s.expansion.latent();
    if (s.train2) {
        const FunctionTrain& t = *s.train2;
        rep.ranks2 = t.ranks();
        rep.eps_g2 = global_relative_error([&pk](std::span<const double> u) { return (*pk.train2)(u); },
                                           [&t](std::span<const double> u) { return t(u); }, pk.train2->dim(), c.test_points, c.seed, "eps_g2");
    }
    if (s.train3 && pk.blocked3) {
        const FunctionTrain& t = *s.train3;
        rep.ranks3 = t.ranks();
        rep.eps_g3 = global_relative_error([&pk](std::span<const double> u) { return (*pk.blocked3)(u); },
                                           [&t](std::span<const double> u) { return t(u); }, pk.blocked3->dim(), c.test_points, c.seed, "eps_g3");
    }
    rep.eps_gf2 = final_cumulant_error(s.expansion, 2, [&pk](std::span<const double> u) { return (*pk.blocked2)(u); }, c.test_points, c.seed);
    if (pk.blocked3 && s.expansion.cum3)
        rep.eps_gf3 = final_cumulant_error(s.expansion, 3, [&pk](std::span<const double> u) { return (*pk.blocked3)(u); }, c.test_points, c.seed);
    return rep;
}

} // namespace ttkl
