// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
// Exit status is 0 when every check ran to completion; failed criteria are reported, not hidden.

#include "ttkl/config.hpp"
#include "ttkl/pipeline.hpp"
#include "ttkl/serialization.hpp"
#include "ttkl/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ttkl;

namespace {

// Criterion 1
constexpr int kRankRuns = 100;
constexpr int kRankNeeded = 95;
constexpr double kEx1Tol = 1e-6;
constexpr std::size_t kEx1M1 = 400;
constexpr double kEx1SecondsPerRun = 60.0;
// Criterion 2
constexpr std::uint64_t kSpectrumSeed = 17;
constexpr double kEigRelTol = 1e-6;
constexpr double kModeSupTol40 = 1e-6;
constexpr double kModeSupTol80 = 1e-4;
constexpr std::size_t kSupGrid = 2001;
// Criterion 3
constexpr int kMedianRuns = 20;
constexpr double kMedianBound = 1e-10;
constexpr std::size_t kTestPoints = 1000;
// Criterion 4
constexpr int kEx2Runs = 10;
constexpr double kEx2RankRate = 0.8;
constexpr double kEpsG2Bound = 1e-5;
constexpr double kEpsG3Bound = 1e-4;
constexpr double kEx2GF2 = 1.0847e-2;
constexpr double kEx2GF3 = 3.9148e-3;
constexpr double kEx2Seconds = 15.0 * 60.0;
// Criterion 5
constexpr int kEx3Runs = 10;
constexpr double kEx3RankRate = 0.6;
constexpr std::size_t kEx3Latent = 17;
constexpr std::size_t kEx3LatentSlack = 2;
constexpr double kEx3Seconds = 2.0 * 3600.0;
// Criterion 6
constexpr double kNystromCrossTol = 1e-9;
constexpr std::size_t kNystromOrder = 40;
constexpr double kNystromEigRel = 1e-4;
constexpr double kNystromCut = 1e-6;
constexpr std::size_t kNystromModes = 8;
constexpr double kNystromModeSup = 1e-2;
constexpr double kClusterGap = 1e-6;
// Criterion 7
constexpr std::size_t kOracleModes = 12;
constexpr double kOracleTol = 1e-4;
constexpr double kGramTol = 1e-10;
constexpr double kTransformTol = 1e-12;
constexpr double kSymmetryFactor = 10.0;
// Criterion 8
constexpr double kOrthoTol = 1e-8;
constexpr double kUnityTol = 1e-13;
constexpr double kJoinTol = 1e-14;
constexpr double kScaleTol = 1e-13;
constexpr double kSerialTol = 1e-14;

int g_pass = 0, g_total = 0;

void report(const std::string& id, bool pass, const std::string& what) {
    ++g_total;
    g_pass += pass;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << "  " << what << std::endl;
}

void info(const std::string& what) { std::cout << "       " << what << std::endl; }

std::string fmt(const char* f, double v) {
    char b[64];
    std::snprintf(b, sizeof b, f, v);
    return b;
}

std::string tuple(const std::vector<std::size_t>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sine_mode(std::size_t k, double x) { return std::sqrt(2.0) * std::sin((2.0 * k - 1.0) * std::numbers::pi * x / 2.0); }
double sine_lambda(std::size_t k) { return 4.0 / (std::numbers::pi * std::numbers::pi * (2.0 * k - 1.0) * (2.0 * k - 1.0)); }

std::string config_path(const char* name) { return std::string(TTKL_CONFIG_DIR) + "/" + name; }

// ---------------------------------------------------------------- Example 1

void example1() {
    const Kernel k2 = kernels::spectral_series(2, 80);
    const Target g = [&k2](std::span<const double> u) {
        const Point3 p[2] = {{u[0], 0, 0}, {u[1], 0, 0}};
        return k2(std::span<const Point3>(p, 2));
    };
    int exact = 0;
    double worst_time = 0.0;
    std::vector<double> eps;
    std::optional<CrossResult> keep;
    std::vector<std::size_t> outliers;
    for (int s = 1; s <= kRankRuns; ++s) {
        CrossConfig cfg;
        cfg.tol = kEx1Tol;
        cfg.mk = kEx1M1;
        cfg.m0 = kEx1M1;
        cfg.seed = static_cast<std::uint64_t>(s);
        const auto t0 = std::chrono::steady_clock::now();
        CrossResult r = cross_decompose_bivariate(g, cfg);
        worst_time = std::max(worst_time, seconds_since(t0));
        const std::size_t rank = r.train.ranks()[0];
        if (rank == 80) ++exact;
        else outliers.push_back(rank);
        if (s <= kMedianRuns) {
            const FunctionTrain& t = r.train;
            eps.push_back(global_relative_error(g, [&t](std::span<const double> u) { return t(u); }, 2, kTestPoints,
                                                static_cast<std::uint64_t>(s)).value);
        }
        if (static_cast<std::uint64_t>(s) == kSpectrumSeed) keep = std::move(r);
    }
    report("C1", exact >= kRankNeeded && worst_time < kEx1SecondsPerRun,
           "Example 1 exact rank 80 in " + std::to_string(exact) + "/" + std::to_string(kRankRuns) + " runs (need >= " +
               std::to_string(kRankNeeded) + "); slowest run " + fmt("%.2f", worst_time) + " s (limit 60 s)");
    if (!outliers.empty()) info("C1 outlier ranks: " + tuple(outliers));

    // Criterion 2 on the kept run, both QR routes
    bool ok2 = true;
    for (QrMethod qm : {QrMethod::Householder, QrMethod::Cholesky}) {
        ModeOptions opt;
        opt.qr = qm;
        const DirectionalModes modes = modes_1d(keep->train, opt);
        double eig_err = 0.0, sup40 = 0.0, sup80 = 0.0;
        const std::size_t n = std::min<std::size_t>(80, modes.count());
        for (std::size_t k = 1; k <= n; ++k) {
            eig_err = std::max(eig_err, std::abs(modes.eig_f(static_cast<Eigen::Index>(k - 1)) - sine_lambda(k)) / sine_lambda(k));
            double ep = 0.0, em = 0.0;
            for (std::size_t i = 0; i < kSupGrid; ++i) {
                const double x = static_cast<double>(i) / (kSupGrid - 1);
                const double v = modes.f(x)(0, static_cast<Eigen::Index>(k - 1));
                ep = std::max(ep, std::abs(v - sine_mode(k, x)));
                em = std::max(em, std::abs(v + sine_mode(k, x)));
            }
            const double e = std::min(ep, em);
            if (k <= 40) sup40 = std::max(sup40, e);
            sup80 = std::max(sup80, e);
        }
        const bool pass = n == 80 && eig_err <= kEigRelTol && sup40 <= kModeSupTol40 && sup80 <= kModeSupTol80;
        ok2 = ok2 && pass;
        info(std::string(qm == QrMethod::Householder ? "householder" : "cholesky") + ": " + std::to_string(n) +
             " eigenpairs, max rel eig err " + fmt("%.2e", eig_err) + ", mode sup err k<=40 " + fmt("%.2e", sup40) +
             ", k<=80 " + fmt("%.2e", sup80));
    }
    report("C2", ok2, "Example 1 analytic spectrum: eigenvalues within 1e-6 rel, modes within 1e-6 (k<=40) / 1e-4 (k<=80), seed " +
                          std::to_string(kSpectrumSeed));

    const double med = median(eps);
    report("C3", med <= kMedianBound,
           "Example 1 median eps_g over " + std::to_string(kMedianRuns) + " runs = " + fmt("%.3e", med) + " (bound 1e-10)");
}

// ---------------------------------------------------------------- Example 2

struct Ex2Artifacts {
    std::optional<PipelineResult> reference; // config seed
};

Ex2Artifacts example2() {
    Ex2Artifacts out;
    const PipelineConfig base = load_config(config_path("example2.json"));
    const std::vector<std::size_t> r2{8, 37, 8}, r3{8, 41, 129, 38, 8};
    int exact2 = 0, exact3 = 0, completed = 0, latent37 = 0, latent37_to11 = 0;
    bool eps_ok = true, gf_ok = true;
    double worst_time = 0.0;
    for (int s = 1; s <= kEx2Runs; ++s) {
        PipelineConfig c = base;
        c.set_seed(static_cast<std::uint64_t>(s));
        const auto t0 = std::chrono::steady_clock::now();
        try {
            PipelineResult r = run_pipeline(c);
            const double secs = seconds_since(t0);
            worst_time = std::max(worst_time, secs);
            ++completed;
            const auto& rep = r.report;
            exact2 += rep.ranks2 == r2;
            exact3 += rep.ranks3 == r3;
            eps_ok = eps_ok && rep.eps_g2->value <= kEpsG2Bound && rep.eps_g3->value <= kEpsG3Bound;
            const double gf2 = rep.eps_gf2->value / kEx2GF2, gf3 = rep.eps_gf3->value / kEx2GF3;
            gf_ok = gf_ok && gf2 >= 0.5 && gf2 <= 2.0 && gf3 >= 0.5 && gf3 <= 2.0;
            if (rep.latent_before == 37) {
                ++latent37;
                latent37_to11 += rep.latent_after == 11;
            }
            info("seed " + std::to_string(s) + ": r2=" + tuple(rep.ranks2) + " r3=" + tuple(rep.ranks3) + " eps_g2=" +
                 fmt("%.2e", rep.eps_g2->value) + " eps_g3=" + fmt("%.2e", rep.eps_g3->value) + " latent " +
                 std::to_string(rep.latent_before) + "->" + std::to_string(rep.latent_after) + " eps_gf2=" +
                 fmt("%.3e", rep.eps_gf2->value) + " eps_gf3=" + fmt("%.3e", rep.eps_gf3->value) + " (" + fmt("%.1f", secs) +
                 " s, retries " + std::to_string(rep.retry_log.size()) + ")");
            if (static_cast<std::uint64_t>(s) == base.seed) out.reference = std::move(r);
        } catch (const StageFailed& e) {
            info("seed " + std::to_string(s) + ": " + e.what());
            eps_ok = false;
        }
    }
    const int need = static_cast<int>(std::ceil(kEx2RankRate * kEx2Runs));
    report("C4a", exact2 >= need, "Example 2 r2 = (8,37,8) in " + std::to_string(exact2) + "/" + std::to_string(kEx2Runs) + " runs (need >= " + std::to_string(need) + ")");
    report("C4b", exact3 >= need, "Example 2 r3 = (8,41,129,38,8) in " + std::to_string(exact3) + "/" + std::to_string(kEx2Runs) + " runs (need >= " + std::to_string(need) + ")");
    report("C4c", eps_ok && completed == kEx2Runs, "Example 2 eps_g2 <= 1e-5 and eps_g3 <= 1e-4 in every run (" + std::to_string(completed) + " completed)");
    report("C4d", latent37 > 0 && latent37_to11 == latent37,
           "Example 2 latent reduction 37 -> 11 at tol3 = 0.9999: " + std::to_string(latent37_to11) + "/" + std::to_string(latent37) + " runs with 37 latents reduce to 11");
    report("C4e", gf_ok && completed == kEx2Runs, "Example 2 eps_gf2 within [0.5,2]x 1.0847e-2 and eps_gf3 within [0.5,2]x 3.9148e-3 in every run");
    report("C4f", completed > 0 && worst_time < kEx2Seconds, "Example 2 full pipeline slowest run " + fmt("%.1f", worst_time) + " s (limit 900 s)");
    return out;
}

// ---------------------------------------------------------------- Example 3

void example3() {
    PipelineConfig base = load_config(config_path("example3.json"));
    const std::vector<std::size_t> r2{4, 21, 60, 21, 4};
    int exact = 0;
    for (int s = 1; s <= kEx3Runs; ++s) {
        PipelineConfig c = base;
        c.kernel3.reset();
        c.set_seed(static_cast<std::uint64_t>(s));
        try {
            const PipelineResult r = run_pipeline(c);
            exact += r.report.ranks2 == r2;
            info("seed " + std::to_string(s) + ": r2=" + tuple(r.report.ranks2) + " eps_g2=" + fmt("%.2e", r.report.eps_g2->value) +
                 " eps_gf2=" + fmt("%.3e", r.report.eps_gf2->value));
        } catch (const StageFailed& e) {
            info("seed " + std::to_string(s) + ": " + e.what());
        }
    }
    const int need = static_cast<int>(std::ceil(kEx3RankRate * kEx3Runs));
    report("C5a", exact >= need, "Example 3 r2 = (4,21,60,21,4) in " + std::to_string(exact) + "/" + std::to_string(kEx3Runs) + " runs (need >= " + std::to_string(need) + ")");

    const auto t0 = std::chrono::steady_clock::now();
    try {
        const PipelineResult r = run_pipeline(base);
        const double secs = seconds_since(t0);
        const auto& rep = r.report;
        const std::size_t after = rep.latent_after;
        const bool in_range = after + kEx3LatentSlack >= kEx3Latent && after <= kEx3Latent + kEx3LatentSlack;
        info("seed " + std::to_string(base.seed) + ": r2=" + tuple(rep.ranks2) + " r3=" + tuple(rep.ranks3) + " eps_g3=" +
             fmt("%.2e", rep.eps_g3->value) + " eps_gf2=" + fmt("%.3e", rep.eps_gf2->value) + " eps_gf3=" + fmt("%.3e", rep.eps_gf3->value));
        report("C5b", in_range && secs < kEx3Seconds,
               "Example 3 full m=3 pipeline ran end to end in " + fmt("%.1f", secs) + " s; latent " + std::to_string(rep.latent_before) +
                   " -> " + std::to_string(after) + " (target 17 +/- 2)");
    } catch (const StageFailed& e) {
        report("C5b", false, std::string("Example 3 full pipeline failed: ") + e.what());
    }
}

// ---------------------------------------------------------------- Criterion 6

void nystrom_agreement() {
    auto geom = std::make_shared<const NurbsGeometry>(geometries::bilinear_surface());
    const ParametricKernel km(geom, kernels::squared_exponential(), VariableOrdering::mirrored(2));
    const ParametricKernel kb(geom, kernels::squared_exponential(), VariableOrdering::blocked(2, 2));
    const BivariateKernel bk = [&kb](std::span<const double> x, std::span<const double> y) {
        const double u[4] = {x[0], x[1], y[0], y[1]};
        return kb(std::span<const double>(u, 4));
    };
    const NystromResult ny = nystrom_oracle(bk, 2, kNystromOrder);
    Eigen::Index count = 0;
    while (count < ny.values.size() && ny.values(count) > kNystromCut * ny.values(0)) ++count;

    auto eig_check = [&](const DirectionalModes& modes) {
        double worst = 0.0;
        const Eigen::Index n = std::min<Eigen::Index>(count, modes.eig_g.size());
        for (Eigen::Index k = 0; k < n; ++k) worst = std::max(worst, std::abs(modes.eig_g(k) - ny.values(k)) / ny.values(k));
        return std::pair{worst, modes.eig_g.size() >= count};
    };

    // Example 2 cross tolerance, informational
    {
        CrossConfig cfg;
        cfg.tol = 1e-6;
        cfg.mk = 800;
        cfg.m0 = 800;
        cfg.seed = 3;
        const auto r = cross_decompose([&km](std::span<const double> u) { return km(u); }, 4, cfg);
        const auto [w, enough] = eig_check(modes_2d(r.train));
        info("at cross tol 1e-6: worst rel eigenvalue error " + fmt("%.2e", w) + " over " + std::to_string(count) + " oracle eigenvalues");
    }

    CrossConfig cfg;
    cfg.tol = kNystromCrossTol;
    cfg.mk = 800;
    cfg.m0 = 800;
    cfg.seed = 3;
    const auto r = cross_decompose([&km](std::span<const double> u) { return km(u); }, 4, cfg);
    const DirectionalModes modes = modes_2d(r.train);
    const auto [worst, enough] = eig_check(modes);

    // modes up to sign, or up to rotation inside a degenerate oracle eigenspace
    const Eigen::Index nodes = ny.nodes.rows();
    Eigen::MatrixXd fvals(nodes, static_cast<Eigen::Index>(kNystromModes));
    for (Eigen::Index p = 0; p < nodes; ++p) {
        const double x[3] = {ny.nodes(p, 0), ny.nodes(p, 1), 0.0};
        fvals.row(p) = modes.row(x).head(static_cast<Eigen::Index>(kNystromModes));
    }
    double worst_mode = 0.0;
    for (std::size_t k = 0; k < kNystromModes; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        Eigen::Index lo = ki, hi = ki;
        while (lo > 0 && std::abs(ny.values(lo - 1) - ny.values(ki)) <= kClusterGap * ny.values(ki)) --lo;
        while (hi + 1 < ny.values.size() && std::abs(ny.values(hi + 1) - ny.values(ki)) <= kClusterGap * ny.values(ki)) ++hi;
        Eigen::VectorXd coef(hi - lo + 1);
        for (Eigen::Index j = lo; j <= hi; ++j) coef(j - lo) = (ny.weights.array() * fvals.col(ki).array() * ny.vectors.col(j).array()).sum();
        double sup = 0.0;
        for (int i = 0; i <= 40; ++i)
            for (int j = 0; j <= 40; ++j) {
                const double x[3] = {i / 40.0, j / 40.0, 0.0};
                double proj = 0.0;
                for (Eigen::Index c = lo; c <= hi; ++c) proj += coef(c - lo) * ny.eigenfunction(static_cast<std::size_t>(c), x);
                sup = std::max(sup, std::abs(modes.row(x)(ki) - proj));
            }
        worst_mode = std::max(worst_mode, sup);
    }
    report("C6", enough && worst <= kNystromEigRel && worst_mode <= kNystromModeSup,
           "Nystrom 40x40 agreement (cross tol 1e-9): worst rel eigenvalue error " + fmt("%.2e", worst) + " over " +
               std::to_string(count) + " eigenvalues > 1e-6 l1 (bound 1e-4); dominant " + std::to_string(kNystromModes) +
               " modes sup error " + fmt("%.2e", worst_mode) + " (bound 1e-2)");
}

// ---------------------------------------------------------------- Criterion 7

Eigen::MatrixXd unfold_mode1(const Tensor3& t) {
    Eigen::MatrixXd u(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1) * t.dim(2)));
    for (std::size_t i = 0; i < t.dim(0); ++i)
        for (std::size_t j = 0; j < t.dim(1); ++j)
            for (std::size_t k = 0; k < t.dim(2); ++k) u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j * t.dim(2) + k)) = t(i, j, k);
    return u;
}

double max_abs(const Tensor3& t) {
    double m = 0.0;
    for (double v : t.data()) m = std::max(m, std::abs(v));
    return m;
}

void oracle_equivalence(const PipelineResult& ref) {
    const PipelineConfig c = load_config(config_path("example2.json"));
    const PipelineKernels pk(c);
    const DirectionalModes& modes = ref.expansion.modes;
    const FunctionTrain& t3 = ref.cross3->train;

    const DirectionalModes small = modes.truncated(kOracleModes);
    const Tensor3 got = project_third_cumulant(t3, small).dense();
    const auto t0 = std::chrono::steady_clock::now();
    const Tensor3 oracle = dense_cumulant3_oracle(*pk.blocked3, small, 8, 1e-6, 2'000'000'000);
    double diff = 0.0;
    for (std::size_t e = 0; e < got.data().size(); ++e) diff = std::max(diff, std::abs(got.data()[e] - oracle.data()[e]));
    const double rel = diff / max_abs(oracle);
    report("C7a", rel <= kOracleTol, "dense quadrature C3 vs projected cores at n = " + std::to_string(kOracleModes) + ": max rel diff " +
                                         fmt("%.2e", rel) + " (bound 1e-4, oracle " + fmt("%.1f", seconds_since(t0)) + " s)");

    const LatentCumulant3 lc = project_third_cumulant(t3, modes);
    const Tensor3 dense = lc.dense();
    const Eigen::MatrixXd u = unfold_mode1(dense);
    const Eigen::MatrixXd gd = u * u.transpose();
    const double gerr = (gram_mode1(lc) - gd).norm() / gd.norm();
    report("C7b", gerr <= kGramTol, "gram_mode1 vs dense unfolding (n = " + std::to_string(lc.latent()) + "): rel diff " + fmt("%.2e", gerr) + " (bound 1e-10)");

    const Eigen::MatrixXd u3 = ref.expansion.u3;
    const Tensor3 a = transform_cores(lc, u3).dense();
    const Tensor3 b = three_mode_product(dense, u3);
    double terr = 0.0;
    for (std::size_t e = 0; e < a.data().size(); ++e) terr = std::max(terr, std::abs(a.data()[e] - b.data()[e]));
    terr /= dense.frobenius();
    report("C7c", terr <= kTransformTol, "transform_cores vs dense three-mode product: max diff / ||C3|| = " + fmt("%.2e", terr) + " (bound 1e-12)");

    const double eps_g3 = ref.report.eps_g3->value;
    const double sym = supersymmetry_defect(dense) / max_abs(dense);
    report("C7d", sym <= kSymmetryFactor * eps_g3,
           "supersymmetry defect of dense C3 (relative to max entry) " + fmt("%.2e", sym) + " <= 10 eps_g3 = " + fmt("%.2e", kSymmetryFactor * eps_g3));
}

// ---------------------------------------------------------------- Criterion 8

void invariants(const PipelineResult& ref) {
    const DirectionalModes& modes = ref.expansion.modes;
    const Eigen::MatrixXd gram = product_mode_gram(modes);
    const double ortho = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    report("C8a", ortho <= kOrthoTol, "product mode orthonormality (Example 2, " + std::to_string(gram.rows()) + " modes): max |G - I| " + fmt("%.2e", ortho) + " (bound 1e-8)");

    const NurbsGeometry shell = geometries::hemispherical_shell();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double unity = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double xi[3] = {unit(rng), unit(rng), unit(rng)};
        const auto r = shell.rational_basis(xi);
        double s = 0.0;
        for (double v : r) s += v;
        unity = std::max(unity, std::abs(s - 1.0));
        for (std::size_t d = 0; d < 3; ++d) {
            const int p = d == 0 ? 1 : 2;
            const std::vector<double> knots = d == 0 ? std::vector<double>{0, 0, 1, 1} : std::vector<double>{0, 0, 0, 1, 1, 1};
            double sb = 0.0;
            for (int k = 1; k <= static_cast<int>(knots.size()) - p - 1; ++k) sb += bspline_basis(knots, p, k, xi[d]);
            unity = std::max(unity, std::abs(sb - 1.0));
        }
    }
    report("C8b", unity <= kUnityTol, "NURBS partition of unity (Example 3 knots, 1000 points): max deviation " + fmt("%.2e", unity) + " (bound 1e-13)");

    const FunctionMatrix& g = *modes.g;
    const FunctionMatrix back = disjoin_supports(join_supports(g, JoinAxis::Rows), g.rows());
    double jerr = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double x = i / 200.0;
        jerr = std::max(jerr, (back(x) - g(x)).cwiseAbs().maxCoeff());
    }
    report("C8c", jerr <= kJoinTol, "join/disjoin round trip of the eta modes: max diff " + fmt("%.2e", jerr) + " (bound 1e-14)");

    const FunctionTrain& t2 = ref.cross2.train;
    const PipelineKernels pk(load_config(config_path("example2.json")));
    const ParametricKernel& k = *pk.train2;
    const auto e1 = global_relative_error([&k](std::span<const double> u) { return k(u); }, [&t2](std::span<const double> u) { return t2(u); }, 4, kTestPoints, 5);
    const double c = 3.7;
    const auto e2 = global_relative_error([&k, c](std::span<const double> u) { return c * k(u); }, [&t2, c](std::span<const double> u) { return c * t2(u); }, 4, kTestPoints, 5);
    const double serr = std::abs(e1.value - e2.value);
    report("C8d", serr <= kScaleTol, "eps_g scale equivariance (c = 3.7): |diff| " + fmt("%.2e", serr) + " (bound 1e-13)");

    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_expansion(ss, ref.saved());
    const SavedExpansion s = read_expansion(ss);
    double rerr = 0.0;
    for (int i = 0; i < 100; ++i) {
        double p[6];
        for (double& v : p) v = unit(rng);
        const std::span<const double> sp(p, 6);
        rerr = std::max(rerr, std::abs(eval_cumulant2_reduced(ref.expansion, sp.subspan(0, 2), sp.subspan(2, 2)) -
                                       eval_cumulant2_reduced(s.expansion, sp.subspan(0, 2), sp.subspan(2, 2))));
        rerr = std::max(rerr, std::abs(eval_cumulant3_reduced(ref.expansion, sp.subspan(0, 2), sp.subspan(2, 2), sp.subspan(4, 2)) -
                                       eval_cumulant3_reduced(s.expansion, sp.subspan(0, 2), sp.subspan(2, 2), sp.subspan(4, 2))));
    }
    report("C8e", rerr <= kSerialTol, "serialization round trip at 100 random points: max diff " + fmt("%.2e", rerr) + " (bound 1e-14)");
}

} // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    try {
        example1();
        const Ex2Artifacts ex2 = example2();
        example3();
        nystrom_agreement();
        if (ex2.reference) {
            oracle_equivalence(*ex2.reference);
            invariants(*ex2.reference);
        } else {
            report("C7", false, "Example 2 reference run unavailable");
            report("C8", false, "Example 2 reference run unavailable");
        }
    } catch (const std::exception& e) {
        std::cout << "acceptance aborted: " << e.what() << std::endl;
        return 1;
    }
    std::cout << "acceptance: " << g_pass << "/" << g_total << " checks passed in " << fmt("%.0f", seconds_since(start)) << " s" << std::endl;
    return 0;
}
