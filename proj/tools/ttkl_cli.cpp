// ttkl: run the expansion pipeline, replay its tests, sample modes, solve the Nystrom reference.

#include "ttkl/config.hpp"
#include "ttkl/pipeline.hpp"
#include "ttkl/serialization.hpp"
#include "ttkl/validate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace ttkl;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kStage = 3, kFormat = 4 };

const char* kAxes[3] = {"xi", "eta", "zeta"};

struct Options {
    std::string config;
    std::string expansion;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::size_t grid = 101;
    std::optional<int> order;
    std::optional<std::string> qr;
    bool json_report = false;
};

std::ofstream open_out(const Options& o, const std::string& name) {
    fs::create_directories(o.out_dir);
    const fs::path p = fs::path(o.out_dir) / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw FormatError("cannot write " + p.string());
    return os;
}

PipelineConfig configure(const Options& o) {
    PipelineConfig c = load_config(o.config);
    if (o.seed) c.set_seed(*o.seed);
    if (o.order) {
        if (*o.order == 2) c.kernel3.reset();
        else if (*o.order == 3 && !c.kernel3) throw ConfigError("--order 3 needs kernels.order3 in the config");
    }
    if (o.qr) {
        if (*o.qr == "householder") c.modes.qr = QrMethod::Householder;
        else if (*o.qr == "cholesky") c.modes.qr = QrMethod::Cholesky;
        else throw ConfigError("--qr must be householder or cholesky");
    }
    c.check();
    return c;
}

void write_report(const Options& o, const RunReport& rep, const std::string& stem) {
    const std::string text = rep.to_text();
    std::cout << text;
    open_out(o, stem + ".txt") << text;
    if (o.json_report) open_out(o, stem + ".json") << rep.to_json().dump(2) << '\n';
}

void write_modes(const Options& o, const DirectionalModes& modes) {
    const FunctionMatrix* dirs[3] = {&modes.f, modes.g ? &*modes.g : nullptr, modes.h ? &*modes.h : nullptr};
    for (std::size_t d = 0; d < modes.m; ++d) {
        auto os = open_out(o, std::string("modes_") + kAxes[d] + ".csv");
        csv::write_mode_samples(os, *dirs[d], o.grid, kAxes[d]);
    }
}

void write_errdm(const Options& o, const CrossDiagnostics& d, const std::string& name) {
    auto os = open_out(o, name);
    os << "dimension";
    for (Eigen::Index s = 0; s < d.errdm.cols(); ++s) os << ",half_sweep_" << s + 1;
    os << '\n';
    os.precision(17);
    for (Eigen::Index k = 0; k < d.errdm.rows(); ++k) {
        os << k + 1;
        for (Eigen::Index s = 0; s < d.errdm.cols(); ++s) os << ',' << d.errdm(k, s);
        os << '\n';
    }
}

int cmd_run(const Options& o) {
    const PipelineConfig c = configure(o);
    const PipelineResult r = run_pipeline(c);
    const auto& modes = r.expansion.modes;
    const Eigen::VectorXd* eig[3] = {&modes.eig_f, &modes.eig_g, &modes.eig_h};
    for (std::size_t d = 0; d < modes.m; ++d) {
        auto os = open_out(o, std::string("eigenvalues_") + kAxes[d] + ".csv");
        csv::write_eigenvalues(os, *eig[d]);
    }
    write_modes(o, modes);
    write_errdm(o, r.cross2.diagnostics, "errdm_order2.csv");
    if (r.cross3) {
        write_errdm(o, r.cross3->diagnostics, "errdm_order3.csv");
        auto os = open_out(o, "lambda3.csv");
        csv::write_eigenvalues(os, r.expansion.lambda3);
    }
    {
        auto os = open_out(o, "expansion.ttkl");
        write_expansion(os, r.saved());
    }
    write_report(o, r.report, "report");
    return kOk;
}

int cmd_verify(const Options& o) {
    const PipelineConfig c = configure(o);
    const SavedExpansion s = load_expansion(o.expansion);
    write_report(o, verify_expansion(s, c), "verify");
    return kOk;
}

int cmd_sample(const Options& o) {
    const SavedExpansion s = load_expansion(o.expansion);
    write_modes(o, s.expansion.modes);
    std::cout << "wrote " << s.expansion.modes.m << " mode table(s) on a " << o.grid << "-point grid to " << o.out_dir << '\n';
    return kOk;
}

int cmd_oracle(const Options& o) {
    const PipelineConfig c = configure(o);
    const PipelineKernels pk(c);
    const std::size_t m = pk.m;
    const ParametricKernel& k = *pk.blocked2;
    const BivariateKernel kernel = [&k, m](std::span<const double> x, std::span<const double> y) {
        double u[6];
        for (std::size_t d = 0; d < m; ++d) {
            u[d] = x[d];
            u[m + d] = y[d];
        }
        return k(std::span<const double>(u, 2 * m));
    };
    std::size_t points = 1;
    for (std::size_t d = 0; d < m; ++d) points *= o.grid;
    if (points > 8000) throw ConfigError("oracle grid too large: " + std::to_string(points) + " nodes (limit 8000)");
    const NystromResult r = nystrom_oracle(kernel, m, o.grid);
    auto os = open_out(o, "oracle_eigenvalues.csv");
    csv::write_eigenvalues(os, r.values);
    std::cout << "Nystrom reference: " << points << " nodes, lambda_1 = " << r.values(0) << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tensor-train Karhunen-Loeve expansion of random fields with higher-order cumulants"};
    app.require_subcommand(1);
    Options o;

    auto common = [&o](CLI::App* s) {
        s->add_option("--out-dir", o.out_dir, "Directory for emitted files");
        s->add_option("--seed", o.seed, "Override every seed in the config");
        s->add_option("--order", o.order, "Highest cumulant order to run")->check(CLI::IsMember({2, 3}));
        s->add_option("--qr", o.qr, "Quasimatrix QR method")->check(CLI::IsMember({"householder", "cholesky"}));
        s->add_flag("--json-report", o.json_report, "Also write the report as JSON");
    };

    auto* run = app.add_subcommand("run", "Run the full pipeline");
    run->add_option("config,--config", o.config, "Config file")->check(CLI::ExistingFile);
    run->add_option("--grid", o.grid, "Uniform grid size for mode samples")->check(CLI::PositiveNumber);
    common(run);

    auto* verify = app.add_subcommand("verify", "Replay the global tests on a saved expansion");
    verify->add_option("expansion", o.expansion, "Expansion container")->required()->check(CLI::ExistingFile);
    verify->add_option("config,--config", o.config, "Config file")->check(CLI::ExistingFile);
    common(verify);

    auto* sample = app.add_subcommand("sample-modes", "Emit directional modes on a uniform grid");
    sample->add_option("expansion", o.expansion, "Expansion container")->required()->check(CLI::ExistingFile);
    sample->add_option("--grid", o.grid, "Grid size per direction")->check(CLI::PositiveNumber);
    sample->add_option("--out-dir", o.out_dir, "Directory for emitted files");

    auto* oracle = app.add_subcommand("oracle", "Nystrom reference eigen-solve of the covariance kernel");
    oracle->add_option("config,--config", o.config, "Config file")->check(CLI::ExistingFile);
    oracle->add_option("--grid", o.grid, "Gauss-Legendre order per direction")->check(CLI::PositiveNumber);
    common(oracle);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if ((run->parsed() || verify->parsed() || oracle->parsed()) && o.config.empty())
            throw ConfigError("a config file is required");
        if (oracle->parsed() && oracle->count("--grid") == 0) o.grid = 40;
        if (run->parsed()) return cmd_run(o);
        if (verify->parsed()) return cmd_verify(o);
        if (sample->parsed()) return cmd_sample(o);
        return cmd_oracle(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const StageFailed& e) {
        std::cerr << "stage failed: " << e.what() << '\n';
        return kStage;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return kFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
