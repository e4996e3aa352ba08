#include "tvvar/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <ostream>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"

#include "tvvar/dmd.hpp"
#include "tvvar/eval.hpp"
#include "tvvar/io.hpp"
#include "tvvar/model.hpp"
#include "tvvar/synth.hpp"

#ifndef TVVAR_VERSION
#define TVVAR_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace tvvar {

namespace {

struct FitArgs {
    std::string input;
    std::string out;
    long rank = 0;
    long order = 1;
    int sweeps = 50;
    int cg_iters = 5;
    double ridge = 1e-8;
    double tol = 1e-8;
    bool binary = false;
    bool transpose = false;
    bool normalize = false;
    bool skip_header = false;
};

struct SynthArgs {
    std::string kind = "planted";
    long n = 10;
    long t = 200;
    long order = 1;
    long rank = 3;
    long switch_t = 50;
    double base_freq = 1.0 / 30.0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string truth;
    bool binary = false;
    bool hard_splice = false;
};

struct DmdArgs {
    std::string input;
    std::string out;
    long rank = 0;
    double dt = 1.0;
    bool binary = false;
    bool transpose = false;
    bool normalize = false;
    bool skip_header = false;
};

struct EvalArgs {
    std::string suite = "quick";
    std::string out;
    std::vector<int> criteria;
    std::string fault;
    std::uint64_t seed = eval::Options{}.seed;
};

json versions() {
    return {{"tvvar", TVVAR_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"cli11", CLI11_VERSION},
            {"compiler", __VERSION__}};
}

std::string join(const std::vector<std::string>& args) {
    std::string line = "tvvar";
    for (const auto& a : args) line += " " + a;
    return line;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

TimeSeriesMatrix load_input(const std::string& path, bool binary, bool transpose, bool skip_header) {
    if (!fs::exists(path)) throw DataError("input file not found: " + path);
    if (binary) {
        MatrixXd M = read_binary_matrix(path);
        if (transpose) M.transposeInPlace();
        return TimeSeriesMatrix(std::move(M));
    }
    return load_series(path, CsvOptions{skip_header, transpose});
}

json base_manifest(const std::vector<std::string>& args, const std::string& command) {
    return {{"command", command}, {"command_line", join(args)}, {"versions", versions()}};
}

int cmd_fit(const FitArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const auto series = load_input(a.input, a.binary, a.transpose, a.skip_header);
    FitConfig cfg;
    cfg.rank = a.rank;
    cfg.order = a.order;
    cfg.sweeps = a.sweeps;
    cfg.cg_iters = a.cg_iters;
    cfg.ridge = a.ridge;
    cfg.rel_tol = a.tol;
    validate_config(cfg, series.N(), series.T());
    const auto pairs = lag_embed(series, cfg.order);
    auto result = fit(pairs, cfg);
    if (a.normalize) result.factors = normalize_modes(std::move(result.factors));

    fs::create_directories(a.out);
    auto files = write_factor_csvs(a.out, result.factors);
    MatrixXd trace(static_cast<Eigen::Index>(result.report.objective_trace.size()), 1);
    for (std::size_t k = 0; k < result.report.objective_trace.size(); ++k)
        trace(static_cast<Eigen::Index>(k), 0) = result.report.objective_trace[k];
    write_csv_matrix(fs::path(a.out) / "objective_trace.csv", trace);
    files.push_back("objective_trace.csv");

    json m = base_manifest(args, "fit");
    m.update(factor_manifest(result.factors, result.report));
    m["config"] = {{"input", a.input},       {"rank", a.rank},         {"order", a.order},
                   {"sweeps", a.sweeps},     {"cg_iters", a.cg_iters}, {"ridge", a.ridge},
                   {"tol", a.tol},           {"binary", a.binary},     {"transpose", a.transpose},
                   {"normalize_modes", a.normalize}, {"skip_header", a.skip_header}};
    m["input_digest"] = hex_digest(file_digest(a.input));
    m["outputs"] = files;
    m["fit_wall_time"] = result.report.wall_time;
    m["wall_time"] = seconds_since(start);
    write_json(fs::path(a.out) / "manifest.json", m);
    out << "fit: R=" << cfg.rank << " d=" << cfg.order << " sweeps=" << result.report.sweeps_run
        << " objective=" << (result.report.objective_trace.empty() ? result.report.initial_objective
                                                                    : result.report.objective_trace.back())
        << (result.report.converged ? " (converged)" : "") << "\n";
    return 0;
}

int cmd_synth(const SynthArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    SynthSpec spec;
    if (a.kind == "planted")
        spec.kind = SynthKind::planted_var;
    else if (a.kind == "multires")
        spec.kind = SynthKind::multiresolution;
    else
        throw ParameterError("--kind must be planted or multires");
    spec.N = a.n;
    spec.T = a.t;
    spec.d = a.order;
    spec.R = a.rank;
    spec.switch_t = a.switch_t;
    spec.base_freq = a.base_freq;
    spec.noise_sd = a.noise;
    spec.seed = a.seed;
    spec.hard_splice = a.hard_splice;
    validate(spec);
    if (!a.truth.empty() && spec.kind != SynthKind::planted_var)
        throw ParameterError("--truth only applies to --kind planted");

    std::vector<std::string> files;
    auto write_series = [&](const TimeSeriesMatrix& s) {
        const fs::path path(a.out);
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        if (a.binary)
            write_binary_matrix(path, s.values());
        else
            save_csv(path, s);
        files.push_back(a.out);
    };
    json m = base_manifest(args, "synth");
    if (spec.kind == SynthKind::planted_var) {
        const auto planted = synth_planted_var(spec);
        write_series(planted.series);
        if (!a.truth.empty()) {
            fs::create_directories(a.truth);
            FitReport empty;
            for (const auto& f : write_factor_csvs(a.truth, planted.truth))
                files.push_back((fs::path(a.truth) / f).string());
            write_json(fs::path(a.truth) / "manifest.json", factor_manifest(planted.truth, empty));
            files.push_back((fs::path(a.truth) / "manifest.json").string());
        }
    } else {
        write_series(synth_multiresolution(spec));
    }
    m["config"] = {{"kind", a.kind},         {"n", a.n},       {"t", a.t},         {"order", a.order},
                   {"rank", a.rank},         {"switch_t", a.switch_t},            {"base_freq", a.base_freq},
                   {"noise", a.noise},       {"seed", a.seed}, {"binary", a.binary},
                   {"hard_splice", a.hard_splice}};
    m["output_digest"] = hex_digest(file_digest(a.out));
    m["outputs"] = files;
    m["wall_time"] = seconds_since(start);
    write_json(a.out + ".manifest.json", m);
    out << "synth: wrote " << a.out << " (" << a.n << " x " << a.t << ")\n";
    return 0;
}

int cmd_dmd(const DmdArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    if (a.dt <= 0.0) throw ParameterError("--dt must be positive");
    const auto series = load_input(a.input, a.binary, a.transpose, a.skip_header);
    auto result = fit_dmd(series, a.rank);
    if (a.normalize) result = normalize_modes(std::move(result));
    fs::create_directories(a.out);
    const auto files = write_dmd_csvs(a.out, result, a.dt);
    json m = base_manifest(args, "dmd");
    m.update(dmd_manifest(result, a.dt));
    m["config"] = {{"input", a.input},         {"rank", a.rank},         {"dt", a.dt},
                   {"binary", a.binary},       {"transpose", a.transpose}, {"normalize_modes", a.normalize},
                   {"skip_header", a.skip_header}};
    m["input_digest"] = hex_digest(file_digest(a.input));
    m["outputs"] = files;
    m["wall_time"] = seconds_since(start);
    write_json(fs::path(a.out) / "manifest.json", m);
    out << "dmd: R=" << result.rank << "\n";
    return 0;
}

int cmd_eval(const EvalArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    eval::Options options;
    if (a.suite != "quick" && a.suite != "full") throw ParameterError("--suite must be quick or full");
    options.full = a.suite == "full";
    options.only = a.criteria;
    options.fault = a.fault;
    options.seed = a.seed;
    for (int id : options.only)
        if (id < 1 || id > eval::kCriterionCount) throw ParameterError("unknown criterion " + std::to_string(id));
    if (!options.fault.empty() && options.fault != "update_W")
        throw ParameterError("unknown fault '" + options.fault + "'");

    const auto results = eval::run_suite(options);
    bool all = true;
    for (const auto& r : results) {
        out << eval::summary_line(r) << "\n";
        all = all && r.passed;
    }
    json report = eval::report_json(results, options);
    report["command_line"] = join(args);
    report["versions"] = versions();
    report["wall_time"] = seconds_since(start);
    const fs::path path(a.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_json(path, report);
    return all ? 0 : 1;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Time-varying reduced-rank VAR and DMD toolkit", "tvvar"};
    app.require_subcommand(1);
    app.fallthrough();
    int threads = 0;
    app.add_option("--threads", threads, "worker thread cap (default: all cores)")
        ->envname("TVVAR_THREADS")
        ->check(CLI::NonNegativeNumber);

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "fit the Tucker-factorized time-varying VAR");
    fit_cmd->add_option("--input", fa.input, "series file (CSV rows = variables, or TVM1 binary)")
        ->required()
        ->envname("TVVAR_INPUT");
    fit_cmd->add_option("--rank", fa.rank, "Tucker rank R")->required()->envname("TVVAR_RANK");
    fit_cmd->add_option("--order", fa.order, "VAR order d")->envname("TVVAR_ORDER")->capture_default_str();
    fit_cmd->add_option("--sweeps", fa.sweeps, "maximum sweeps")->envname("TVVAR_SWEEPS")->capture_default_str();
    fit_cmd->add_option("--cg-iters", fa.cg_iters, "CG iterations per V update")
        ->envname("TVVAR_CG_ITERS")
        ->capture_default_str();
    fit_cmd->add_option("--ridge", fa.ridge, "relative ridge for W and G solves")
        ->envname("TVVAR_RIDGE")
        ->capture_default_str();
    fit_cmd->add_option("--tol", fa.tol, "relative objective change for early stop")
        ->envname("TVVAR_TOL")
        ->capture_default_str();
    fit_cmd->add_option("--out", fa.out, "output directory")->required()->envname("TVVAR_OUT");
    fit_cmd->add_flag("--binary", fa.binary, "input is TVM1 binary")->envname("TVVAR_BINARY");
    fit_cmd->add_flag("--transpose", fa.transpose, "input stores time steps as rows")->envname("TVVAR_TRANSPOSE");
    fit_cmd->add_flag("--normalize-modes", fa.normalize, "unit-norm W columns, scale absorbed into G")
        ->envname("TVVAR_NORMALIZE_MODES");
    fit_cmd->add_flag("--skip-header", fa.skip_header, "ignore the first CSV row")->envname("TVVAR_SKIP_HEADER");

    SynthArgs sa;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    synth_cmd->add_option("--kind", sa.kind, "planted | multires")
        ->envname("TVVAR_KIND")
        ->check(CLI::IsMember({"planted", "multires"}))
        ->capture_default_str();
    synth_cmd->add_option("--n", sa.n, "variables")->envname("TVVAR_N")->capture_default_str();
    synth_cmd->add_option("--t", sa.t, "time steps")->envname("TVVAR_T")->capture_default_str();
    synth_cmd->add_option("--order", sa.order, "VAR order (planted)")->envname("TVVAR_ORDER")->capture_default_str();
    synth_cmd->add_option("--rank", sa.rank, "rank / number of patterns")->envname("TVVAR_RANK")->capture_default_str();
    synth_cmd->add_option("--switch-t", sa.switch_t, "frequency switch time (multires)")
        ->envname("TVVAR_SWITCH_T")
        ->capture_default_str();
    synth_cmd->add_option("--base-freq", sa.base_freq, "cycles per step before the switch (multires)")
        ->envname("TVVAR_BASE_FREQ")
        ->capture_default_str();
    synth_cmd->add_option("--noise", sa.noise, "Gaussian noise sd")->envname("TVVAR_NOISE")->capture_default_str();
    synth_cmd->add_option("--seed", sa.seed, "generator seed")->envname("TVVAR_SEED")->capture_default_str();
    synth_cmd->add_option("--out", sa.out, "dataset path")->required()->envname("TVVAR_OUT");
    synth_cmd->add_option("--truth", sa.truth, "directory for planted factors")->envname("TVVAR_TRUTH");
    synth_cmd->add_flag("--binary", sa.binary, "write TVM1 binary instead of CSV")->envname("TVVAR_BINARY");
    synth_cmd->add_flag("--hard-splice", sa.hard_splice, "restart the phase at the switch (multires)")
        ->envname("TVVAR_HARD_SPLICE");

    DmdArgs da;
    auto* dmd_cmd = app.add_subcommand("dmd", "exact dynamic mode decomposition");
    dmd_cmd->add_option("--input", da.input, "series file")->required()->envname("TVVAR_INPUT");
    dmd_cmd->add_option("--rank", da.rank, "truncation rank")->required()->envname("TVVAR_RANK");
    dmd_cmd->add_option("--dt", da.dt, "sampling interval")->envname("TVVAR_DT")->capture_default_str();
    dmd_cmd->add_option("--out", da.out, "output directory")->required()->envname("TVVAR_OUT");
    dmd_cmd->add_flag("--binary", da.binary, "input is TVM1 binary")->envname("TVVAR_BINARY");
    dmd_cmd->add_flag("--transpose", da.transpose, "input stores time steps as rows")->envname("TVVAR_TRANSPOSE");
    dmd_cmd->add_flag("--normalize-modes", da.normalize, "unit-norm mode columns")->envname("TVVAR_NORMALIZE_MODES");
    dmd_cmd->add_flag("--skip-header", da.skip_header, "ignore the first CSV row")->envname("TVVAR_SKIP_HEADER");

    EvalArgs ea;
    auto* eval_cmd = app.add_subcommand("eval", "run the acceptance suite");
    eval_cmd->add_option("--suite", ea.suite, "quick | full")
        ->envname("TVVAR_SUITE")
        ->check(CLI::IsMember({"quick", "full"}))
        ->capture_default_str();
    eval_cmd->add_option("--out", ea.out, "report path")->required()->envname("TVVAR_OUT");
    eval_cmd->add_option("--criteria", ea.criteria)->delimiter(',')->group("")->envname("TVVAR_CRITERIA");
    eval_cmd->add_option("--inject-fault", ea.fault)->group("")->envname("TVVAR_INJECT_FAULT");
    eval_cmd->add_option("--seed", ea.seed)->group("")->envname("TVVAR_EVAL_SEED");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "tvvar: " << e.what() << "\n";
        return 2;
    }

    if (threads > 0) omp_set_num_threads(threads);
    try {
        if (*fit_cmd) return cmd_fit(fa, args, out);
        if (*synth_cmd) return cmd_synth(sa, args, out);
        if (*dmd_cmd) return cmd_dmd(da, args, out);
        return cmd_eval(ea, args, out);
    } catch (const ParameterError& e) {
        err << "tvvar: invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        err << "tvvar: data error: " << e.what() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        err << "tvvar: file error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        err << "tvvar: numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "tvvar: " << e.what() << "\n";
        return 4;
    }
}

} // namespace tvvar
