#include "tvvar/eval.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "tvvar/dmd.hpp"
#include "tvvar/model.hpp"
#include "tvvar/oracle.hpp"
#include "tvvar/random.hpp"
#include "tvvar/synth.hpp"

namespace tvvar::eval {

namespace {

struct Instance {
    LagPairs<double> pairs;
    FactorSet<double> factors;
};

Eigen::Index uniform_int(RandomStream& rng, Eigen::Index lo, Eigen::Index hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<Eigen::Index>(rng.next_u64() % span);
}

Instance random_instance(RandomStream& rng, Eigen::Index N, Eigen::Index T, Eigen::Index d, Eigen::Index R) {
    const TimeSeriesMatrix series(rng.normal_matrix(N, T));
    LagPairs<double> pairs(series, d);
    FactorSet<double> f;
    f.d = d;
    f.R = R;
    f.W = rng.normal_matrix(N, R);
    f.G = rng.normal_matrix(R, R * R);
    f.V = rng.normal_matrix(d * N, R);
    f.X = rng.normal_matrix(T - d, R);
    return {std::move(pairs), std::move(f)};
}

double relative_error(const MatrixXd& actual, const MatrixXd& expected) {
    return (actual - expected).norm() / std::max(expected.norm(), 1e-300);
}

double peak_rss_bytes() {
    rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    return static_cast<double>(usage.ru_maxrss) * 1024.0;
}

// ---------------------------------------------------------------------------

void kronecker_identities(CriterionResult& r, const Options& o) {
    RandomStream rng = RandomStream(o.seed).split(1);
    constexpr int kInstances = 200;
    double worst_vt = 0.0;
    double worst_zx = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        const Eigen::Index dN = uniform_int(rng, 1, 12);
        const Eigen::Index R = uniform_int(rng, 1, 4);
        const VectorXd x = rng.normal_matrix(R, 1);
        const MatrixXd V = rng.normal_matrix(dN, R);
        const VectorXd z = rng.normal_matrix(dN, 1);
        worst_vt = std::max(worst_vt, (kron_apply_vt_z(x, V, z) - oracle::dense_vt_z(x, V, z)).cwiseAbs().maxCoeff());
        const VectorXd y = rng.normal_matrix(R * R, 1);
        worst_zx = std::max(worst_zx,
                            (kron_apply_zx_I(z, x, y, R) - oracle::dense_zx_I(z, x, y, R)).cwiseAbs().maxCoeff());
    }
    r.measured = {{"instances", kInstances}, {"max_abs_error_vt_z", worst_vt}, {"max_abs_error_zx_I", worst_zx},
                  {"tolerance", 1e-12}};
    r.passed = worst_vt <= 1e-12 && worst_zx <= 1e-12;
}

void objective_equivalence(CriterionResult& r, const Options& o) {
    RandomStream rng = RandomStream(o.seed).split(2);
    constexpr int kInstances = 50;
    double worst = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        const Eigen::Index d = uniform_int(rng, 1, 2);
        const Eigen::Index N = uniform_int(rng, 1, 4);
        const Eigen::Index T = uniform_int(rng, d + 1, 10);
        const Eigen::Index R = uniform_int(rng, 1, std::min(N, T - d));
        const auto inst = random_instance(rng, N, T, d, R);
        const double vector_form = objective(inst.factors, inst.pairs);
        const double matrix_form = oracle::matrix_form_objective(inst.factors, inst.pairs);
        worst = std::max(worst, std::abs(vector_form - matrix_form) / std::max(std::abs(matrix_form), 1e-300));
    }
    r.measured = {{"instances", kInstances}, {"max_relative_error", worst}, {"tolerance", 1e-10}};
    r.passed = worst <= 1e-10;
}

void gradient_suite(CriterionResult& r, const Options& o) {
    RandomStream rng = RandomStream(o.seed).split(3);
    constexpr int kPoints = 10;
    double worst_W = 0.0;
    double worst_G = 0.0;
    double worst_X = 0.0;
    for (int i = 0; i < kPoints; ++i) {
        const Eigen::Index d = uniform_int(rng, 1, 2);
        const Eigen::Index N = uniform_int(rng, 1, 4);
        const Eigen::Index T = uniform_int(rng, d + 2, 12);
        const Eigen::Index R = uniform_int(rng, 1, std::min<Eigen::Index>(3, std::min(N, T - d)));
        const auto inst = random_instance(rng, N, T, d, R);
        const auto g = gradients(inst.factors, inst.pairs);
        worst_W = std::max(worst_W, relative_error(g.W, oracle::finite_difference_gradient(
                                                            inst.factors, inst.pairs, oracle::Block::W)));
        worst_G = std::max(worst_G, relative_error(g.G, oracle::finite_difference_gradient(
                                                            inst.factors, inst.pairs, oracle::Block::G)));
        worst_X = std::max(worst_X, relative_error(g.X, oracle::finite_difference_gradient(
                                                            inst.factors, inst.pairs, oracle::Block::X)));
    }
    r.measured = {{"points_per_block", kPoints},
                  {"max_relative_error_W", worst_W},
                  {"max_relative_error_G", worst_G},
                  {"max_relative_error_X", worst_X},
                  {"step", 1e-6},
                  {"tolerance", 1e-5}};
    r.passed = worst_W <= 1e-5 && worst_G <= 1e-5 && worst_X <= 1e-5;
}

void subproblem_oracles(CriterionResult& r, const Options& o) {
    RandomStream rng = RandomStream(o.seed).split(4);
    constexpr int kInstances = 20;
    double worst[4] = {0, 0, 0, 0};
    double worst_v_exact_count = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        Eigen::Index d = 0;
        Eigen::Index N = 0;
        Eigen::Index R = 0;
        do {
            d = uniform_int(rng, 1, 2);
            N = uniform_int(rng, 1, 6);
            R = uniform_int(rng, 1, std::min<Eigen::Index>(N, 4));
        } while (d * N * R > 30);
        // Enough pairs for every subproblem to be overdetermined.
        const Eigen::Index T = d + std::max<Eigen::Index>(12, 3 * d * R + R * R * R);
        const auto inst = random_instance(rng, N, T, d, R);
        const auto& f = inst.factors;
        const auto& p = inst.pairs;

        MatrixXd W = update_W(f, p, 0.0);
        if (o.fault == "update_W") W.array() += 1e-3 * W.norm() / std::sqrt(static_cast<double>(W.size()));
        worst[0] = std::max(worst[0], relative_error(W, oracle::least_squares_W(f, p)));
        worst[1] = std::max(worst[1], relative_error(update_G(f, p, 0.0), oracle::least_squares_G(f, p)));
        // dN*R steps terminate only in exact arithmetic; run CG to its residual floor instead.
        const int dim = static_cast<int>(d * N * R);
        const MatrixXd V_ls = oracle::least_squares_V(f, p);
        worst[2] = std::max(worst[2], relative_error(update_V(f, p, 10 * dim).V, V_ls));
        worst_v_exact_count = std::max(worst_v_exact_count, relative_error(update_V(f, p, dim).V, V_ls));
        worst[3] = std::max(worst[3], relative_error(update_X(f, p), oracle::least_squares_X(f, p)));
    }
    r.measured = {{"instances", kInstances},
                  {"max_relative_error_W", worst[0]},
                  {"max_relative_error_G", worst[1]},
                  {"max_relative_error_V", worst[2]},
                  {"max_relative_error_X", worst[3]},
                  {"max_relative_error_V_dNR_iterations", worst_v_exact_count},
                  {"tolerance", 1e-6}};
    if (!o.fault.empty()) r.measured["fault"] = o.fault;
    r.passed = std::all_of(std::begin(worst), std::end(worst), [](double e) { return e <= 1e-6; });
    if (!r.passed) {
        const char* names[] = {"update_W", "update_G", "update_V", "update_X"};
        for (int k = 0; k < 4; ++k)
            if (worst[k] > 1e-6) r.detail += std::string(r.detail.empty() ? "" : ", ") + names[k] + " mismatch";
    }
}

// Largest f_{k+1} - f_k - slack * (1 + f_k) over the trace (<= 0 means monotone).
double worst_increase(const FitReport& report, double slack) {
    double worst = -std::numeric_limits<double>::infinity();
    double previous = report.initial_objective;
    for (double f : report.objective_trace) {
        worst = std::max(worst, (f - previous) / (1.0 + previous) - slack);
        previous = f;
    }
    return worst;
}

void monotone_descent(CriterionResult& r, const Options& o) {
    RandomStream rng = RandomStream(o.seed).split(5);
    constexpr int kInstances = 100;
    constexpr int kSweeps = 10;
    double worst_default = -std::numeric_limits<double>::infinity();
    double worst_full = -std::numeric_limits<double>::infinity();
    int failures = 0;
    for (int i = 0; i < kInstances; ++i) {
        const Eigen::Index d = uniform_int(rng, 1, 2);
        const Eigen::Index N = uniform_int(rng, 1, 8);
        const Eigen::Index T = uniform_int(rng, d + 6, 40);
        const Eigen::Index R = uniform_int(rng, 1, std::min<Eigen::Index>(4, std::min(N, T - d)));
        const TimeSeriesMatrix series(rng.normal_matrix(N, T));
        const auto pairs = lag_embed(series, d);
        FitConfig cfg;
        cfg.rank = R;
        cfg.order = d;
        cfg.sweeps = kSweeps;
        cfg.rel_tol = 0.0;
        try {
            const auto a = fit(pairs, cfg);
            worst_default = std::max(worst_default, worst_increase(a.report, 1e-6));
            cfg.cg_iters = static_cast<int>(d * N * R);
            const auto b = fit(pairs, cfg);
            worst_full = std::max(worst_full, worst_increase(b.report, 1e-10));
        } catch (const std::exception& e) {
            ++failures;
            if (r.detail.empty()) r.detail = std::string("instance ") + std::to_string(i) + ": " + e.what();
        }
    }
    r.measured = {{"instances", kInstances},
                  {"sweeps", kSweeps},
                  {"max_excess_default_cg", worst_default},
                  {"max_excess_full_cg", worst_full},
                  {"slack_default_cg", 1e-6},
                  {"slack_full_cg", 1e-10},
                  {"failed_fits", failures}};
    r.passed = failures == 0 && worst_default <= 0.0 && worst_full <= 0.0;
}

void planted_recovery(CriterionResult& r, const Options& o) {
    constexpr int kSeeds = 5;
    double best_ratio = std::numeric_limits<double>::infinity();
    double best_coef_error = std::numeric_limits<double>::infinity();
    double best_action_error = 0.0;
    int best_seed = -1;
    nlohmann::json runs = nlohmann::json::array();
    for (int s = 0; s < kSeeds; ++s) {
        SynthSpec spec;
        spec.N = 10;
        spec.T = 200;
        spec.d = 1;
        spec.R = 3;
        spec.noise_sd = 0.0;
        spec.seed = o.seed + static_cast<std::uint64_t>(s);
        const auto planted = synth_planted_var(spec);
        const auto pairs = lag_embed(planted.series, spec.d);
        FitConfig cfg;
        cfg.rank = spec.R;
        cfg.order = spec.d;
        cfg.sweeps = 50;
        const auto result = fit(pairs, cfg);
        const double final_objective =
            result.report.objective_trace.empty() ? result.report.initial_objective : result.report.objective_trace.back();
        const double ratio = final_objective / data_energy(pairs);
        double coef_error = 0.0;
        double action_error = 0.0;
        for (Eigen::Index t = spec.d + 1; t <= spec.T; ++t) {
            const MatrixXd truth = coefficient_at(planted.truth, t);
            const MatrixXd estimate = coefficient_at(result.factors, t);
            coef_error = std::max(coef_error, relative_error(estimate, truth));
            const VectorXd z = pairs.z(t - spec.d - 1);
            action_error = std::max(action_error, relative_error(estimate * z, truth * z));
        }
        runs.push_back({{"seed", spec.seed},
                        {"sweeps_run", result.report.sweeps_run},
                        {"objective_ratio", ratio},
                        {"max_coefficient_rel_error", coef_error},
                        {"max_action_rel_error", action_error}});
        if (ratio < best_ratio) {
            best_ratio = ratio;
            best_coef_error = coef_error;
            best_action_error = action_error;
            best_seed = s;
        }
    }
    r.measured = {{"runs", runs},
                  {"best_run", best_seed},
                  {"best_objective_ratio", best_ratio},
                  {"best_max_coefficient_rel_error", best_coef_error},
                  {"best_max_action_rel_error", best_action_error},
                  {"objective_tolerance", 1e-6},
                  {"coefficient_tolerance", 1e-3}};
    const bool objective_ok = best_ratio <= 1e-6;
    const bool coefficient_ok = best_coef_error <= 1e-3;
    r.passed = objective_ok && coefficient_ok;
    if (!coefficient_ok)
        r.detail = "A_t not recovered: noiseless pairs fix A_t only along z_t (x_t has R free entries and "
                   "y_t spans R dimensions); see best_max_action_rel_error for the identified part";
}

SynthSpec multires_spec(const Options& o) {
    SynthSpec spec;
    spec.kind = SynthKind::multiresolution;
    spec.N = 200;
    spec.T = 100;
    spec.d = 1;
    spec.R = 3;
    spec.switch_t = 50;
    spec.base_freq = 1.0 / 30.0;
    spec.seed = o.seed;
    return spec;
}

struct SegmentFrequencies {
    double first = 0.0;
    double second = 0.0;
};

// Rows of X are times t = d+1..T; column index (0-based) t-1 = d + row.
SegmentFrequencies temporal_mode_frequencies(const VectorXd& mode, Eigen::Index d, Eigen::Index switch_t) {
    const Eigen::Index split = switch_t - d;
    return {oracle::dominant_frequency(mode.head(split)), oracle::dominant_frequency(mode.tail(mode.size() - split))};
}

void frequency_transition(CriterionResult& r, const Options& o) {
    const auto spec = multires_spec(o);
    const auto series = synth_multiresolution(spec);
    const auto pairs = lag_embed(series, spec.d);
    FitConfig cfg;
    cfg.rank = spec.R;
    cfg.order = spec.d;
    const auto result = fit(pairs, cfg);
    nlohmann::json modes = nlohmann::json::array();
    for (Eigen::Index k = 0; k < cfg.rank; ++k) {
        const auto fr = temporal_mode_frequencies(result.factors.X.col(k), spec.d, spec.switch_t);
        modes.push_back({{"mode", k}, {"freq_before", fr.first}, {"freq_after", fr.second},
                         {"ratio", fr.second / fr.first}});
    }
    const double ratio = modes[0]["ratio"].get<double>();
    r.measured = {{"N", spec.N},          {"T", spec.T},         {"switch_t", spec.switch_t},
                  {"base_freq", spec.base_freq}, {"rank", cfg.rank}, {"sweeps_run", result.report.sweeps_run},
                  {"leading_mode_ratio", ratio}, {"modes", modes},  {"ratio_band", {1.7, 2.3}}};
    r.passed = ratio >= 2.0 * 0.85 && ratio <= 2.0 * 1.15;
}

void dmd_baseline(CriterionResult& r, const Options& o) {
    // Part 1: noiseless rank-2 linear dynamics embedded in 20 variables.
    RandomStream rng = RandomStream(o.seed).split(8);
    const Eigen::Index N = 20;
    const Eigen::Index T = 40;
    const double angle = 2.0 * std::numbers::pi * 0.1;
    const double radius = 0.95;
    Eigen::Matrix2d latent;
    latent << radius * std::cos(angle), -radius * std::sin(angle), radius * std::sin(angle), radius * std::cos(angle);
    const MatrixXd basis = detail::orthonormal_basis<double>(rng.normal_matrix(N, 2));
    MatrixXd S(N, T);
    Eigen::Vector2d a(1.0, 0.5);
    for (Eigen::Index t = 0; t < T; ++t) {
        S.col(t) = basis * a;
        a = latent * a;
    }
    const TimeSeriesMatrix linear(S);
    const auto result = fit_dmd(linear, 2);
    const std::complex<double> expected = std::polar(radius, angle);
    double eig_error = 0.0;
    for (Eigen::Index k = 0; k < 2; ++k) {
        const auto& lambda = result.eigenvalues(k);
        eig_error = std::max(eig_error, std::min(std::abs(lambda - expected), std::abs(lambda - std::conj(expected))));
    }
    const bool conjugate_pair = std::abs(result.eigenvalues(0) - std::conj(result.eigenvalues(1))) <= 1e-10;
    const double recon = relative_error(dmd_reconstruct(result), S.leftCols(T - 1));
    const double recon_next = relative_error(dmd_reconstruct_next(result), S.rightCols(T - 1));

    // Part 2: the multiresolution dataset; DMD frequencies are fixed per mode.
    const auto spec = multires_spec(o);
    const auto series = synth_multiresolution(spec);
    const Eigen::Index T2 = series.T();
    const auto sv = truncated_svd(series.values().leftCols(T2 - 1), std::min<Eigen::Index>(7, std::min(spec.N, T2 - 1))).s;
    Eigen::Index numeric_rank = 0;
    while (numeric_rank < sv.size() && sv(numeric_rank) > 1e-10 * sv(0)) ++numeric_rank;
    const auto multires = fit_dmd(series, numeric_rank);
    const auto freqs = dmd_frequency_report(multires, 1.0);
    const SegmentFrequencies data{oracle::dominant_frequency(series.values().row(0).head(spec.switch_t).transpose()),
                                  oracle::dominant_frequency(series.values().row(0).tail(T2 - spec.switch_t).transpose())};
    bool single_mode_matches_both = false;
    double worst_invariance = 0.0;
    nlohmann::json modes = nlohmann::json::array();
    for (Eigen::Index k = 0; k < multires.rank; ++k) {
        const double fk = std::abs(freqs[static_cast<std::size_t>(k)].frequency);
        const bool m1 = std::abs(fk - data.first) <= 0.15 * data.first;
        const bool m2 = std::abs(fk - data.second) <= 0.15 * data.second;
        single_mode_matches_both = single_mode_matches_both || (m1 && m2);
        for (Eigen::Index t = 0; t + 1 < multires.temporal.rows(); ++t) {
            if (std::abs(multires.temporal(t, k)) == 0.0) continue;
            const auto step = multires.temporal(t + 1, k) / multires.temporal(t, k);
            worst_invariance = std::max(worst_invariance, std::abs(step - multires.eigenvalues(k)));
        }
        modes.push_back({{"mode", k}, {"frequency", fk}, {"matches_first_segment", m1}, {"matches_second_segment", m2}});
    }
    r.measured = {{"linear_eigenvalue_max_error", eig_error},
                  {"linear_conjugate_pair", conjugate_pair},
                  {"linear_reconstruction_rel_error", recon},
                  {"linear_next_reconstruction_rel_error", recon_next},
                  {"multires_dmd_rank", numeric_rank},
                  {"multires_data_freq_before", data.first},
                  {"multires_data_freq_after", data.second},
                  {"multires_dmd_modes", modes},
                  {"dmd_frequencies_time_invariant", worst_invariance <= 1e-10},
                  {"dmd_single_mode_matches_both_segments", single_mode_matches_both}};
    r.passed = eig_error <= 1e-8 && conjugate_pair && recon <= 1e-6 && recon_next <= 1e-6 &&
               worst_invariance <= 1e-10 && !single_mode_matches_both;
}

void scale_sanity(CriterionResult& r, const Options& o) {
    SynthSpec spec;
    spec.N = 5380;
    spec.T = 4380;
    spec.d = 1;
    spec.R = 4;
    spec.noise_sd = 1.0;
    spec.seed = o.seed;
    const auto start = std::chrono::steady_clock::now();
    const auto planted = synth_planted_var(spec);
    const auto pairs = lag_embed(planted.series, spec.d);
    FitConfig cfg;
    cfg.rank = spec.R;
    cfg.order = spec.d;
    cfg.sweeps = 10;
    cfg.rel_tol = 0.0;
    const auto result = fit(pairs, cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double rss = peak_rss_bytes();
    r.measured = {{"N", spec.N},
                  {"T", spec.T},
                  {"R", spec.R},
                  {"sweeps_run", result.report.sweeps_run},
                  {"fit_wall_time_s", result.report.wall_time},
                  {"total_wall_time_s", wall},
                  {"peak_rss_bytes", rss},
                  {"memory_limit_bytes", 8.0 * 1024 * 1024 * 1024},
                  {"final_objective_ratio", result.report.objective_trace.back() / data_energy(pairs)}};
    r.passed = result.report.sweeps_run == 10 && rss <= 8.0 * 1024 * 1024 * 1024 && wall < 1800.0;
}

struct Entry {
    const char* name;
    double limit;
    void (*run)(CriterionResult&, const Options&);
};

constexpr Entry kCriteria[kCriterionCount] = {
    {"Kronecker identity suite", 5.0, kronecker_identities},
    {"objective equivalence (matrix form)", 5.0, objective_equivalence},
    {"gradient suite", 10.0, gradient_suite},
    {"subproblem oracle equivalence", 20.0, subproblem_oracles},
    {"monotone descent", 60.0, monotone_descent},
    {"planted recovery", 60.0, planted_recovery},
    {"frequency-transition reproduction", 120.0, frequency_transition},
    {"DMD baseline correctness", 30.0, dmd_baseline},
    {"scale sanity (5380 x 4380, R=4)", 1800.0, scale_sanity},
};

} // namespace

CriterionResult run_criterion(int id, const Options& options) {
    if (id < 1 || id > kCriterionCount) throw ParameterError("unknown criterion " + std::to_string(id));
    const Entry& entry = kCriteria[id - 1];
    CriterionResult r;
    r.id = id;
    r.name = entry.name;
    r.runtime_limit = entry.limit;
    const auto start = std::chrono::steady_clock::now();
    try {
        entry.run(r, options);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.runtime >= r.runtime_limit) {
        r.passed = false;
        r.detail += (r.detail.empty() ? "" : "; ") + std::string("runtime budget exceeded");
    }
    return r;
}

std::vector<CriterionResult> run_suite(const Options& options) {
    std::vector<int> ids = options.only;
    if (ids.empty())
        for (int id = 1; id <= kCriterionCount; ++id)
            if (id != 9 || options.full) ids.push_back(id);
    std::vector<CriterionResult> results;
    for (int id : ids) {
        results.push_back(run_criterion(id, options));
        if (options.verbose) std::fprintf(stderr, "%s\n", summary_line(results.back()).c_str());
    }
    return results;
}

nlohmann::json report_json(const std::vector<CriterionResult>& results, const Options& options) {
    nlohmann::json criteria = nlohmann::json::array();
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
        criteria.push_back({{"id", r.id},
                            {"name", r.name},
                            {"passed", r.passed},
                            {"runtime_s", r.runtime},
                            {"runtime_limit_s", r.runtime_limit},
                            {"measured", r.measured},
                            {"detail", r.detail}});
    }
    return {{"suite", options.full ? "full" : "quick"},
            {"seed", options.seed},
            {"passed", all},
            {"criteria", criteria}};
}

std::string check_report_schema(const nlohmann::json& report) {
    if (!report.is_object()) return "report is not an object";
    if (!report.contains("suite") || !report["suite"].is_string()) return "missing string 'suite'";
    if (!report.contains("passed") || !report["passed"].is_boolean()) return "missing boolean 'passed'";
    if (!report.contains("criteria") || !report["criteria"].is_array()) return "missing array 'criteria'";
    bool all = true;
    for (const auto& c : report["criteria"]) {
        if (!c.is_object()) return "criterion entry is not an object";
        if (!c.contains("id") || !c["id"].is_number_integer()) return "criterion missing integer 'id'";
        if (!c.contains("name") || !c["name"].is_string()) return "criterion missing string 'name'";
        if (!c.contains("passed") || !c["passed"].is_boolean()) return "criterion missing boolean 'passed'";
        if (!c.contains("runtime_s") || !c["runtime_s"].is_number()) return "criterion missing number 'runtime_s'";
        if (!c.contains("runtime_limit_s") || !c["runtime_limit_s"].is_number())
            return "criterion missing number 'runtime_limit_s'";
        if (!c.contains("measured") || !c["measured"].is_object()) return "criterion missing object 'measured'";
        if (!c.contains("detail") || !c["detail"].is_string()) return "criterion missing string 'detail'";
        all = all && c["passed"].get<bool>();
    }
    if (report["passed"].get<bool>() != all) return "'passed' disagrees with the criteria";
    return {};
}

std::string summary_line(const CriterionResult& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s [%d] %s (%.2f s / %.0f s)", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.runtime, r.runtime_limit);
    std::string out = buf;
    if (!r.detail.empty()) out += " -- " + r.detail;
    return out;
}

} // namespace tvvar::eval
