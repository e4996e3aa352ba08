#include "doctest.h"

#include "tvvar/model.hpp"
#include "tvvar/oracle.hpp"
#include "tvvar/random.hpp"
#include "tvvar/synth.hpp"

using namespace tvvar;

namespace {

struct Problem {
    LagPairs<double> pairs;
    FactorSet<double> f;
};

Problem random_problem(std::uint64_t seed, Eigen::Index N, Eigen::Index T, Eigen::Index d, Eigen::Index R) {
    RandomStream rng(seed);
    LagPairs<double> pairs(TimeSeriesMatrix(rng.normal_matrix<double>(N, T)), d);
    FactorSet<double> f;
    f.d = d;
    f.R = R;
    f.W = rng.normal_matrix<double>(N, R);
    f.G = rng.normal_matrix<double>(R, R * R);
    f.V = rng.normal_matrix<double>(d * N, R);
    f.X = rng.normal_matrix<double>(T - d, R);
    return {std::move(pairs), std::move(f)};
}

double rel(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm() / b.norm(); }

} // namespace

TEST_CASE("coefficient matches the explicit core sum") {
    auto [pairs, f] = random_problem(1, 4, 9, 2, 3);
    for (Eigen::Index t = 3; t <= 9; ++t)
        CHECK(rel(coefficient_at(f, t), oracle::tucker_coefficient(f, t)) < 1e-13);
    CHECK_THROWS_AS(coefficient_at(f, 2), ParameterError);
    CHECK_THROWS_AS(coefficient_at(f, 10), ParameterError);
}

TEST_CASE("objective agrees with the matrix form and with coefficients") {
    auto [pairs, f] = random_problem(2, 3, 8, 2, 2);
    const double obj = objective(f, pairs);
    CHECK(obj == doctest::Approx(oracle::matrix_form_objective(f, pairs)).epsilon(1e-12));
    double direct = 0.0;
    for (Eigen::Index i = 0; i < pairs.count(); ++i)
        direct += 0.5 * (pairs.y(i) - coefficient_at(f, i + 3) * pairs.z(i)).squaredNorm();
    CHECK(obj == doctest::Approx(direct).epsilon(1e-12));
    const auto pred = one_step_predict(f, pairs);
    CHECK(0.5 * pred.residuals.squaredNorm() == doctest::Approx(obj).epsilon(1e-12));
}

TEST_CASE("objective is multilinear in each block") {
    auto [pairs, f] = random_problem(3, 3, 7, 1, 2);
    const MatrixXd base = fitted_values(f, pairs);
    auto scaled = f;
    scaled.W *= 2.0;
    CHECK(rel(fitted_values(scaled, pairs), 2.0 * base) < 1e-13);
    scaled = f;
    scaled.V *= -3.0;
    CHECK(rel(fitted_values(scaled, pairs), -3.0 * base) < 1e-13);
    scaled = f;
    scaled.X *= 0.5;
    scaled.G *= 4.0;
    CHECK(rel(fitted_values(scaled, pairs), 2.0 * base) < 1e-13);
}

TEST_CASE("gradients match finite differences") {
    auto [pairs, f] = random_problem(4, 3, 9, 2, 2);
    const auto g = gradients(f, pairs);
    CHECK(rel(g.W, oracle::finite_difference_gradient(f, pairs, oracle::Block::W)) < 1e-6);
    CHECK(rel(g.G, oracle::finite_difference_gradient(f, pairs, oracle::Block::G)) < 1e-6);
    CHECK(rel(g.V, oracle::finite_difference_gradient(f, pairs, oracle::Block::V)) < 1e-6);
    CHECK(rel(g.X, oracle::finite_difference_gradient(f, pairs, oracle::Block::X)) < 1e-6);
}

TEST_CASE("block updates solve their least-squares subproblems") {
    auto [pairs, f] = random_problem(5, 3, 40, 1, 2);
    CHECK(rel(update_W(f, pairs, 0.0), oracle::least_squares_W(f, pairs)) < 1e-8);
    CHECK(rel(update_G(f, pairs, 0.0), oracle::least_squares_G(f, pairs)) < 1e-8);
    CHECK(rel(update_V(f, pairs, 60).V, oracle::least_squares_V(f, pairs)) < 1e-8);
    CHECK(rel(update_X(f, pairs), oracle::least_squares_X(f, pairs)) < 1e-8);
}

TEST_CASE("each block update is a fixed point at its own minimizer") {
    auto [pairs, f] = random_problem(6, 3, 30, 1, 2);
    f.W = update_W(f, pairs, 0.0);
    CHECK(rel(update_W(f, pairs, 0.0), f.W) < 1e-9);
    f.X = update_X(f, pairs);
    CHECK(rel(update_X(f, pairs), f.X) < 1e-9);
    f.V = update_V(f, pairs, 60).V;
    const auto again = update_V(f, pairs, 5);
    CHECK(rel(again.V, f.V) < 1e-8);
}

TEST_CASE("updates never increase the objective") {
    auto [pairs, f] = random_problem(7, 4, 25, 2, 2);
    double prev = objective(f, pairs);
    for (int k = 0; k < 3; ++k) {
        f.G = update_G(f, pairs, 0.0);
        CHECK(objective(f, pairs) <= prev * (1 + 1e-12));
        prev = objective(f, pairs);
        f.W = update_W(f, pairs, 0.0);
        CHECK(objective(f, pairs) <= prev * (1 + 1e-12));
        prev = objective(f, pairs);
        f.V = update_V(f, pairs, 5).V;
        CHECK(objective(f, pairs) <= prev * (1 + 1e-12));
        prev = objective(f, pairs);
        f.X = update_X(f, pairs);
        CHECK(objective(f, pairs) <= prev * (1 + 1e-12));
        prev = objective(f, pairs);
    }
}

TEST_CASE("sylvester operator is symmetric positive semidefinite") {
    auto [pairs, f] = random_problem(8, 3, 12, 2, 2);
    const auto op = sylvester_operator(f, pairs);
    RandomStream rng(80);
    const VectorXd u = rng.normal_matrix<double>(op.dim_in, 1);
    const VectorXd v = rng.normal_matrix<double>(op.dim_in, 1);
    CHECK(u.dot(op(v)) == doctest::Approx(v.dot(op(u))).epsilon(1e-12));
    CHECK(u.dot(op(u)) >= 0.0);
}

TEST_CASE("update_W with zero fitted activity is singular without a ridge") {
    auto [pairs, f] = random_problem(9, 3, 10, 1, 2);
    f.X.setZero();
    CHECK_THROWS_AS(update_W(f, pairs, 0.0), SingularityError);
}

TEST_CASE("normalizing modes keeps every coefficient") {
    auto [pairs, f] = random_problem(10, 4, 10, 1, 3);
    const auto g = normalize_modes(f);
    for (Eigen::Index k = 0; k < 3; ++k) CHECK(g.W.col(k).norm() == doctest::Approx(1.0));
    for (Eigen::Index t = 2; t <= 10; ++t) CHECK(rel(coefficient_at(g, t), coefficient_at(f, t)) < 1e-13);
}

TEST_CASE("config validation names the rank bound") {
    FitConfig cfg;
    cfg.rank = 4;
    try {
        validate_config(cfg, 3, 10);
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("min(N, T-d) = 3") != std::string::npos);
    }
    cfg.rank = 2;
    cfg.sweeps = -1;
    CHECK_THROWS_AS(validate_config(cfg, 3, 10), ParameterError);
}

TEST_CASE("fit with zero sweeps returns the initialization") {
    RandomStream rng(11);
    const auto pairs = lag_embed(TimeSeriesMatrix(rng.normal_matrix<double>(5, 30)), 1);
    FitConfig cfg;
    cfg.rank = 2;
    cfg.sweeps = 0;
    const auto r = fit(pairs, cfg);
    CHECK(r.report.sweeps_run == 0);
    CHECK(r.report.objective_trace.empty());
    const auto init = initialize(pairs, cfg);
    CHECK(r.factors.W == init.W);
    CHECK(r.factors.G == init.G);
    CHECK(r.report.initial_objective == doctest::Approx(objective(init, pairs)));
}

TEST_CASE("fit is deterministic and monotone") {
    RandomStream rng(12);
    const auto pairs = lag_embed(TimeSeriesMatrix(rng.normal_matrix<double>(6, 40)), 2);
    FitConfig cfg;
    cfg.rank = 3;
    cfg.order = 2;
    cfg.sweeps = 15;
    cfg.rel_tol = 0.0;
    cfg.trace_updates = true;
    const auto a = fit(pairs, cfg);
    const auto b = fit(pairs, cfg);
    CHECK(a.factors.W == b.factors.W);
    CHECK(a.factors.X == b.factors.X);
    CHECK(a.report.objective_trace == b.report.objective_trace);
    CHECK(a.report.sweeps_run == 15);
    CHECK(a.report.update_trace.size() == 60);
    double prev = a.report.initial_objective;
    for (double f : a.report.objective_trace) {
        CHECK(f <= prev + 1e-6 * (1 + prev));
        prev = f;
    }
}

TEST_CASE("fit stops early once the objective settles") {
    SynthSpec spec;
    spec.N = 5;
    spec.T = 60;
    spec.R = 2;
    const auto planted = synth_planted_var(spec);
    const auto pairs = lag_embed(planted.series, 1);
    FitConfig cfg;
    cfg.rank = 2;
    cfg.sweeps = 500;
    cfg.rel_tol = 1e-3;
    const auto r = fit(pairs, cfg);
    CHECK(r.report.sweeps_run < 500);
    CHECK(r.report.converged);
}

TEST_CASE("warm start continues from given factors") {
    auto [pairs, f] = random_problem(13, 3, 20, 1, 2);
    FitConfig cfg;
    cfg.rank = 2;
    cfg.sweeps = 1;
    const auto r = fit(pairs, cfg, &f);
    CHECK(r.report.initial_objective == doctest::Approx(objective(f, pairs)));
    auto wrong = f;
    wrong.R = 3;
    CHECK_THROWS(fit(pairs, cfg, &wrong));
}

// Noiseless data pins down A_t only along z_t: any V (with matching X) fits
// exactly while producing a different coefficient matrix.
TEST_CASE("coefficients are not identified by noiseless pairs") {
    SynthSpec spec;
    spec.N = 6;
    spec.T = 40;
    spec.R = 2;
    spec.seed = 3;
    const auto planted = synth_planted_var(spec);
    const auto pairs = lag_embed(planted.series, 1);
    auto other = planted.truth;
    RandomStream rng(99);
    other.V += 0.5 * rng.normal_matrix<double>(other.V.rows(), other.V.cols());
    other.X = update_X(other, pairs);
    CHECK(objective(other, pairs) <= 1e-20 * data_energy(pairs));
    double coef_gap = 0.0;
    for (Eigen::Index t = 2; t <= spec.T; ++t)
        coef_gap = std::max(coef_gap, rel(coefficient_at(other, t), coefficient_at(planted.truth, t)));
    CHECK(coef_gap > 0.1);
    for (Eigen::Index i = 0; i < pairs.count(); ++i) {
        const VectorXd z = pairs.z(i);
        const VectorXd a = coefficient_at(other, i + 2) * z;
        const VectorXd b = coefficient_at(planted.truth, i + 2) * z;
        CHECK((a - b).norm() <= 1e-8 * std::max(b.norm(), 1e-300) + 1e-300);
    }
}
