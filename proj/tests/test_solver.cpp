#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "rwn/error.hpp"
#include "rwn/random_walk.hpp"
#include "rwn/solver.hpp"

using namespace rwn;

namespace {

SolverConfig config(double alpha, SolverMode mode = SolverMode::iterate, double tol = 1e-12) {
    SolverConfig c;
    c.alpha = alpha;
    c.tolerance = tol;
    c.mode = mode;
    return c;
}

TransitionMatrix two_node(double p) {
    const auto pat = build_sparsity(1, 2, 1);
    return TransitionMatrix{pat, {1.0, 1.0}, {p, p}};
}

} // namespace

TEST_CASE("alpha = 0 returns f") {
    const auto A = oracle::random_walk_matrix(4, 4, 2, 1);
    const auto f = oracle::random_potentials(16, 3, 2);
    for (auto mode : {SolverMode::iterate, SolverMode::neumann, SolverMode::dense_oracle})
        CHECK(oracle::max_abs_diff(solve(A, f, config(0.0, mode)).y, f) < 1e-15);
    const auto r0 = diffuse_to_convergence(A, f, config(0.0));
    CHECK(r0.y.values == f.values);
    CHECK(r0.iterations == 1);
    UnaryPotentials flat(16, 3);
    for (std::size_t i = 0; i < 16; ++i) flat.row(i)[1] = 0.7;
    CHECK(oracle::max_abs_diff(diffuse_to_convergence(A, flat, config(0.6)).y, flat) < 1e-12);
}

TEST_CASE("two-node swap walk at alpha = 0.5") {
    UnaryPotentials f(2, 1);
    f.values = {1.0, 0.0};
    const auto A = two_node(1.0);
    // (I - 0.5 A)^-1 = (1/0.75)[[1, 0.5], [0.5, 1]]
    const auto dense = dense_oracle_solve(A, f, 0.5);
    CHECK(dense.values[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(dense.values[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    const auto it = diffuse_to_convergence(A, f, config(0.5));
    CHECK(it.y.values[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(it.y.values[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    const auto ne = solve_closed_form(A, f, config(0.5));
    CHECK(oracle::max_abs_diff(ne.y, dense) < 1e-10);
}

TEST_CASE("all modes agree with an elimination oracle") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const double alpha = seed % 3 == 0 ? 0.01 : (seed % 3 == 1 ? 0.5 : 0.9);
        const auto A = oracle::random_walk_matrix(5, 4 + seed % 3, 1 + static_cast<int>(seed % 3), seed);
        const auto f = oracle::random_potentials(A.num_pixels(), 3, seed + 7);
        const auto exact = oracle::closed_form(A, f, alpha);
        CHECK(oracle::max_abs_diff(exact, dense_oracle_solve(A, f, alpha)) < 1e-10);
        for (auto mode : {SolverMode::iterate, SolverMode::neumann})
            CHECK(oracle::max_abs_diff(exact, solve(A, f, config(alpha, mode)).y) < 1e-9);
    }
}

TEST_CASE("converged diffusion and closed form share the argmax") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto A = oracle::random_walk_matrix(6, 6, 1 + static_cast<int>(seed % 4), seed + 300);
        const auto f = oracle::random_potentials(36, 4, seed + 400);
        const double alpha = 0.01 + 0.9 * static_cast<double>(seed % 10) / 10.0;
        const auto it = diffuse_to_convergence(A, f, config(alpha));
        const auto exact = dense_oracle_solve(A, f, alpha);
        CHECK(argmax(it.y, 6, 6).labels == argmax(exact, 6, 6).labels);
        CHECK(fixed_point_residual(A, f, it.y, alpha) < 1e-9);
    }
}

TEST_CASE("single pixel graph") {
    const auto A = transition(AffinityMatrix{build_sparsity(1, 1, 3), {}});
    UnaryPotentials f(1, 2);
    f.values = {0.2, 0.8};
    const auto it = diffuse_to_convergence(A, f, config(0.5));
    CHECK(it.y.values[0] == doctest::Approx(0.1));
    CHECK(it.y.values[1] == doctest::Approx(0.4));
    CHECK(dense_oracle_solve(A, f, 0.5).values == f.values);
}

TEST_CASE("tolerance contract on the fixed-point residual") {
    const auto A = oracle::random_walk_matrix(8, 8, 3, 5);
    const auto f = oracle::random_potentials(64, 3, 6);
    for (double alpha : {0.01, 0.5, 0.9}) {
        const auto cfg = config(alpha, SolverMode::iterate, 1e-6);
        const auto r = diffuse_to_convergence(A, f, cfg);
        // residual = alpha * |A(y_k - y_{k-1})| <= alpha * last change
        CHECK(fixed_point_residual(A, f, r.y, alpha) <= cfg.tolerance);
        CHECK(r.iterations >= 1);
    }
}

TEST_CASE("solver errors") {
    const auto A = oracle::random_walk_matrix(4, 4, 2, 5);
    const auto f = oracle::random_potentials(16, 3, 6);
    CHECK_THROWS_AS(config(1.0).validate(), InvalidInput);
    CHECK_THROWS_AS(config(-0.1).validate(), InvalidInput);
    CHECK_THROWS_AS(config(0.5, SolverMode::iterate, 0.0).validate(), InvalidInput);
    CHECK_THROWS_AS(diffuse_to_convergence(A, f, config(1.0)), InvalidInput);

    auto tight = config(0.99, SolverMode::iterate, 1e-14);
    tight.max_iterations = 3;
    try {
        diffuse_to_convergence(A, f, tight);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.iterations() == 3);
        CHECK(e.residual() > 0.0);
    }
    CHECK_THROWS_AS(solve_closed_form(A, f, tight), ConvergenceError);

    const auto big = oracle::random_walk_matrix(65, 64, 1, 1);
    CHECK_THROWS_AS(dense_oracle_solve(big, UnaryPotentials(big.num_pixels(), 2), 0.5), InvalidInput);
    CHECK_THROWS_AS(dense_oracle_solve(A, UnaryPotentials(15, 2), 0.5), InvalidInput);
}

TEST_CASE("bench report") {
    BenchOptions opt;
    opt.min_step_window_ms = 1.0;
    const auto report = bench_step_vs_solve({{8, 8}, {12, 10}}, 2, SolverConfig{}, opt);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].n_pixels == 64);
    CHECK(report.rows[1].n_pixels == 120);
    CHECK(report.rows[0].nnz == build_sparsity(8, 8, 2)->num_edges());
    for (const auto& r : report.rows) {
        CHECK(r.step_ms > 0.0);
        CHECK(r.solve_ms > 0.0);
        CHECK(r.dense_ms.has_value());
        CHECK(r.iters >= 1);
    }
    std::istringstream csv(report.to_csv());
    std::string line;
    std::getline(csv, line);
    CHECK(line == "n_pixels,radius,nnz,step_ms,solve_ms,dense_ms,iters");
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
}
