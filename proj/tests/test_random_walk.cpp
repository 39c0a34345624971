#include <doctest.h>

#include "oracles.hpp"
#include "rwn/error.hpp"
#include "rwn/random_walk.hpp"

using namespace rwn;

namespace {

// Two pixels that always swap.
TransitionMatrix swap_walk() {
    const auto p = build_sparsity(1, 2, 1);
    return TransitionMatrix{p, {1.0, 1.0}, {1.0, 1.0}};
}

double dot(const UnaryPotentials& a, const UnaryPotentials& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return s;
}

} // namespace

TEST_CASE("rw_forward on a swap walk") {
    UnaryPotentials f(2, 2);
    f.values = {1, 0, 0, 1};
    const auto y = rw_forward(swap_walk(), f);
    CHECK(y.values == std::vector<double>{0, 1, 1, 0});
}

TEST_CASE("rw_forward preserves constant potentials") {
    const auto A = oracle::random_walk_matrix(5, 5, 2, 3);
    UnaryPotentials f(25, 3);
    for (std::size_t i = 0; i < 25; ++i) {
        f(i, 0) = 0.5;
        f(i, 1) = 0.25;
        f(i, 2) = -2.0;
    }
    const auto y = rw_forward(A, f);
    for (std::size_t i = 0; i < 25; ++i) {
        CHECK(std::abs(y(i, 0) - 0.5) < 1e-12);
        CHECK(std::abs(y(i, 1) - 0.25) < 1e-12);
        CHECK(std::abs(y(i, 2) + 2.0) < 1e-12);
    }
}

TEST_CASE("rw_forward matches dense matrix product") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto A = oracle::random_walk_matrix(4 + seed % 3, 5, 1 + static_cast<int>(seed % 3), seed);
        const auto f = oracle::random_potentials(A.num_pixels(), 3, seed + 100);
        const auto dense = oracle::matmul(oracle::to_dense(A), oracle::to_dense(f));
        CHECK(oracle::max_abs_diff(dense, rw_forward(A, f)) < 1e-12);
    }
}

TEST_CASE("rw_forward output is a convex combination of neighbors") {
    const auto A = oracle::random_walk_matrix(6, 6, 2, 9);
    const auto f = oracle::random_potentials(36, 2, 4);
    const auto y = rw_forward(A, f);
    const auto& p = *A.pattern;
    for (std::size_t i = 0; i < 36; ++i)
        for (int c = 0; c < 2; ++c) {
            double lo = 1e9, hi = -1e9;
            for (auto j : p.neighbors(i)) {
                lo = std::min(lo, f(static_cast<std::size_t>(j), c));
                hi = std::max(hi, f(static_cast<std::size_t>(j), c));
            }
            CHECK(y(i, c) >= lo - 1e-12);
            CHECK(y(i, c) <= hi + 1e-12);
        }
}

TEST_CASE("rw_forward is linear and zeroes isolated rows") {
    const auto A = oracle::random_walk_matrix(4, 4, 1, 7);
    const auto f = oracle::random_potentials(16, 2, 1);
    const auto g = oracle::random_potentials(16, 2, 2);
    UnaryPotentials mix(16, 2);
    for (std::size_t i = 0; i < mix.values.size(); ++i) mix.values[i] = 2.0 * f.values[i] - 3.0 * g.values[i];
    const auto yf = rw_forward(A, f), yg = rw_forward(A, g), ym = rw_forward(A, mix);
    for (std::size_t i = 0; i < ym.values.size(); ++i)
        CHECK(std::abs(ym.values[i] - (2.0 * yf.values[i] - 3.0 * yg.values[i])) < 1e-12);

    const auto iso = transition(AffinityMatrix{build_sparsity(1, 1, 2), {}});
    UnaryPotentials one(1, 2);
    one.values = {3.0, 4.0};
    CHECK(rw_forward(iso, one).values == std::vector<double>{0.0, 0.0});

    CHECK_THROWS_AS(rw_forward(A, UnaryPotentials(15, 2)), InvalidInput);
}

TEST_CASE("rw_step") {
    const auto A = oracle::random_walk_matrix(5, 4, 2, 11);
    const auto f = oracle::random_potentials(20, 3, 5);
    const auto y = oracle::random_potentials(20, 3, 6);

    CHECK(rw_step(A, f, y, 0.0).values == f.values);
    CHECK(oracle::max_abs_diff(rw_step(A, f, y, 1.0), rw_forward(A, y)) == 0.0);

    const double alpha = 0.3;
    const auto s = rw_step(A, f, y, alpha);
    const auto dense = oracle::add(oracle::scale(oracle::matmul(oracle::to_dense(A), oracle::to_dense(y)), alpha),
                                   oracle::scale(oracle::to_dense(f), 1.0 - alpha));
    CHECK(oracle::max_abs_diff(dense, s) < 1e-12);

    SUBCASE("two unrolled steps match the closed sum") {
        const double a = 0.4;
        const auto y1 = rw_step(A, f, f, a);
        const auto y2 = rw_step(A, f, y1, a);
        const auto Af = oracle::matmul(oracle::to_dense(A), oracle::to_dense(f));
        const auto AAf = oracle::matmul(oracle::to_dense(A), Af);
        // y2 = a^2 A^2 f + (1-a) a A f + (1-a) f
        const auto expect = oracle::add(oracle::add(oracle::scale(AAf, a * a), oracle::scale(Af, (1 - a) * a)),
                                        oracle::scale(oracle::to_dense(f), 1 - a));
        CHECK(oracle::max_abs_diff(expect, y2) < 1e-12);
    }
    CHECK_THROWS_AS(rw_step(A, f, y, -0.1), InvalidInput);
    CHECK_THROWS_AS(rw_step(A, f, y, 1.5), InvalidInput);
}

TEST_CASE("rw_backward_f") {
    UnaryPotentials dY(2, 2);
    dY.values = {1, 2, 3, 4};
    CHECK(rw_backward_f(swap_walk(), dY).values == std::vector<double>{3, 4, 1, 2});

    SUBCASE("adjoint identity <Af, g> = <f, A^T g>") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto A = oracle::random_walk_matrix(5, 6, 2, seed + 20);
            const auto f = oracle::random_potentials(30, 3, seed);
            const auto g = oracle::random_potentials(30, 3, seed + 50);
            const double lhs = dot(rw_forward(A, f), g);
            const double rhs = dot(f, rw_backward_f(A, g));
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
        }
    }
    SUBCASE("finite differences") {
        const auto A = oracle::random_walk_matrix(4, 4, 2, 3);
        auto f = oracle::random_potentials(16, 2, 8);
        const auto g = oracle::random_potentials(16, 2, 9);
        const auto analytic = rw_backward_f(A, g).values;
        const auto numeric = oracle::numeric_gradient([&] { return dot(rw_forward(A, f), g); }, f.values);
        CHECK(oracle::rel_error(analytic, numeric) < 1e-7);
    }
}

TEST_CASE("rw_backward_A") {
    UnaryPotentials dY(2, 1), f(2, 1);
    dY.values = {1.0, 0.0};
    f.values = {0.0, 1.0};
    const auto p = build_sparsity(1, 2, 1);
    CHECK(rw_backward_A(dY, f, *p) == std::vector<double>{1.0, 0.0});

    SUBCASE("finite differences") {
        auto A = oracle::random_walk_matrix(4, 5, 2, 5);
        const auto f2 = oracle::random_potentials(20, 3, 1);
        const auto g = oracle::random_potentials(20, 3, 2);
        const auto analytic = rw_backward_A(g, f2, *A.pattern);
        const auto numeric = oracle::numeric_gradient([&] { return dot(rw_forward(A, f2), g); }, A.a);
        CHECK(oracle::rel_error(analytic, numeric) < 1e-7);
    }
}
