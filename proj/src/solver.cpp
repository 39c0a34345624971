#include "rwn/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "rwn/error.hpp"
#include "rwn/random_walk.hpp"

namespace rwn {
namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void check_shapes(const TransitionMatrix& A, const UnaryPotentials& f) {
    if (f.num_pixels != A.num_pixels())
        throw InvalidInput("solver: potentials do not match the transition matrix");
}

} // namespace

void SolverConfig::validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw InvalidInput("solver alpha must satisfy 0 <= alpha < 1, got " + std::to_string(alpha));
    if (!(tolerance > 0.0)) throw InvalidInput("solver tolerance must be positive");
}

DiffusionResult diffuse_to_convergence(const TransitionMatrix& A, const UnaryPotentials& f,
                                       const SolverConfig& cfg) {
    cfg.validate();
    check_shapes(A, f);
    UnaryPotentials y = f;
    double change = 0.0;
    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        UnaryPotentials next = rw_step(A, f, y, cfg.alpha);
        change = 0.0;
        for (std::size_t i = 0; i < next.values.size(); ++i)
            change = std::max(change, std::abs(next.values[i] - y.values[i]));
        y = std::move(next);
        if (change < cfg.tolerance) return {std::move(y), it};
    }
    throw ConvergenceError("diffusion did not converge within " + std::to_string(cfg.max_iterations) +
                               " iterations (last change " + std::to_string(change) + ")",
                           change, cfg.max_iterations);
}

DiffusionResult solve_closed_form(const TransitionMatrix& A, const UnaryPotentials& f,
                                  const SolverConfig& cfg) {
    cfg.validate();
    check_shapes(A, f);
    UnaryPotentials y = f;
    UnaryPotentials term = f;
    double size = max_abs(term.values);
    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        term = rw_forward(A, term);
        for (double& v : term.values) v *= cfg.alpha;
        for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += term.values[i];
        size = max_abs(term.values);
        if (size < cfg.tolerance) return {std::move(y), it};
    }
    throw ConvergenceError("Neumann series did not converge within " + std::to_string(cfg.max_iterations) +
                               " terms (last term " + std::to_string(size) + ")",
                           size, cfg.max_iterations);
}

UnaryPotentials dense_oracle_solve(const TransitionMatrix& A, const UnaryPotentials& f, double alpha) {
    check_shapes(A, f);
    const std::size_t n = A.num_pixels();
    if (n > kDenseOracleMaxPixels)
        throw InvalidInput("dense_oracle_solve: " + std::to_string(n) + " pixels exceeds the guard of " +
                           std::to_string(kDenseOracleMaxPixels));
    const auto& p = *A.pattern;
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(N, N);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e)
            M(static_cast<Eigen::Index>(i), p.cols[e]) -= alpha * A.a[e];

    Eigen::MatrixXd rhs(N, f.m);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < f.m; ++c) rhs(static_cast<Eigen::Index>(i), c) = f(i, c);

    const Eigen::MatrixXd sol = M.partialPivLu().solve(rhs);
    UnaryPotentials y(n, f.m);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < f.m; ++c) y(i, c) = sol(static_cast<Eigen::Index>(i), c);
    return y;
}

DiffusionResult solve(const TransitionMatrix& A, const UnaryPotentials& f, const SolverConfig& cfg) {
    switch (cfg.mode) {
    case SolverMode::iterate: {
        auto r = diffuse_to_convergence(A, f, cfg);
        const double scale = 1.0 / (1.0 - cfg.alpha);
        for (double& v : r.y.values) v *= scale;
        return r;
    }
    case SolverMode::neumann:
        return solve_closed_form(A, f, cfg);
    case SolverMode::dense_oracle:
        cfg.validate();
        return {dense_oracle_solve(A, f, cfg.alpha), 1};
    }
    throw InvalidInput("unknown solver mode");
}

double fixed_point_residual(const TransitionMatrix& A, const UnaryPotentials& f,
                            const UnaryPotentials& y, double alpha) {
    const UnaryPotentials next = rw_step(A, f, y, alpha);
    double r = 0.0;
    for (std::size_t i = 0; i < y.values.size(); ++i) r = std::max(r, std::abs(y.values[i] - next.values[i]));
    return r;
}

std::string BenchReport::to_csv() const {
    std::ostringstream out;
    out << kCsvHeader << '\n' << std::fixed << std::setprecision(6);
    for (const auto& r : rows) {
        out << r.n_pixels << ',' << r.radius << ',' << r.nnz << ',' << r.step_ms << ',' << r.solve_ms << ',';
        if (r.dense_ms) out << *r.dense_ms;
        out << ',' << r.iters << '\n';
    }
    return out.str();
}

BenchReport bench_step_vs_solve(const std::vector<std::pair<int, int>>& sizes, int radius,
                                const SolverConfig& cfg, const BenchOptions& options) {
    using Clock = std::chrono::steady_clock;
    const auto ms_since = [](Clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    };

    BenchReport report;
    std::mt19937_64 rng(options.seed);
    for (const auto& [h, w] : sizes) {
        // A random RGB image with the initial affinity head gives a generic,
        // non-uniform walk; timings do not depend on the values.
        FeatureStack rgb(h, w, 3);
        for (double& v : rgb.data) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const auto pattern = build_sparsity(h, w, radius);
        const TransitionMatrix A = transition(affinity_forward(rgb, pattern, AffinityParams::initial(3)));
        UnaryPotentials f(pattern->num_pixels(), options.num_classes);
        for (double& v : f.values) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;

        BenchRow row;
        row.n_pixels = pattern->num_pixels();
        row.radius = radius;
        row.nnz = pattern->num_edges();

        // Median of repeated windows, each long enough to swamp timer resolution.
        std::vector<double> samples;
        for (int rep = 0; rep < 5; ++rep) {
            std::size_t calls = 0;
            const auto t0 = Clock::now();
            double elapsed = 0.0;
            do {
                volatile double sink = rw_forward(A, f).values[0];
                (void)sink;
                ++calls;
                elapsed = ms_since(t0);
            } while (elapsed < options.min_step_window_ms / 5.0);
            samples.push_back(elapsed / static_cast<double>(calls));
        }
        std::ranges::nth_element(samples, samples.begin() + 2);
        row.step_ms = samples[2];

        const auto t1 = Clock::now();
        const auto solved = diffuse_to_convergence(A, f, cfg);
        row.solve_ms = ms_since(t1);
        row.iters = solved.iterations;

        if (options.include_dense && row.n_pixels <= kDenseOracleMaxPixels) {
            const auto t2 = Clock::now();
            volatile double sink = dense_oracle_solve(A, f, cfg.alpha).values[0];
            (void)sink;
            row.dense_ms = ms_since(t2);
        }
        report.rows.push_back(row);
    }
    return report;
}

} // namespace rwn
