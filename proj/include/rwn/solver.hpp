#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rwn/affinity.hpp"
#include "rwn/tensor.hpp"

namespace rwn {

enum class SolverMode { iterate, neumann, dense_oracle };

struct SolverConfig {
    double alpha = 0.01;
    double tolerance = 1e-6;       // max-abs change per sweep
    std::size_t max_iterations = 10000;
    SolverMode mode = SolverMode::iterate;

    /// Throws InvalidInput unless 0 <= alpha < 1 and tolerance > 0.
    void validate() const;
};

struct DiffusionResult {
    UnaryPotentials y;
    std::size_t iterations = 0;
};

/// Iterates y <- alpha*A*y + (1-alpha)*f from y = f until the max-abs change
/// of a sweep drops below the tolerance. The limit is (1-alpha)(I - alpha*A)^-1 f.
/// Throws ConvergenceError after max_iterations sweeps.
DiffusionResult diffuse_to_convergence(const TransitionMatrix& A, const UnaryPotentials& f,
                                       const SolverConfig& cfg);

/// Solves (I - alpha*A) y = f by the truncated Neumann series sum_i (alpha*A)^i f,
/// stopping once the appended term's max-abs falls below the tolerance.
/// Differs from diffuse_to_convergence by the factor 1/(1-alpha); per-pixel
/// argmax is the same.
DiffusionResult solve_closed_form(const TransitionMatrix& A, const UnaryPotentials& f,
                                  const SolverConfig& cfg);

/// Largest problem dense_oracle_solve accepts.
inline constexpr std::size_t kDenseOracleMaxPixels = 4096;

/// Exact dense LU solve of (I - alpha*A) y = f. Test oracle and benchmark
/// baseline; refuses graphs above kDenseOracleMaxPixels.
UnaryPotentials dense_oracle_solve(const TransitionMatrix& A, const UnaryPotentials& f, double alpha);

/// Dispatches on cfg.mode. For `iterate` the result is rescaled by 1/(1-alpha)
/// so all three modes return the (I - alpha*A)^-1 f quantity.
DiffusionResult solve(const TransitionMatrix& A, const UnaryPotentials& f, const SolverConfig& cfg);

/// Residual max-abs(y - alpha*A*y - (1-alpha)*f).
double fixed_point_residual(const TransitionMatrix& A, const UnaryPotentials& f,
                            const UnaryPotentials& y, double alpha);

struct BenchRow {
    std::size_t n_pixels = 0;
    int radius = 0;
    std::size_t nnz = 0;
    double step_ms = 0.0;
    double solve_ms = 0.0;
    std::optional<double> dense_ms;  // absent above the dense guard
    std::size_t iters = 0;
};

struct BenchReport {
    std::vector<BenchRow> rows;

    static constexpr const char* kCsvHeader = "n_pixels,radius,nnz,step_ms,solve_ms,dense_ms,iters";
    std::string to_csv() const;
};

struct BenchOptions {
    int num_classes = 3;
    bool include_dense = true;
    /// Minimum accumulated wall time per sparse-step measurement.
    double min_step_window_ms = 50.0;
    std::uint32_t seed = 11;
};

/// Times one sparse walk step, a converged iterative solve and (within the
/// guard) a dense solve for each image size. Single-threaded.
BenchReport bench_step_vs_solve(const std::vector<std::pair<int, int>>& sizes, int radius,
                                const SolverConfig& cfg, const BenchOptions& options = {});

} // namespace rwn
