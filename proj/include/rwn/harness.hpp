#pragma once

#include <optional>
#include <vector>

#include "rwn/config.hpp"
#include "rwn/evaluation.hpp"
#include "rwn/solver.hpp"
#include "rwn/synth.hpp"

namespace rwn {

// Oracle-affinity experiments: ground-truth unaries corrupted near label
// boundaries, diffused over a walk whose affinities come from the labels.

struct OracleCase {
    LabelMap gt;
    UnaryPotentials corrupted;
};

/// Corrupts one-hot ground truth within a band of `corrupt.band_width`
/// around label boundaries. Case i uses seed corrupt.seed + i.
std::vector<OracleCase> build_oracle_cases(const std::vector<Sample>& samples, const CorruptionConfig& corrupt,
                                           int m);

/// Number of damped walk steps, or nullopt to iterate to convergence.
using WalkSteps = std::optional<std::size_t>;

/// `steps` applications of y <- alpha*A*y + (1-alpha)*f from y = f, or the
/// converged fixed point.
UnaryPotentials run_walk(const TransitionMatrix& A, const UnaryPotentials& f, const SolverConfig& cfg,
                         WalkSteps steps);

/// Argmax predictions for every case after walking the oracle graph of the
/// given radius.
std::vector<LabelMap> oracle_predictions(const std::vector<OracleCase>& cases, int radius, const SolverConfig& cfg,
                                         WalkSteps steps);

/// Argmax of the corrupted unaries themselves.
std::vector<LabelMap> baseline_predictions(const std::vector<OracleCase>& cases);

/// Mean IOU in points (x100), averaged over cases.
double mean_iou_points(const std::vector<LabelMap>& preds, const std::vector<OracleCase>& cases, int m);

/// Trimap error pooled over all cases: misclassified band pixels over band
/// pixels, per width.
std::vector<TrimapPoint> pooled_trimap(const std::vector<LabelMap>& preds, const std::vector<OracleCase>& cases,
                                       const std::vector<int>& widths);

struct AblationRow {
    std::string setting;  // step count, "converge", or "R=<r>/<schedule>"
    int radius = 0;
    WalkSteps steps;
    double mean_iou = 0.0;
};

/// Steps 0..max_steps then convergence, at fixed radius.
std::vector<AblationRow> steps_sweep(const std::vector<OracleCase>& cases, int m, int radius,
                                     const SolverConfig& cfg, std::size_t max_steps);

/// Converged IOU for each radius, then a single damped step at single_step_radius.
std::vector<AblationRow> radius_sweep(const std::vector<OracleCase>& cases, int m, const std::vector<int>& radii,
                                      const SolverConfig& cfg, int single_step_radius);

std::string ablation_csv(const std::vector<AblationRow>& rows);

} // namespace rwn
