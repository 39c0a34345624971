#include "rwn/harness.hpp"

#include <sstream>

#include "rwn/error.hpp"
#include "rwn/random_walk.hpp"

namespace rwn {

std::vector<OracleCase> build_oracle_cases(const std::vector<Sample>& samples, const CorruptionConfig& corrupt,
                                           int m) {
    std::vector<OracleCase> cases;
    cases.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& gt = samples[i].labels;
        const PixelMask band = trimap_band(gt, corrupt.band_width);
        cases.push_back({gt, corrupt_unaries(one_hot(gt, m), band, corrupt.flip_prob, corrupt.blur_radius,
                                             corrupt.seed + i)});
    }
    return cases;
}

UnaryPotentials run_walk(const TransitionMatrix& A, const UnaryPotentials& f, const SolverConfig& cfg,
                         WalkSteps steps) {
    if (!steps) return diffuse_to_convergence(A, f, cfg).y;
    UnaryPotentials y = f;
    for (std::size_t t = 0; t < *steps; ++t) y = rw_step(A, f, y, cfg.alpha);
    return y;
}

std::vector<LabelMap> oracle_predictions(const std::vector<OracleCase>& cases, int radius, const SolverConfig& cfg,
                                         WalkSteps steps) {
    std::vector<LabelMap> preds;
    preds.reserve(cases.size());
    for (const auto& c : cases) {
        const auto pattern = build_sparsity(c.gt.height, c.gt.width, radius);
        const TransitionMatrix A = transition(oracle_affinity(c.gt, pattern));
        preds.push_back(argmax(run_walk(A, c.corrupted, cfg, steps), c.gt.height, c.gt.width));
    }
    return preds;
}

std::vector<LabelMap> baseline_predictions(const std::vector<OracleCase>& cases) {
    std::vector<LabelMap> preds;
    for (const auto& c : cases) preds.push_back(argmax(c.corrupted, c.gt.height, c.gt.width));
    return preds;
}

double mean_iou_points(const std::vector<LabelMap>& preds, const std::vector<OracleCase>& cases, int m) {
    if (preds.size() != cases.size() || cases.empty()) throw InvalidInput("mean_iou_points: need one prediction per case");
    double sum = 0.0;
    for (std::size_t i = 0; i < cases.size(); ++i) sum += mean_iou(preds[i], cases[i].gt, m);
    return 100.0 * sum / static_cast<double>(cases.size());
}

std::vector<TrimapPoint> pooled_trimap(const std::vector<LabelMap>& preds, const std::vector<OracleCase>& cases,
                                       const std::vector<int>& widths) {
    std::vector<double> wrong(widths.size(), 0.0), total(widths.size(), 0.0);
    for (std::size_t i = 0; i < cases.size(); ++i) {
        for (std::size_t w = 0; w < widths.size(); ++w) {
            const PixelMask band = trimap_band(cases[i].gt, widths[w]);
            for (std::size_t p = 0; p < band.mask.size(); ++p) {
                if (!band.mask[p]) continue;
                total[w] += 1.0;
                wrong[w] += preds[i].labels[p] != cases[i].gt.labels[p];
            }
        }
    }
    std::vector<TrimapPoint> out;
    for (std::size_t w = 0; w < widths.size(); ++w) out.push_back({widths[w], total[w] > 0 ? wrong[w] / total[w] : 0.0});
    return out;
}

std::vector<AblationRow> steps_sweep(const std::vector<OracleCase>& cases, int m, int radius,
                                     const SolverConfig& cfg, std::size_t max_steps) {
    std::vector<AblationRow> rows;
    for (std::size_t t = 0; t <= max_steps; ++t)
        rows.push_back({std::to_string(t), radius, t, mean_iou_points(oracle_predictions(cases, radius, cfg, t), cases, m)});
    rows.push_back({"converge", radius, std::nullopt,
                    mean_iou_points(oracle_predictions(cases, radius, cfg, std::nullopt), cases, m)});
    return rows;
}

std::vector<AblationRow> radius_sweep(const std::vector<OracleCase>& cases, int m, const std::vector<int>& radii,
                                      const SolverConfig& cfg, int single_step_radius) {
    std::vector<AblationRow> rows;
    for (int r : radii)
        rows.push_back({"converge", r, std::nullopt,
                        mean_iou_points(oracle_predictions(cases, r, cfg, std::nullopt), cases, m)});
    rows.push_back({"single_step", single_step_radius, 1,
                    mean_iou_points(oracle_predictions(cases, single_step_radius, cfg, 1), cases, m)});
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::ostringstream out;
    out.precision(10);
    out << "setting,radius,steps,mean_iou\n";
    for (const auto& r : rows)
        out << r.setting << ',' << r.radius << ',' << (r.steps ? std::to_string(*r.steps) : "converge") << ','
            << r.mean_iou << '\n';
    return out.str();
}

} // namespace rwn
