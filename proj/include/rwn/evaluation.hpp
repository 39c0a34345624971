#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rwn/tensor.hpp"

namespace rwn {

/// Per-pixel boolean over an image grid.
struct PixelMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> mask;

    std::size_t count() const;
};

/// Mean over classes present in gt or pred of |pred_c & gt_c| / |pred_c | gt_c|.
double mean_iou(const LabelMap& pred, const LabelMap& gt, int m);

/// Class-agnostic aggregate: sum_c |pred_c & gt_c| / sum_c |pred_c | gt_c|.
double overall_iou(const LabelMap& pred, const LabelMap& gt);

/// Pixels with a 4-neighbor of a different label (both sides of every edge).
PixelMask label_boundary(const LabelMap& labels);

/// Exact Euclidean distance from each pixel to the nearest set pixel of
/// `mask`; +inf everywhere when the mask is empty.
std::vector<double> distance_transform(const PixelMask& mask);

/// Pixels whose distance to a ground-truth boundary pixel is below `width`.
/// width 1 is the boundary itself; bands are nested in width.
PixelMask trimap_band(const LabelMap& gt, int width);

struct TrimapPoint {
    int width = 0;
    double error = 0.0;
};

/// Fraction of band pixels where pred != gt, per width. NaN for an empty band.
std::vector<TrimapPoint> trimap_error(const LabelMap& pred, const LabelMap& gt, const std::vector<int>& widths);

/// Per-pixel map of reals.
struct StrengthMap {
    int height = 0;
    int width = 0;
    std::vector<double> value;
};

/// Boundary strength in [0,1]: max over 4-neighbors of the total-variation
/// distance 1 - sum_c min(p_c(i), p_c(j)). Rows are clipped at 0 and
/// renormalized first; a one-hot map gives binary boundaries.
StrengthMap extract_boundary_strength(const UnaryPotentials& prob, int height, int width);

struct PrPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct BoundaryPr {
    double mf = 0.0;
    double ap = 0.0;
    std::vector<PrPoint> curve;
};

/// One-to-one greedy matching of predicted boundary pixels to gt boundary
/// pixels, closest pairs first, within a Euclidean tolerance.
/// Returns (pred index, gt index) pairs.
std::vector<std::pair<std::size_t, std::size_t>> match_boundaries(const PixelMask& pred, const PixelMask& gt,
                                                                  double tolerance);

/// Sweeps thresholds k/(thresholds+1), k = 1..thresholds. MF is the best F1;
/// AP is the trapezoid area under precision vs recall, anchored at recall 0
/// with the first precision. Thresholds with no predicted pixels are excluded
/// from the AP curve and contribute F1 = 0. Throws InvalidInput when gt has
/// no boundary pixels.
BoundaryPr boundary_pr(const StrengthMap& strength, const PixelMask& gt_boundary, double tolerance = 2.0,
                       int thresholds = 50);

} // namespace rwn
