#include "rwn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "rwn/error.hpp"

namespace rwn {
namespace {

void check_same_shape(const LabelMap& a, const LabelMap& b) {
    if (a.height != b.height || a.width != b.width || a.labels.size() != b.labels.size())
        throw InvalidInput("label maps differ in shape");
}

// Felzenszwalb-Huttenlocher lower envelope of parabolas: squared distance
// transform of the sampled function f, in place. v and z are scratch.
void dt1d(std::vector<double>& f, std::vector<int>& v, std::vector<double>& z) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(f.size());
    const auto meet = [&](int q, int p) {
        return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
    };
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == inf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -inf;
            z[1] = inf;
            continue;
        }
        double s = meet(q, v[k]);
        while (s <= z[k]) s = meet(q, v[--k]);
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    if (k < 0) return;  // all infinite
    std::vector<double> d(f.size());
    for (int q = 0, j = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const double dq = q - v[j];
        d[q] = dq * dq + f[v[j]];
    }
    f = std::move(d);
}

} // namespace

std::size_t PixelMask::count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

double mean_iou(const LabelMap& pred, const LabelMap& gt, int m) {
    check_same_shape(pred, gt);
    std::vector<std::size_t> inter(m, 0), uni(m, 0);
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
        const auto p = pred.labels[i], g = gt.labels[i];
        if (p < 0 || p >= m || g < 0 || g >= m) throw InvalidInput("mean_iou: label outside [0, m)");
        if (p == g) {
            ++inter[g];
            ++uni[g];
        } else {
            ++uni[g];
            ++uni[p];
        }
    }
    double sum = 0.0;
    int present = 0;
    for (int c = 0; c < m; ++c) {
        if (uni[c] == 0) continue;
        sum += static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
        ++present;
    }
    return present > 0 ? sum / present : 1.0;
}

double overall_iou(const LabelMap& pred, const LabelMap& gt) {
    check_same_shape(pred, gt);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < gt.labels.size(); ++i) agree += pred.labels[i] == gt.labels[i];
    // Each agreeing pixel is in one intersection and one union; each
    // disagreeing pixel is in two unions.
    const std::size_t unions = agree + 2 * (gt.labels.size() - agree);
    return unions > 0 ? static_cast<double>(agree) / static_cast<double>(unions) : 1.0;
}

PixelMask label_boundary(const LabelMap& labels) {
    PixelMask out{labels.height, labels.width, std::vector<std::uint8_t>(labels.num_pixels(), 0)};
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) {
            const auto l = labels.at(y, x);
            const bool edge = (x > 0 && labels.at(y, x - 1) != l) || (x + 1 < labels.width && labels.at(y, x + 1) != l) ||
                              (y > 0 && labels.at(y - 1, x) != l) || (y + 1 < labels.height && labels.at(y + 1, x) != l);
            out.mask[static_cast<std::size_t>(y) * labels.width + x] = edge ? 1 : 0;
        }
    }
    return out;
}

std::vector<double> distance_transform(const PixelMask& mask) {
    const int h = mask.height, w = mask.width;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> grid(mask.mask.size());
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = mask.mask[i] ? 0.0 : inf;

    const int n = std::max(h, w);
    std::vector<double> f;
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    for (int x = 0; x < w; ++x) {
        f.resize(h);
        for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
        dt1d(f, v, z);
        for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = f[y];
    }
    for (int y = 0; y < h; ++y) {
        const auto row = grid.begin() + static_cast<std::ptrdiff_t>(y) * w;
        f.assign(row, row + w);
        dt1d(f, v, z);
        std::copy(f.begin(), f.end(), row);
    }
    for (double& g : grid) g = std::sqrt(g);
    return grid;
}

PixelMask trimap_band(const LabelMap& gt, int width) {
    if (width < 1) throw InvalidInput("trimap width must be >= 1");
    const auto dist = distance_transform(label_boundary(gt));
    PixelMask band{gt.height, gt.width, std::vector<std::uint8_t>(gt.num_pixels(), 0)};
    for (std::size_t i = 0; i < dist.size(); ++i) band.mask[i] = dist[i] < width ? 1 : 0;
    return band;
}

std::vector<TrimapPoint> trimap_error(const LabelMap& pred, const LabelMap& gt, const std::vector<int>& widths) {
    check_same_shape(pred, gt);
    const auto dist = distance_transform(label_boundary(gt));
    std::vector<TrimapPoint> out;
    for (int w : widths) {
        if (w < 1) throw InvalidInput("trimap width must be >= 1");
        std::size_t in_band = 0, wrong = 0;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            if (!(dist[i] < w)) continue;
            ++in_band;
            wrong += pred.labels[i] != gt.labels[i];
        }
        out.push_back({w, in_band ? static_cast<double>(wrong) / static_cast<double>(in_band)
                                  : std::numeric_limits<double>::quiet_NaN()});
    }
    return out;
}

StrengthMap extract_boundary_strength(const UnaryPotentials& prob, int height, int width) {
    if (static_cast<std::size_t>(height) * width != prob.num_pixels)
        throw InvalidInput("extract_boundary_strength: shape mismatch");
    const int m = prob.m;
    std::vector<double> p(prob.values.size());
    for (std::size_t i = 0; i < prob.num_pixels; ++i) {
        double s = 0.0;
        for (int c = 0; c < m; ++c) s += (p[i * m + c] = std::max(prob(i, c), 0.0));
        for (int c = 0; c < m; ++c) p[i * m + c] = s > 0.0 ? p[i * m + c] / s : 1.0 / m;
    }
    const auto tv = [&](std::size_t i, std::size_t j) {
        double overlap = 0.0;
        for (int c = 0; c < m; ++c) overlap += std::min(p[i * m + c], p[j * m + c]);
        return std::clamp(1.0 - overlap, 0.0, 1.0);
    };
    StrengthMap out{height, width, std::vector<double>(prob.num_pixels, 0.0)};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            double s = 0.0;
            if (x > 0) s = std::max(s, tv(i, i - 1));
            if (x + 1 < width) s = std::max(s, tv(i, i + 1));
            if (y > 0) s = std::max(s, tv(i, i - width));
            if (y + 1 < height) s = std::max(s, tv(i, i + width));
            out.value[i] = s;
        }
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> match_boundaries(const PixelMask& pred, const PixelMask& gt,
                                                                  double tolerance) {
    if (pred.height != gt.height || pred.width != gt.width) throw InvalidInput("match_boundaries: shape mismatch");
    const int h = gt.height, w = gt.width;
    const int r = static_cast<int>(std::floor(tolerance));
    const double tol2 = tolerance * tolerance;

    std::vector<std::tuple<int, std::size_t, std::size_t>> candidates;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (!pred.mask[i]) continue;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    const int d2 = dy * dy + dx * dx;
                    if (d2 > tol2) continue;
                    const int ny = y + dy, nx = x + dx;
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                    if (gt.mask[j]) candidates.emplace_back(d2, i, j);
                }
            }
        }
    }
    std::ranges::sort(candidates);
    std::vector<std::uint8_t> pred_used(pred.mask.size(), 0), gt_used(gt.mask.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> matches;
    for (const auto& [d2, i, j] : candidates) {
        if (pred_used[i] || gt_used[j]) continue;
        pred_used[i] = gt_used[j] = 1;
        matches.emplace_back(i, j);
    }
    return matches;
}

BoundaryPr boundary_pr(const StrengthMap& strength, const PixelMask& gt_boundary, double tolerance, int thresholds) {
    if (strength.height != gt_boundary.height || strength.width != gt_boundary.width)
        throw InvalidInput("boundary_pr: shape mismatch");
    if (thresholds < 1) throw InvalidInput("boundary_pr: need at least one threshold");
    const std::size_t gt_count = gt_boundary.count();
    if (gt_count == 0) throw InvalidInput("boundary_pr: ground truth has no boundary pixels; recall is undefined");

    BoundaryPr out;
    std::vector<PrPoint> valid;
    for (int t = thresholds; t >= 1; --t) {
        const double level = static_cast<double>(t) / (thresholds + 1);
        PixelMask pred{strength.height, strength.width, std::vector<std::uint8_t>(strength.value.size(), 0)};
        for (std::size_t i = 0; i < pred.mask.size(); ++i) pred.mask[i] = strength.value[i] >= level ? 1 : 0;
        const std::size_t pred_count = pred.count();
        const std::size_t matched = pred_count ? match_boundaries(pred, gt_boundary, tolerance).size() : 0;
        PrPoint pt{level, pred_count ? static_cast<double>(matched) / pred_count : 0.0,
                   static_cast<double>(matched) / gt_count};
        out.curve.push_back(pt);
        if (pred_count) valid.push_back(pt);
        const double denom = pt.precision + pt.recall;
        if (denom > 0.0) out.mf = std::max(out.mf, 2.0 * pt.precision * pt.recall / denom);
    }
    // Thresholds were visited high to low, so recall is non-decreasing along `valid`.
    if (!valid.empty()) {
        double prev_r = 0.0, prev_p = valid.front().precision;
        for (const auto& pt : valid) {
            out.ap += (pt.recall - prev_r) * 0.5 * (pt.precision + prev_p);
            prev_r = pt.recall;
            prev_p = pt.precision;
        }
    }
    return out;
}

} // namespace rwn
