#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rwn/error.hpp"
#include "rwn/evaluation.hpp"

using namespace rwn;

namespace {

// Left half class 0, right half class 1, split after column `split`.
LabelMap halves(int h, int w, int split) {
    LabelMap l(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = split; x < w; ++x) l.at(y, x) = 1;
    return l;
}

PixelMask as_mask(const std::vector<double>& v, double level) {
    PixelMask m;
    m.mask.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) m.mask[i] = v[i] >= level;
    return m;
}

} // namespace

TEST_CASE("mean_iou and overall_iou") {
    const auto gt = oracle::random_labels(5, 5, 3, 1);
    CHECK(mean_iou(gt, gt, 3) == 1.0);
    CHECK(overall_iou(gt, gt) == 1.0);

    LabelMap a(2, 2, 0), b(2, 2, 1);
    CHECK(mean_iou(a, b, 2) == 0.0);
    CHECK(overall_iou(a, b) == 0.0);

    // gt: class 1 on all 4 pixels of a 2x4 right half; pred covers 2 of them.
    LabelMap g(2, 4), p(2, 4);
    for (int y = 0; y < 2; ++y) {
        g.at(y, 2) = g.at(y, 3) = 1;
        p.at(y, 3) = 1;
    }
    // class 1: 2/4; class 0: 4/6.
    CHECK(mean_iou(p, g, 2) == doctest::Approx((0.5 + 4.0 / 6.0) / 2.0));
    CHECK(overall_iou(p, g) == doctest::Approx(6.0 / 10.0));

    SUBCASE("matches per-class brute force") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto x = oracle::random_labels(6, 7, 4, seed), y = oracle::random_labels(6, 7, 4, seed + 99);
            double sum = 0.0;
            int present = 0;
            double inter_all = 0.0, union_all = 0.0;
            for (int c = 0; c < 4; ++c) {
                int inter = 0, uni = 0;
                for (std::size_t i = 0; i < x.num_pixels(); ++i) {
                    inter += x.labels[i] == c && y.labels[i] == c;
                    uni += x.labels[i] == c || y.labels[i] == c;
                }
                if (uni) {
                    sum += static_cast<double>(inter) / uni;
                    ++present;
                }
                inter_all += inter;
                union_all += uni;
            }
            CHECK(mean_iou(x, y, 4) == doctest::Approx(sum / present));
            CHECK(overall_iou(x, y) == doctest::Approx(inter_all / union_all));
        }
    }
    CHECK_THROWS_AS(mean_iou(LabelMap(2, 2), LabelMap(2, 3), 2), InvalidInput);
    CHECK_THROWS_AS(mean_iou(LabelMap(2, 2, 5), LabelMap(2, 2), 2), InvalidInput);
}

TEST_CASE("distance_transform matches brute force") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        std::mt19937_64 rng(seed);
        const int h = 5 + static_cast<int>(seed % 4), w = 9 - static_cast<int>(seed % 3);
        PixelMask m{h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w)};
        for (auto& v : m.mask) v = oracle::uniform(rng) < 0.1;
        m.mask[seed % m.mask.size()] = 1;
        const auto dt = distance_transform(m);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double best = INFINITY;
                for (int yy = 0; yy < h; ++yy)
                    for (int xx = 0; xx < w; ++xx)
                        if (m.mask[static_cast<std::size_t>(yy) * w + xx])
                            best = std::min(best, std::hypot(double(y - yy), double(x - xx)));
                CHECK(dt[static_cast<std::size_t>(y) * w + x] == doctest::Approx(best).epsilon(1e-12));
            }
    }
    const auto empty = distance_transform(PixelMask{3, 3, std::vector<std::uint8_t>(9, 0)});
    for (double v : empty) CHECK(std::isinf(v));
}

TEST_CASE("trimap") {
    const auto gt = halves(10, 10, 5);
    const auto none = trimap_error(gt, gt, {1, 2, 5});
    for (const auto& p : none) CHECK(p.error == 0.0);

    CHECK(trimap_band(gt, 1).count() == 20);
    const auto shifted = halves(10, 10, 6);
    const auto err = trimap_error(shifted, gt, {1, 2, 3});
    CHECK(err[0].width == 1);
    CHECK(err[0].error == 0.5);
    CHECK(err[1].error == doctest::Approx(10.0 / 40.0));

    SUBCASE("bands are nested and grow with width") {
        const auto labels = oracle::random_labels(12, 12, 2, 3);
        std::size_t prev = 0;
        PixelMask last = trimap_band(labels, 1);
        for (int w = 1; w <= 6; ++w) {
            const auto band = trimap_band(labels, w);
            CHECK(band.count() >= prev);
            for (std::size_t i = 0; i < band.mask.size(); ++i)
                if (last.mask[i]) CHECK(band.mask[i]);
            prev = band.count();
            last = band;
        }
    }
    SUBCASE("no boundary gives an empty band and NaN error") {
        const LabelMap flat(4, 4, 1);
        CHECK(trimap_band(flat, 3).count() == 0);
        CHECK(std::isnan(trimap_error(flat, flat, {2})[0].error));
    }
    CHECK_THROWS_AS(trimap_band(gt, 0), InvalidInput);
}

TEST_CASE("extract_boundary_strength") {
    const LabelMap flat(4, 5, 2);
    for (double v : extract_boundary_strength(one_hot(flat, 3), 4, 5).value) CHECK(v == 0.0);

    const auto gt = halves(6, 6, 3);
    const auto s = extract_boundary_strength(one_hot(gt, 2), 6, 6);
    const auto boundary = label_boundary(gt);
    for (std::size_t i = 0; i < s.value.size(); ++i) CHECK(s.value[i] == (boundary.mask[i] ? 1.0 : 0.0));

    const auto soft = extract_boundary_strength(oracle::random_potentials(30, 3, 4, 0.0, 1.0), 5, 6);
    for (double v : soft.value) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("match_boundaries is one-to-one and within tolerance") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        const int h = 12, w = 12;
        PixelMask a{h, w, std::vector<std::uint8_t>(144)}, b{h, w, std::vector<std::uint8_t>(144)};
        for (auto& v : a.mask) v = oracle::uniform(rng) < 0.2;
        for (auto& v : b.mask) v = oracle::uniform(rng) < 0.15;
        const auto matches = match_boundaries(a, b, 2.0);
        std::vector<int> used_a(144), used_b(144);
        for (auto [i, j] : matches) {
            CHECK(a.mask[i]);
            CHECK(b.mask[j]);
            CHECK(++used_a[i] == 1);
            CHECK(++used_b[j] == 1);
            const double d = std::hypot(double(int(i / w) - int(j / w)), double(int(i % w) - int(j % w)));
            CHECK(d <= 2.0);
        }
    }
}

TEST_CASE("boundary_pr") {
    const auto gt = halves(10, 10, 5);
    const auto gtb = label_boundary(gt);
    StrengthMap perfect{10, 10, std::vector<double>(100, 0.0)};
    for (std::size_t i = 0; i < 100; ++i) perfect.value[i] = gtb.mask[i];
    const auto pr = boundary_pr(perfect, gtb);
    CHECK(pr.mf == 1.0);
    CHECK(pr.ap == 1.0);
    CHECK(pr.curve.size() == 50);

    const StrengthMap zero{10, 10, std::vector<double>(100, 0.0)};
    const auto z = boundary_pr(zero, gtb);
    CHECK(z.mf == 0.0);
    for (const auto& p : z.curve) CHECK(p.recall == 0.0);

    SUBCASE("shift within tolerance still matches") {
        const auto shifted = extract_boundary_strength(one_hot(halves(10, 10, 6), 2), 10, 10);
        CHECK(boundary_pr(shifted, gtb, 2.0).mf == 1.0);
        CHECK(boundary_pr(shifted, gtb, 0.5).mf < 1.0);
    }
    SUBCASE("precision and recall from brute-force matching") {
        const auto soft = extract_boundary_strength(oracle::random_potentials(100, 2, 8, 0.0, 1.0), 10, 10);
        const auto r = boundary_pr(soft, gtb, 2.0, 9);
        for (const auto& p : r.curve) {
            auto pred = as_mask(soft.value, p.threshold);
            pred.height = pred.width = 10;
            const double matched = static_cast<double>(match_boundaries(pred, gtb, 2.0).size());
            CHECK(p.recall == doctest::Approx(matched / static_cast<double>(gtb.count())));
            if (pred.count()) CHECK(p.precision == doctest::Approx(matched / static_cast<double>(pred.count())));
        }
        CHECK(r.mf >= 0.0);
        CHECK(r.mf <= 1.0);
        CHECK(r.ap >= 0.0);
        CHECK(r.ap <= 1.0);
    }
    CHECK_THROWS_AS(boundary_pr(zero, label_boundary(LabelMap(10, 10))), InvalidInput);
}
