#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "rwn/error.hpp"
#include "rwn/synth.hpp"

using namespace rwn;

TEST_CASE("generate") {
    SceneSpec spec;
    CHECK(generate(spec, 0).empty());

    const auto a = generate(spec, 6);
    const auto b = generate(spec, 6);
    REQUIRE(a.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].image.data == b[i].image.data);
        CHECK(a[i].labels.labels == b[i].labels.labels);
        CHECK(a[i].image.height == 32);
        CHECK(a[i].labels.width == 32);
        std::set<int> classes(a[i].labels.labels.begin(), a[i].labels.labels.end());
        CHECK(classes.size() >= 2);
        CHECK(*classes.begin() >= 0);
        CHECK(*classes.rbegin() < spec.num_classes);
        for (double v : a[i].image.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    const auto tail = generate(spec, 2, 4);
    CHECK(tail[0].image.data == a[4].image.data);

    SceneSpec other = spec;
    other.seed = 43;
    CHECK(generate(other, 1)[0].image.data != a[0].image.data);

    SceneSpec bad = spec;
    bad.num_classes = 1;
    CHECK_THROWS_AS(generate(bad, 1), InvalidInput);
    bad = spec;
    bad.height = 4;
    CHECK_THROWS_AS(generate(bad, 1), InvalidInput);
}

TEST_CASE("corrupt_unaries") {
    const SceneSpec spec;
    const auto s = generate_scene(spec, 3);
    const auto f = one_hot(s.labels, spec.num_classes);
    const auto band = trimap_band(s.labels, 3);

    CHECK(corrupt_unaries(f, band, 0.0, 0, 1).values == f.values);

    SUBCASE("full flip with two classes is wrong everywhere") {
        SceneSpec two = spec;
        two.num_classes = 2;
        const auto t = generate_scene(two, 0);
        const auto f2 = one_hot(t.labels, 2);
        const PixelMask all{32, 32, std::vector<std::uint8_t>(1024, 1)};
        const auto c = corrupt_unaries(f2, all, 1.0, 0, 9);
        const auto pred = argmax(c, 32, 32);
        for (std::size_t i = 0; i < 1024; ++i) CHECK(pred.labels[i] != t.labels.labels[i]);
    }
    SUBCASE("rows outside the band are untouched, band rows stay distributions") {
        const auto c = corrupt_unaries(f, band, 0.3, 1, 5);
        for (std::size_t i = 0; i < f.num_pixels; ++i) {
            if (!band.mask[i]) {
                for (int k = 0; k < f.m; ++k) CHECK(c(i, k) == f(i, k));
            } else {
                double sum = 0.0;
                for (int k = 0; k < f.m; ++k) {
                    CHECK(c(i, k) >= 0.0);
                    sum += c(i, k);
                }
                CHECK(sum == doctest::Approx(1.0));
            }
        }
        CHECK(corrupt_unaries(f, band, 0.3, 1, 5).values == c.values);
        CHECK(corrupt_unaries(f, band, 0.3, 1, 6).values != c.values);
    }
    CHECK_THROWS_AS(corrupt_unaries(f, band, 1.5, 0, 1), InvalidInput);
    CHECK_THROWS_AS(corrupt_unaries(f, band, 0.5, -1, 1), InvalidInput);
}

TEST_CASE("oracle_affinity") {
    const auto p = build_sparsity(8, 8, 3);
    const auto W = oracle_affinity(LabelMap(8, 8, 1), p);
    for (double v : W.w) CHECK(v == 1.0);

    const auto labels = oracle::random_labels(8, 8, 3, 2);
    const auto A = transition(oracle_affinity(labels, p));
    for (std::size_t i = 0; i < p->num_pixels(); ++i) {
        double sum = 0.0, cross = 0.0;
        for (std::size_t e = p->row_begin(i); e < p->row_end(i); ++e) {
            sum += A.a[e];
            if (labels.labels[static_cast<std::size_t>(p->cols[e])] != labels.labels[i]) cross += A.a[e];
        }
        CHECK(sum == doctest::Approx(1.0));
        CHECK(cross < 1.0 - 1e-3);
    }
}
