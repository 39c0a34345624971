#include "rwn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "rwn/error.hpp"

namespace rwn {
namespace {

// Portable draws from raw mt19937_64 output (std distributions are
// implementation-defined).
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }
    int between(int lo, int hi) { return lo + below(hi - lo + 1); }

    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

constexpr std::uint64_t kColorStream = 0xC01085ull;
constexpr std::uint64_t kCorruptStream = 0xBADB1Dull;

struct Point { double x, y; };

bool inside_polygon(const std::vector<Point>& poly, double x, double y) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
}

void paint_shape(LabelMap& labels, ShapeType type, int cls, Rng& rng) {
    const int h = labels.height, w = labels.width;
    const double size = std::min(h, w);
    const double cx = rng.uniform(0.15, 0.85) * w;
    const double cy = rng.uniform(0.15, 0.85) * h;
    switch (type) {
    case ShapeType::ellipse: {
        const double rx = rng.uniform(0.12, 0.3) * size, ry = rng.uniform(0.12, 0.3) * size;
        const double angle = rng.uniform(0.0, std::numbers::pi);
        const double c = std::cos(angle), s = std::sin(angle);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
                const double u = (c * dx + s * dy) / rx, v = (-s * dx + c * dy) / ry;
                if (u * u + v * v <= 1.0) labels.at(y, x) = cls;
            }
        break;
    }
    case ShapeType::rectangle: {
        const double hw = rng.uniform(0.1, 0.3) * size, hh = rng.uniform(0.1, 0.3) * size;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (std::abs(x + 0.5 - cx) <= hw && std::abs(y + 0.5 - cy) <= hh) labels.at(y, x) = cls;
        break;
    }
    case ShapeType::polygon: {
        const int n = rng.between(3, 7);
        std::vector<double> angles(n);
        for (double& a : angles) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        std::ranges::sort(angles);
        std::vector<Point> poly;
        for (double a : angles) {
            const double r = rng.uniform(0.12, 0.32) * size;
            poly.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
        }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (inside_polygon(poly, x + 0.5, y + 0.5)) labels.at(y, x) = cls;
        break;
    }
    }
}

std::size_t distinct_labels(const LabelMap& labels) {
    return std::set<std::int32_t>(labels.labels.begin(), labels.labels.end()).size();
}

} // namespace

void SceneSpec::validate() const {
    if (num_classes < 2) throw InvalidInput("scene needs at least 2 classes");
    if (num_classes > 256) throw InvalidInput("scene supports at most 256 classes");
    if (height < 16 || width < 16) throw InvalidInput("scene dimensions must be >= 16");
    if (min_shapes < 1 || max_shapes < min_shapes) throw InvalidInput("scene shape range is invalid");
    if (shape_types.empty()) throw InvalidInput("scene needs at least one shape type");
    if (!(texture_sigma >= 0.0) || !(noise_sigma >= 0.0)) throw InvalidInput("noise sigmas must be >= 0");
}

std::vector<std::array<double, 3>> SceneSpec::class_colors() const {
    Rng rng(seed, kColorStream);
    std::vector<std::array<double, 3>> colors(static_cast<std::size_t>(num_classes));
    for (auto& c : colors)
        for (double& v : c) v = rng.uniform(0.1, 0.9);
    return colors;
}

Sample generate_scene(const SceneSpec& spec, std::uint64_t index) {
    spec.validate();
    Rng rng(spec.seed, index);
    LabelMap labels(spec.height, spec.width, 0);
    // Redraw until at least one shape survives on the background.
    do {
        std::ranges::fill(labels.labels, 0);
        const int shapes = rng.between(spec.min_shapes, spec.max_shapes);
        for (int s = 0; s < shapes; ++s) {
            const auto type = spec.shape_types[static_cast<std::size_t>(rng.below(static_cast<int>(spec.shape_types.size())))];
            paint_shape(labels, type, 1 + rng.below(spec.num_classes - 1), rng);
        }
    } while (distinct_labels(labels) < 2);

    const auto colors = spec.class_colors();
    ImageTensor image(spec.height, spec.width, 3);
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            const auto& base = colors[static_cast<std::size_t>(labels.at(y, x))];
            for (int c = 0; c < 3; ++c) {
                const double v = base[c] + spec.texture_sigma * rng.normal() + spec.noise_sigma * rng.normal();
                image.at(y, x, c) = std::clamp(v, 0.0, 1.0);
            }
        }
    return {std::move(image), std::move(labels)};
}

std::vector<Sample> generate(const SceneSpec& spec, std::size_t count, std::uint64_t first_index) {
    std::vector<Sample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(generate_scene(spec, first_index + i));
    return out;
}

UnaryPotentials corrupt_unaries(const UnaryPotentials& f_clean, const PixelMask& band, double flip_prob,
                                int blur_radius, std::uint64_t seed) {
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw InvalidInput("flip_prob must lie in [0,1]");
    if (blur_radius < 0) throw InvalidInput("blur radius must be >= 0");
    if (band.mask.size() != f_clean.num_pixels) throw InvalidInput("band does not match the potentials");
    const int m = f_clean.m, h = band.height, w = band.width;
    Rng rng(seed, kCorruptStream);

    UnaryPotentials flipped = f_clean;
    for (std::size_t i = 0; i < f_clean.num_pixels; ++i) {
        if (!band.mask[i]) continue;
        if (!(rng.uniform() < flip_prob) || m < 2) continue;
        const auto row = f_clean.row(i);
        const int current = static_cast<int>(std::ranges::max_element(row) - row.begin());
        int wrong = rng.below(m - 1);
        if (wrong >= current) ++wrong;
        auto dst = flipped.row(i);
        std::ranges::fill(dst, 0.0);
        dst[wrong] = 1.0;
    }
    if (blur_radius == 0 && flip_prob == 0.0) return flipped;

    UnaryPotentials out = flipped;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (!band.mask[i]) continue;
            auto dst = out.row(i);
            if (blur_radius > 0) {
                std::ranges::fill(dst, 0.0);
                int n = 0;
                for (int yy = std::max(0, y - blur_radius); yy <= std::min(h - 1, y + blur_radius); ++yy)
                    for (int xx = std::max(0, x - blur_radius); xx <= std::min(w - 1, x + blur_radius); ++xx) {
                        const auto src = flipped.row(static_cast<std::size_t>(yy) * w + xx);
                        for (int c = 0; c < m; ++c) dst[c] += src[c];
                        ++n;
                    }
                for (double& v : dst) v /= n;
            }
            double s = 0.0;
            for (double v : dst) s += v;
            if (s > 0.0)
                for (double& v : dst) v /= s;
        }
    }
    return out;
}

AffinityMatrix oracle_affinity(const LabelMap& labels, const PatternPtr& pattern, double epsilon) {
    const auto& p = *pattern;
    if (labels.num_pixels() != p.num_pixels()) throw InvalidInput("oracle_affinity: label map does not match pattern");
    AffinityMatrix W{pattern, std::vector<double>(p.num_edges())};
    for (std::size_t i = 0; i < p.num_pixels(); ++i)
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e)
            W.w[e] = labels.labels[i] == labels.labels[static_cast<std::size_t>(p.cols[e])] ? 1.0 : epsilon;
    return W;
}

} // namespace rwn
