#include "rwn/features.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rwn/error.hpp"

namespace rwn {
namespace {

int reflect(int i, int n) {
    if (n == 1) return 0;
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
}

// Uniform in [-bound, bound] from the top 53 bits of a 64-bit Mersenne
// twister draw; avoids std::*_distribution, whose output is
// implementation-defined.
std::vector<double> random_filters(std::mt19937_64& rng, int out_ch, int in_ch) {
    const double bound = std::sqrt(6.0 / (9.0 * std::max(in_ch, 1)));
    std::vector<double> w(static_cast<std::size_t>(out_ch) * in_ch * 9);
    for (double& v : w) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = (2.0 * u - 1.0) * bound;
    }
    return w;
}

// 3x3 conv + ReLU over a channel-last tensor. Weights laid out [out][in][ky][kx].
PixelTensor conv3x3_relu(const PixelTensor& in, const std::vector<double>& w, int out_ch) {
    PixelTensor out(in.height, in.width, out_ch);
    const int in_ch = in.channels;
    std::vector<double> acc(out_ch);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int ky = 0; ky < 3; ++ky) {
                const int sy = reflect(y + ky - 1, in.height);
                for (int kx = 0; kx < 3; ++kx) {
                    const int sx = reflect(x + kx - 1, in.width);
                    const double* src = &in.data[(static_cast<std::size_t>(sy) * in.width + sx) * in_ch];
                    for (int o = 0; o < out_ch; ++o) {
                        const double* wo = &w[(static_cast<std::size_t>(o) * in_ch) * 9 + ky * 3 + kx];
                        double s = 0.0;
                        for (int c = 0; c < in_ch; ++c) s += wo[c * 9] * src[c];
                        acc[o] += s;
                    }
                }
            }
            for (int o = 0; o < out_ch; ++o) out.at(y, x, o) = std::max(acc[o], 0.0);
        }
    }
    return out;
}

} // namespace

FeatureStack extract_features(const ImageTensor& image, const FilterBankConfig& bank) {
    validate_image(image);
    if (image.channels != 3) throw InvalidInput("extract_features: expected an RGB image");
    if (bank.f1 < 0 || bank.f2 < 0) throw InvalidInput("extract_features: negative filter count");

    std::mt19937_64 rng(bank.seed);
    const auto w1 = random_filters(rng, bank.f1, 3);
    const auto w2 = random_filters(rng, bank.f2, bank.f1);
    const PixelTensor b1 = conv3x3_relu(image, w1, bank.f1);
    const PixelTensor b2 = conv3x3_relu(b1, w2, bank.f2);

    FeatureStack stack(image.height, image.width, bank.k());
    for (std::size_t i = 0; i < image.num_pixels(); ++i) {
        auto dst = stack.pixel(i);
        std::ranges::copy(image.pixel(i), dst.begin());
        std::ranges::copy(b1.pixel(i), dst.begin() + 3);
        std::ranges::copy(b2.pixel(i), dst.begin() + 3 + bank.f1);
    }
    return stack;
}

FeatureStack per_channel_normalize(const FeatureStack& stack) {
    FeatureStack out = stack;
    const std::size_t n = stack.num_pixels();
    for (int c = 0; c < stack.channels; ++c) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t i = 0; i < n; ++i) {
            lo = std::min(lo, stack.data[i * stack.channels + c]);
            hi = std::max(hi, stack.data[i * stack.channels + c]);
        }
        const double range = hi - lo;
        for (std::size_t i = 0; i < n; ++i) {
            double& v = out.data[i * stack.channels + c];
            v = range > 0.0 ? (v - lo) / range : 0.0;
        }
    }
    return out;
}

FeatureStack compute_features(const ImageTensor& image, const FilterBankConfig& bank) {
    return per_channel_normalize(extract_features(image, bank));
}

} // namespace rwn
