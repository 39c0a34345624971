#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rwn {

/// Dense per-pixel channel data, row-major over pixels, channel-last.
struct PixelTensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    PixelTensor() = default;
    PixelTensor(int h, int w, int c)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c, 0.0) {}

    std::size_t num_pixels() const { return static_cast<std::size_t>(height) * width; }

    double& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    std::span<const double> pixel(std::size_t i) const {
        return {data.data() + i * channels, static_cast<std::size_t>(channels)};
    }
    std::span<double> pixel(std::size_t i) {
        return {data.data() + i * channels, static_cast<std::size_t>(channels)};
    }
};

/// RGB image with values in [0,1].
struct ImageTensor : PixelTensor {
    using PixelTensor::PixelTensor;
};

/// k-channel per-pixel features feeding the affinity branch.
struct FeatureStack : PixelTensor {
    using PixelTensor::PixelTensor;
    int k() const { return channels; }
};

/// Throws InvalidInput unless the image is non-empty, consistently sized and in [0,1].
void validate_image(const ImageTensor& image);

/// Per-pixel class indices.
struct LabelMap {
    int height = 0;
    int width = 0;
    std::vector<std::int32_t> labels;

    LabelMap() = default;
    LabelMap(int h, int w, std::int32_t fill = 0)
        : height(h), width(w), labels(static_cast<std::size_t>(h) * w, fill) {}

    std::size_t num_pixels() const { return labels.size(); }
    std::int32_t& at(int y, int x) { return labels[static_cast<std::size_t>(y) * width + x]; }
    std::int32_t at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

/// Per-pixel class scores, num_pixels x m row-major. Also used for diffused
/// predictions and for gradients with respect to either.
struct UnaryPotentials {
    std::size_t num_pixels = 0;
    int m = 0;
    std::vector<double> values;

    UnaryPotentials() = default;
    UnaryPotentials(std::size_t n, int classes)
        : num_pixels(n), m(classes), values(n * static_cast<std::size_t>(classes), 0.0) {}

    double& operator()(std::size_t i, int c) { return values[i * m + c]; }
    double operator()(std::size_t i, int c) const { return values[i * m + c]; }

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * m, static_cast<std::size_t>(m)};
    }
    std::span<double> row(std::size_t i) {
        return {values.data() + i * m, static_cast<std::size_t>(m)};
    }
};

/// An image with its ground-truth labels.
struct Sample {
    ImageTensor image;
    LabelMap labels;
};

/// One-hot scores for a label map.
UnaryPotentials one_hot(const LabelMap& labels, int m);

/// Per-pixel argmax; ties resolve to the lowest class index.
LabelMap argmax(const UnaryPotentials& scores, int height, int width);

/// Mirror an image or label map left-right.
ImageTensor hflip(const ImageTensor& image);
LabelMap hflip(const LabelMap& labels);

} // namespace rwn
