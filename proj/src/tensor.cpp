#include "rwn/tensor.hpp"

#include <cmath>
#include <string>

#include "rwn/error.hpp"

namespace rwn {

void validate_image(const ImageTensor& image) {
    if (image.height <= 0 || image.width <= 0 || image.channels <= 0)
        throw InvalidInput("image must have nonzero height, width and channels");
    if (image.data.size() != image.num_pixels() * image.channels)
        throw InvalidInput("image data length does not match its shape");
    for (double v : image.data) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw InvalidInput("image values must be finite and in [0,1], got " + std::to_string(v));
    }
}

UnaryPotentials one_hot(const LabelMap& labels, int m) {
    UnaryPotentials out(labels.num_pixels(), m);
    for (std::size_t i = 0; i < labels.num_pixels(); ++i) {
        const auto c = labels.labels[i];
        if (c < 0 || c >= m)
            throw InvalidInput("label " + std::to_string(c) + " outside [0, " + std::to_string(m) + ")");
        out(i, c) = 1.0;
    }
    return out;
}

LabelMap argmax(const UnaryPotentials& scores, int height, int width) {
    if (static_cast<std::size_t>(height) * width != scores.num_pixels)
        throw InvalidInput("argmax: shape does not match score rows");
    LabelMap out(height, width);
    for (std::size_t i = 0; i < scores.num_pixels; ++i) {
        auto row = scores.row(i);
        int best = 0;
        for (int c = 1; c < scores.m; ++c)
            if (row[c] > row[best]) best = c;
        out.labels[i] = best;
    }
    return out;
}

ImageTensor hflip(const ImageTensor& image) {
    ImageTensor out(image.height, image.width, image.channels);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            for (int c = 0; c < image.channels; ++c)
                out.at(y, x, c) = image.at(y, image.width - 1 - x, c);
    return out;
}

LabelMap hflip(const LabelMap& labels) {
    LabelMap out(labels.height, labels.width);
    for (int y = 0; y < labels.height; ++y)
        for (int x = 0; x < labels.width; ++x)
            out.at(y, x) = labels.at(y, labels.width - 1 - x);
    return out;
}

} // namespace rwn
