#pragma once

#include <cstdint>

#include "rwn/tensor.hpp"

namespace rwn {

/// Two stacked banks of fixed random 3x3 filters (stride 1, reflective
/// padding, rectified). The second bank convolves the first bank's output.
struct FilterBankConfig {
    int f1 = 64;
    int f2 = 64;
    std::uint32_t seed = 7;

    int k() const { return 3 + f1 + f2; }

    bool operator==(const FilterBankConfig&) const = default;
};

/// Channels are [RGB | bank1 | bank2]. Pure function of (image, bank).
FeatureStack extract_features(const ImageTensor& image, const FilterBankConfig& bank);

/// Rescales each channel to [0,1]; constant channels map to 0. Idempotent.
FeatureStack per_channel_normalize(const FeatureStack& stack);

/// extract_features followed by per_channel_normalize; what the affinity
/// and unary branches consume.
FeatureStack compute_features(const ImageTensor& image, const FilterBankConfig& bank);

} // namespace rwn
