#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rwn/affinity.hpp"
#include "rwn/evaluation.hpp"
#include "rwn/tensor.hpp"

namespace rwn {

enum class ShapeType { ellipse, rectangle, polygon };

/// Scenes of overlapping flat-colored shapes on a class-0 background.
struct SceneSpec {
    int height = 32;
    int width = 32;
    int num_classes = 3;
    int min_shapes = 2;
    int max_shapes = 4;
    std::vector<ShapeType> shape_types{ShapeType::ellipse, ShapeType::rectangle, ShapeType::polygon};
    double texture_sigma = 0.04;  // per-pixel jitter of a shape's class color
    double noise_sigma = 0.02;    // sensor noise over the whole image
    std::uint64_t seed = 42;

    void validate() const;

    /// Base RGB color of each class, fixed by the seed.
    std::vector<std::array<double, 3>> class_colors() const;
};

/// Scene `index` of the sequence defined by spec; a pure function of both.
/// Every scene contains at least two classes.
Sample generate_scene(const SceneSpec& spec, std::uint64_t index);

/// Scenes first_index .. first_index + count - 1.
std::vector<Sample> generate(const SceneSpec& spec, std::size_t count, std::uint64_t first_index = 0);

/// Inside the band, each row is replaced by a one-hot of a uniformly chosen
/// wrong class with probability flip_prob; band rows are then box-blurred
/// per class (window clipped to the image) and renormalized. Rows outside
/// the band are left bit-unchanged.
UnaryPotentials corrupt_unaries(const UnaryPotentials& f_clean, const PixelMask& band, double flip_prob,
                                int blur_radius, std::uint64_t seed);

/// W_ij = 1 for equal labels, epsilon otherwise.
AffinityMatrix oracle_affinity(const LabelMap& labels, const PatternPtr& pattern, double epsilon = 1e-6);

} // namespace rwn
