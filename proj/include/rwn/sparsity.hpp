#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace rwn {

enum class NeighborhoodMetric { euclidean, chebyshev };

/// Radius-limited pixel neighborhood graph in compressed row form.
///
/// Pixels are indexed row-major (y * width + x). Row i lists its neighbors j
/// in ascending order; edge e of row i occupies cols[row_ptr[i] + ...]. The
/// pattern is symmetric and has no self-edges, and reverse[e] is the index of
/// the mirrored edge (j, i). Every per-edge array in the library is aligned
/// with `cols`.
struct SparsityPattern {
    int height = 0;
    int width = 0;
    int radius = 0;
    NeighborhoodMetric metric = NeighborhoodMetric::euclidean;
    std::vector<std::size_t> row_ptr;
    std::vector<std::int32_t> cols;
    std::vector<std::size_t> reverse;

    std::size_t num_pixels() const { return static_cast<std::size_t>(height) * width; }
    std::size_t num_edges() const { return cols.size(); }
    std::size_t row_begin(std::size_t i) const { return row_ptr[i]; }
    std::size_t row_end(std::size_t i) const { return row_ptr[i + 1]; }
    std::span<const std::int32_t> neighbors(std::size_t i) const {
        return {cols.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
    }
};

using PatternPtr = std::shared_ptr<const SparsityPattern>;

/// Neighbors are pixels at offset distance in (0, radius] under `metric`.
PatternPtr build_sparsity(int height, int width, int radius,
                          NeighborhoodMetric metric = NeighborhoodMetric::euclidean);

} // namespace rwn
