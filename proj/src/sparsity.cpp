#include "rwn/sparsity.hpp"

#include <algorithm>
#include <cstdlib>

#include "rwn/error.hpp"

namespace rwn {

PatternPtr build_sparsity(int height, int width, int radius, NeighborhoodMetric metric) {
    if (height < 1 || width < 1) throw InvalidInput("build_sparsity: dimensions must be >= 1");
    if (radius < 1) throw InvalidInput("build_sparsity: radius must be >= 1");

    // Offsets sorted so that (dy, dx) in raster order gives ascending column
    // index for interior pixels; boundary clipping preserves the order.
    struct Offset { int dy, dx; };
    std::vector<Offset> offsets;
    const int ry = std::min(radius, height - 1);
    const int rx = std::min(radius, width - 1);
    const long long r2 = static_cast<long long>(radius) * radius;
    for (int dy = -ry; dy <= ry; ++dy) {
        for (int dx = -rx; dx <= rx; ++dx) {
            if (dy == 0 && dx == 0) continue;
            const bool inside = metric == NeighborhoodMetric::euclidean
                ? static_cast<long long>(dy) * dy + static_cast<long long>(dx) * dx <= r2
                : std::max(std::abs(dy), std::abs(dx)) <= radius;
            if (inside) offsets.push_back({dy, dx});
        }
    }

    auto p = std::make_shared<SparsityPattern>();
    p->height = height;
    p->width = width;
    p->radius = radius;
    p->metric = metric;
    const std::size_t n = p->num_pixels();
    p->row_ptr.assign(n + 1, 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            for (const auto& o : offsets) {
                const int ny = y + o.dy, nx = x + o.dx;
                if (ny < 0 || ny >= height || nx < 0 || nx >= width) continue;
                p->cols.push_back(static_cast<std::int32_t>(ny * width + nx));
            }
            p->row_ptr[i + 1] = p->cols.size();
        }
    }

    // Mirror index: (j, i) lives in row j; binary search its sorted neighbor list.
    p->reverse.resize(p->cols.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t e = p->row_ptr[i]; e < p->row_ptr[i + 1]; ++e) {
            const std::size_t j = static_cast<std::size_t>(p->cols[e]);
            const auto first = p->cols.begin() + static_cast<std::ptrdiff_t>(p->row_ptr[j]);
            const auto last = p->cols.begin() + static_cast<std::ptrdiff_t>(p->row_ptr[j + 1]);
            const auto it = std::lower_bound(first, last, static_cast<std::int32_t>(i));
            p->reverse[e] = static_cast<std::size_t>(it - p->cols.begin());
        }
    }
    return p;
}

} // namespace rwn
