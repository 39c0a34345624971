#pragma once

// Test-only reference computations. Nothing here calls the code paths it
// is used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "rwn/affinity.hpp"
#include "rwn/tensor.hpp"

namespace rwn::oracle {

using Dense = std::vector<std::vector<double>>;

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline FeatureStack random_stack(int h, int w, int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    FeatureStack s(h, w, k);
    for (double& v : s.data) v = uniform(rng);
    return s;
}

inline UnaryPotentials random_potentials(std::size_t n, int m, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    UnaryPotentials f(n, m);
    for (double& v : f.values) v = uniform(rng, lo, hi);
    return f;
}

inline LabelMap random_labels(int h, int w, int m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    LabelMap l(h, w);
    for (auto& v : l.labels) v = static_cast<std::int32_t>(rng() % static_cast<std::uint64_t>(m));
    return l;
}

/// A random row-stochastic walk on a radius-r grid graph, via random theta.
inline TransitionMatrix random_walk_matrix(int h, int w, int radius, std::uint64_t seed) {
    const auto pattern = build_sparsity(h, w, radius);
    const auto stack = random_stack(h, w, 3, seed);
    std::mt19937_64 rng(seed + 1);
    AffinityParams theta{{uniform(rng, -3, 1), uniform(rng, -3, 1), uniform(rng, -3, 1)}};
    return transition(affinity_forward(channel_distances(stack, pattern), theta));
}

inline Dense to_dense(const TransitionMatrix& A) {
    const auto& p = *A.pattern;
    Dense d(p.num_pixels(), std::vector<double>(p.num_pixels(), 0.0));
    for (std::size_t i = 0; i < p.num_pixels(); ++i)
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) d[i][static_cast<std::size_t>(p.cols[e])] = A.a[e];
    return d;
}

inline Dense to_dense(const UnaryPotentials& f) {
    Dense d(f.num_pixels, std::vector<double>(static_cast<std::size_t>(f.m)));
    for (std::size_t i = 0; i < f.num_pixels; ++i)
        for (int c = 0; c < f.m; ++c) d[i][c] = f(i, c);
    return d;
}

inline Dense matmul(const Dense& a, const Dense& b) {
    Dense c(a.size(), std::vector<double>(b.empty() ? 0 : b[0].size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k)
            for (std::size_t j = 0; j < c[i].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline Dense scale(Dense a, double s) {
    for (auto& r : a)
        for (double& v : r) v *= s;
    return a;
}

inline Dense add(Dense a, const Dense& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
    return a;
}

/// Solves M X = B by Gaussian elimination with partial pivoting.
inline Dense gauss_solve(Dense M, Dense B) {
    const std::size_t n = M.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        std::swap(M[col], M[piv]);
        std::swap(B[col], B[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = M[r][col] / M[col][col];
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) M[r][j] -= f * M[col][j];
            for (std::size_t j = 0; j < B[r].size(); ++j) B[r][j] -= f * B[col][j];
        }
    }
    for (std::size_t r = n; r-- > 0;) {
        for (std::size_t j = 0; j < B[r].size(); ++j) {
            double s = B[r][j];
            for (std::size_t k = r + 1; k < n; ++k) s -= M[r][k] * B[k][j];
            B[r][j] = s / M[r][r];
        }
    }
    return B;
}

/// (I - alpha*A)^-1 f by elimination.
inline Dense closed_form(const TransitionMatrix& A, const UnaryPotentials& f, double alpha) {
    Dense M = scale(to_dense(A), -alpha);
    for (std::size_t i = 0; i < M.size(); ++i) M[i][i] += 1.0;
    return gauss_solve(M, to_dense(f));
}

inline double max_abs_diff(const Dense& a, const UnaryPotentials& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b(i, static_cast<int>(j))));
    return m;
}

inline double max_abs_diff(const UnaryPotentials& a, const UnaryPotentials& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

/// Central differences of `loss` with respect to every entry of `params`.
inline std::vector<double> numeric_gradient(const std::function<double()>& loss, std::vector<double>& params,
                                            double h = 1e-5) {
    std::vector<double> g(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = params[i];
        params[i] = keep + h;
        const double up = loss();
        params[i] = keep - h;
        const double down = loss();
        params[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// ||a - b|| / max(||a||, ||b||); 0 when both vanish.
inline double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double denom = std::sqrt(std::max(na, nb));
    return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

/// Reference softmax cross-entropy (mean over pixels), computed directly.
inline double softmax_xent(const UnaryPotentials& y, const LabelMap& labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.num_pixels; ++i) {
        double z = 0.0;
        for (int c = 0; c < y.m; ++c) z += std::exp(y(i, c));
        total += std::log(z) - y(i, labels.labels[i]);
    }
    return total / static_cast<double>(y.num_pixels);
}

} // namespace rwn::oracle
