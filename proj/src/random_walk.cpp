#include "rwn/random_walk.hpp"

#include <string>

#include "rwn/error.hpp"

namespace rwn {
namespace {

void check_rows(const SparsityPattern& p, const UnaryPotentials& u, const char* op) {
    if (u.num_pixels != p.num_pixels() || u.values.size() != u.num_pixels * static_cast<std::size_t>(u.m))
        throw InvalidInput(std::string(op) + ": potentials have " + std::to_string(u.num_pixels) +
                           " rows, graph has " + std::to_string(p.num_pixels()) + " pixels");
}

} // namespace

UnaryPotentials rw_forward(const TransitionMatrix& A, const UnaryPotentials& f) {
    const auto& p = *A.pattern;
    check_rows(p, f, "rw_forward");
    UnaryPotentials y(f.num_pixels, f.m);
    const int m = f.m;
    for (std::size_t i = 0; i < p.num_pixels(); ++i) {
        double* yi = &y.values[i * m];
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
            const double a = A.a[e];
            const double* fj = &f.values[static_cast<std::size_t>(p.cols[e]) * m];
            for (int c = 0; c < m; ++c) yi[c] += a * fj[c];
        }
    }
    return y;
}

UnaryPotentials rw_step(const TransitionMatrix& A, const UnaryPotentials& f,
                        const UnaryPotentials& y, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw InvalidInput("rw_step: alpha must lie in [0,1], got " + std::to_string(alpha));
    if (f.m != y.m || f.num_pixels != y.num_pixels) throw InvalidInput("rw_step: f and y shapes differ");
    UnaryPotentials out = rw_forward(A, y);
    const double keep = 1.0 - alpha;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = alpha * out.values[i] + keep * f.values[i];
    return out;
}

UnaryPotentials rw_backward_f(const TransitionMatrix& A, const UnaryPotentials& dY) {
    const auto& p = *A.pattern;
    check_rows(p, dY, "rw_backward_f");
    UnaryPotentials dF(dY.num_pixels, dY.m);
    const int m = dY.m;
    // Row j of A^T is gathered through the mirrored edges (j, i) -> (i, j).
    for (std::size_t j = 0; j < p.num_pixels(); ++j) {
        double* dj = &dF.values[j * m];
        for (std::size_t e = p.row_begin(j); e < p.row_end(j); ++e) {
            const double a_ij = A.a[p.reverse[e]];
            const double* di = &dY.values[static_cast<std::size_t>(p.cols[e]) * m];
            for (int c = 0; c < m; ++c) dj[c] += a_ij * di[c];
        }
    }
    return dF;
}

std::vector<double> rw_backward_A(const UnaryPotentials& dY, const UnaryPotentials& f,
                                  const SparsityPattern& pattern) {
    check_rows(pattern, dY, "rw_backward_A");
    check_rows(pattern, f, "rw_backward_A");
    if (dY.m != f.m) throw InvalidInput("rw_backward_A: class counts differ");
    const int m = f.m;
    std::vector<double> dA(pattern.num_edges(), 0.0);
    for (std::size_t i = 0; i < pattern.num_pixels(); ++i) {
        const double* gi = &dY.values[i * m];
        for (std::size_t e = pattern.row_begin(i); e < pattern.row_end(i); ++e) {
            const double* fj = &f.values[static_cast<std::size_t>(pattern.cols[e]) * m];
            double s = 0.0;
            for (int c = 0; c < m; ++c) s += gi[c] * fj[c];
            dA[e] = s;
        }
    }
    return dA;
}

} // namespace rwn
