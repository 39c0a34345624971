#pragma once

#include <span>
#include <vector>

#include "rwn/affinity.hpp"
#include "rwn/tensor.hpp"

namespace rwn {

// The random walk layer: stateless free functions over (A, f).

/// y = A f. Rows of isolated pixels are zero.
UnaryPotentials rw_forward(const TransitionMatrix& A, const UnaryPotentials& f);

/// y_next = alpha * A * y + (1 - alpha) * f, alpha in [0,1].
UnaryPotentials rw_step(const TransitionMatrix& A, const UnaryPotentials& f,
                        const UnaryPotentials& y, double alpha);

/// dL/df = A^T dL/dy.
UnaryPotentials rw_backward_f(const TransitionMatrix& A, const UnaryPotentials& dY);

/// dL/dA = (dL/dy) f^T restricted to the pattern's edges.
std::vector<double> rw_backward_A(const UnaryPotentials& dY, const UnaryPotentials& f,
                                  const SparsityPattern& pattern);

} // namespace rwn
