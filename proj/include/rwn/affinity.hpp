#pragma once

#include <vector>

#include "rwn/sparsity.hpp"
#include "rwn/tensor.hpp"

namespace rwn {

/// Per-edge, per-channel L1 feature distances. values[e * k + c].
struct ChannelDistanceTensor {
    PatternPtr pattern;
    int k = 0;
    std::vector<double> values;

    std::span<const double> edge(std::size_t e) const {
        return {values.data() + e * k, static_cast<std::size_t>(k)};
    }
};

/// Weights of the bias-free 1x1xk convolution.
struct AffinityParams {
    std::vector<double> theta;

    int k() const { return static_cast<int>(theta.size()); }

    /// theta_c = -1/k: initial affinities in (0,1], decreasing with distance.
    static AffinityParams initial(int k);

    bool operator==(const AffinityParams&) const = default;
};

/// W_ij = exp(sum_c theta_c * F(i,j,c)) on the pattern's edges.
struct AffinityMatrix {
    PatternPtr pattern;
    std::vector<double> w;
};

/// A = D^-1 W. Rows of isolated pixels are empty.
struct TransitionMatrix {
    PatternPtr pattern;
    std::vector<double> a;
    std::vector<double> degree;

    std::size_t num_pixels() const { return pattern->num_pixels(); }
};

/// 1 where the endpoint labels agree, 0 otherwise.
struct AffinityTargets {
    PatternPtr pattern;
    std::vector<double> t;
};

struct AffinityLoss {
    double loss = 0.0;
    std::vector<double> dW;
};

ChannelDistanceTensor channel_distances(const FeatureStack& stack, const PatternPtr& pattern);

AffinityMatrix affinity_forward(const ChannelDistanceTensor& F, const AffinityParams& params);

/// Same result as affinity_forward(channel_distances(stack, pattern), params)
/// without materializing the distance tensor. Used where E * k doubles would
/// not fit (large radii).
AffinityMatrix affinity_forward(const FeatureStack& stack, const PatternPtr& pattern,
                                const AffinityParams& params);

AffinityTargets ground_truth_affinity(const LabelMap& labels, const PatternPtr& pattern);

/// Euclidean loss averaged over edges: 0.5 * mean_e (W_e - t_e)^2,
/// dW_e = (W_e - t_e) / num_edges. Zero for an empty pattern.
AffinityLoss affinity_loss_grad(const AffinityMatrix& W, const AffinityTargets& targets);

/// dtheta_c = sum_e dW_e * W_e * F(e, c).
std::vector<double> affinity_backward(const ChannelDistanceTensor& F, const AffinityParams& params,
                                      const AffinityMatrix& W, std::span<const double> dW);

/// Fused counterpart of affinity_backward, recomputing distances from features.
std::vector<double> affinity_backward(const FeatureStack& stack, const AffinityParams& params,
                                      const AffinityMatrix& W, std::span<const double> dW);

TransitionMatrix transition(const AffinityMatrix& W);

/// Jacobian-transpose of row normalization:
/// dW_ij = (dA_ij - sum_j' dA_ij' A_ij') / D_ii.
std::vector<double> transition_backward(const AffinityMatrix& W, const TransitionMatrix& A,
                                        std::span<const double> dA);

} // namespace rwn
