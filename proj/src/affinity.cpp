#include "rwn/affinity.hpp"

#include <cmath>
#include <string>

#include "rwn/error.hpp"

namespace rwn {
namespace {

void check_stack(const FeatureStack& stack, const SparsityPattern& p) {
    if (stack.height != p.height || stack.width != p.width)
        throw InvalidInput("feature stack is " + std::to_string(stack.height) + "x" +
                           std::to_string(stack.width) + " but the pattern is " +
                           std::to_string(p.height) + "x" + std::to_string(p.width));
}

void check_theta(const AffinityParams& params, int k) {
    if (params.k() != k)
        throw InvalidInput("affinity params have " + std::to_string(params.k()) +
                           " weights, distances have " + std::to_string(k) + " channels");
    for (double t : params.theta)
        if (!std::isfinite(t)) throw InvalidInput("affinity params must be finite");
}

void check_edges(std::size_t got, const SparsityPattern& p, const char* what) {
    if (got != p.num_edges()) throw InvalidInput(std::string(what) + ": per-edge array does not match pattern");
}

} // namespace

AffinityParams AffinityParams::initial(int k) {
    return AffinityParams{std::vector<double>(static_cast<std::size_t>(k), k > 0 ? -1.0 / k : 0.0)};
}

ChannelDistanceTensor channel_distances(const FeatureStack& stack, const PatternPtr& pattern) {
    const auto& p = *pattern;
    check_stack(stack, p);
    const int k = stack.k();
    ChannelDistanceTensor F{pattern, k, std::vector<double>(p.num_edges() * k)};
    for (std::size_t i = 0; i < p.num_pixels(); ++i) {
        const auto xi = stack.pixel(i);
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
            const auto xj = stack.pixel(static_cast<std::size_t>(p.cols[e]));
            double* dst = &F.values[e * k];
            for (int c = 0; c < k; ++c) dst[c] = std::abs(xi[c] - xj[c]);
        }
    }
    return F;
}

AffinityMatrix affinity_forward(const ChannelDistanceTensor& F, const AffinityParams& params) {
    check_theta(params, F.k);
    AffinityMatrix W{F.pattern, std::vector<double>(F.pattern->num_edges())};
    for (std::size_t e = 0; e < W.w.size(); ++e) {
        const auto d = F.edge(e);
        double s = 0.0;
        for (int c = 0; c < F.k; ++c) s += params.theta[c] * d[c];
        W.w[e] = std::exp(s);
    }
    return W;
}

AffinityMatrix affinity_forward(const FeatureStack& stack, const PatternPtr& pattern,
                                const AffinityParams& params) {
    const auto& p = *pattern;
    check_stack(stack, p);
    const int k = stack.k();
    check_theta(params, k);
    AffinityMatrix W{pattern, std::vector<double>(p.num_edges())};
    for (std::size_t i = 0; i < p.num_pixels(); ++i) {
        const auto xi = stack.pixel(i);
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
            const auto xj = stack.pixel(static_cast<std::size_t>(p.cols[e]));
            double s = 0.0;
            for (int c = 0; c < k; ++c) s += params.theta[c] * std::abs(xi[c] - xj[c]);
            W.w[e] = std::exp(s);
        }
    }
    return W;
}

AffinityTargets ground_truth_affinity(const LabelMap& labels, const PatternPtr& pattern) {
    const auto& p = *pattern;
    if (labels.num_pixels() != p.num_pixels())
        throw InvalidInput("ground_truth_affinity: label map does not match pattern");
    AffinityTargets T{pattern, std::vector<double>(p.num_edges())};
    for (std::size_t i = 0; i < p.num_pixels(); ++i)
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e)
            T.t[e] = labels.labels[i] == labels.labels[static_cast<std::size_t>(p.cols[e])] ? 1.0 : 0.0;
    return T;
}

AffinityLoss affinity_loss_grad(const AffinityMatrix& W, const AffinityTargets& targets) {
    if (W.w.size() != targets.t.size())
        throw InvalidInput("affinity_loss_grad: mismatched patterns");
    AffinityLoss out{0.0, std::vector<double>(W.w.size())};
    if (W.w.empty()) return out;
    const double scale = 1.0 / static_cast<double>(W.w.size());
    double sum = 0.0;
    for (std::size_t e = 0; e < W.w.size(); ++e) {
        const double r = W.w[e] - targets.t[e];
        sum += r * r;
        out.dW[e] = r * scale;
    }
    out.loss = 0.5 * sum * scale;
    return out;
}

std::vector<double> affinity_backward(const ChannelDistanceTensor& F, const AffinityParams& params,
                                      const AffinityMatrix& W, std::span<const double> dW) {
    check_theta(params, F.k);
    check_edges(dW.size(), *F.pattern, "affinity_backward");
    std::vector<double> dtheta(static_cast<std::size_t>(F.k), 0.0);
    for (std::size_t e = 0; e < dW.size(); ++e) {
        const double g = dW[e] * W.w[e];
        if (g == 0.0) continue;
        const auto d = F.edge(e);
        for (int c = 0; c < F.k; ++c) dtheta[c] += g * d[c];
    }
    return dtheta;
}

std::vector<double> affinity_backward(const FeatureStack& stack, const AffinityParams& params,
                                      const AffinityMatrix& W, std::span<const double> dW) {
    const auto& p = *W.pattern;
    check_stack(stack, p);
    const int k = stack.k();
    check_theta(params, k);
    check_edges(dW.size(), p, "affinity_backward");
    std::vector<double> dtheta(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < p.num_pixels(); ++i) {
        const auto xi = stack.pixel(i);
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
            const double g = dW[e] * W.w[e];
            if (g == 0.0) continue;
            const auto xj = stack.pixel(static_cast<std::size_t>(p.cols[e]));
            for (int c = 0; c < k; ++c) dtheta[c] += g * std::abs(xi[c] - xj[c]);
        }
    }
    return dtheta;
}

TransitionMatrix transition(const AffinityMatrix& W) {
    const auto& p = *W.pattern;
    check_edges(W.w.size(), p, "transition");
    TransitionMatrix A{W.pattern, std::vector<double>(W.w.size()), std::vector<double>(p.num_pixels(), 0.0)};
    for (std::size_t i = 0; i < p.num_pixels(); ++i) {
        double d = 0.0;
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) d += W.w[e];
        A.degree[i] = d;
        if (d <= 0.0) {
            if (p.row_begin(i) != p.row_end(i))
                throw InvalidInput("transition: row " + std::to_string(i) + " has zero degree");
            continue;
        }
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) A.a[e] = W.w[e] / d;
    }
    return A;
}

std::vector<double> transition_backward(const AffinityMatrix& W, const TransitionMatrix& A,
                                        std::span<const double> dA) {
    const auto& p = *W.pattern;
    check_edges(dA.size(), p, "transition_backward");
    std::vector<double> dW(dA.size(), 0.0);
    for (std::size_t i = 0; i < p.num_pixels(); ++i) {
        const std::size_t b = p.row_begin(i), end = p.row_end(i);
        if (b == end) continue;
        double dot = 0.0;
        for (std::size_t e = b; e < end; ++e) dot += dA[e] * A.a[e];
        const double inv = 1.0 / A.degree[i];
        for (std::size_t e = b; e < end; ++e) dW[e] = (dA[e] - dot) * inv;
    }
    return dW;
}

} // namespace rwn
