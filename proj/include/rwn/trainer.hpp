#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rwn/affinity.hpp"
#include "rwn/features.hpp"
#include "rwn/tensor.hpp"

namespace rwn {

/// Per-pixel linear classifier over the feature stack: the stand-in
/// segmentation branch. weights is m x k row-major.
struct UnaryParams {
    int m = 0;
    int k = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    static UnaryParams zeros(int m, int k);

    bool operator==(const UnaryParams&) const = default;
};

/// f_i = weights * x_i + bias.
UnaryPotentials unary_forward(const FeatureStack& stack, const UnaryParams& params);

struct SoftmaxLoss {
    double loss = 0.0;
    UnaryPotentials dY;
};

/// Mean per-pixel cross-entropy of the row-wise softmax;
/// dY = (softmax(y) - onehot(label)) / num_pixels.
SoftmaxLoss softmax_loss_grad(const UnaryPotentials& y, const LabelMap& labels);

/// Row-wise softmax.
UnaryPotentials softmax(const UnaryPotentials& y);

struct TrainConfig {
    double base_learning_rate = 1e-5;
    /// The base rate targets a pretrained backbone; the from-scratch linear
    /// unary needs a larger step.
    double lr_multiplier = 1e3;
    double momentum = 0.9;
    double weight_decay = 5e-5;
    std::size_t batch_size = 15;
    std::size_t iterations = 2000;
    int train_radius = 40;
    double alpha = 0.01;
    double seg_loss_weight = 1.0;
    double aff_loss_weight = 1.0;
    std::uint64_t seed = 1;
    bool augment_hflip = true;
    NeighborhoodMetric metric = NeighborhoodMetric::euclidean;

    double learning_rate() const { return base_learning_rate * lr_multiplier; }
    void validate() const;

    /// Literal published recipe: lr 1e-5 (multiplier 1), momentum 0.9,
    /// weight decay 5e-5, batch 15, 2000 iterations, alpha 0.01, R = 40.
    static TrainConfig published();
};

struct ModelCheckpoint {
    FilterBankConfig bank;
    AffinityParams affinity;
    UnaryParams unary;
    std::uint32_t iteration = 0;

    int k() const { return affinity.k(); }
    int m() const { return unary.m; }

    /// theta = -1/k, zero unary weights and biases.
    static ModelCheckpoint initial(const FilterBankConfig& bank, int m);

    bool operator==(const ModelCheckpoint&) const = default;
};

struct TrainState {
    ModelCheckpoint model;
    std::vector<double> v_theta;
    std::vector<double> v_weights;
    std::vector<double> v_bias;

    explicit TrainState(ModelCheckpoint m);
};

struct Gradients {
    double seg_loss = 0.0;
    double aff_loss = 0.0;
    std::vector<double> theta;
    std::vector<double> weights;
    std::vector<double> bias;
};

/// Weighted objective seg_loss_weight * L_seg + aff_loss_weight * L_aff.
double total_loss(double seg_loss, double aff_loss, const TrainConfig& cfg);

/// Joint forward/backward for one sample: features -> f; F -> W -> A;
/// one damped walk step from y0 = f; softmax loss on the result and
/// Euclidean loss on W. Gradients of the weighted objective.
Gradients compute_gradients(const FeatureStack& features, const LabelMap& labels,
                            const ModelCheckpoint& model, const TrainConfig& cfg);

/// Objective value only, sharing compute_gradients' forward path. Used by
/// gradient checks.
double objective(const FeatureStack& features, const LabelMap& labels, const ModelCheckpoint& model,
                 const TrainConfig& cfg);

struct StepLosses {
    double seg_loss = 0.0;
    double aff_loss = 0.0;
    double total = 0.0;
};

/// Batch-averaged gradients, then one SGD update with momentum and weight
/// decay on theta and the unary parameters: v = mu*v + lr*(g + wd*p); p -= v.
/// Throws DivergenceError on a non-finite loss.
StepLosses train_step(std::span<const FeatureStack> features, std::span<const LabelMap> labels,
                      TrainState& state, const TrainConfig& cfg);

StepLosses train_step(const Sample& sample, TrainState& state, const TrainConfig& cfg);

struct LossLogEntry {
    std::size_t iter = 0;
    double seg_loss = 0.0;
    double aff_loss = 0.0;
};

struct TrainResult {
    ModelCheckpoint model;
    std::vector<LossLogEntry> log;

    /// "iter,seg_loss,aff_loss" with one row per iteration.
    std::string log_csv() const;
};

using TrainProgress = std::function<void(const LossLogEntry&)>;

/// Runs cfg.iterations steps over seeded shuffled minibatches (optionally
/// with seeded horizontal flips), starting from `initial`. DivergenceError
/// carries the 1-based iteration index.
TrainResult train(std::span<const Sample> dataset, const TrainConfig& cfg, const ModelCheckpoint& initial,
                  const TrainProgress& progress = {});

/// Trailing moving average of a loss series; entry t averages [t-window+1, t].
std::vector<double> moving_average(std::span<const double> series, std::size_t window);

} // namespace rwn
