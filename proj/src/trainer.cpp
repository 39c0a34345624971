#include "rwn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "rwn/error.hpp"
#include "rwn/random_walk.hpp"

namespace rwn {
namespace {

struct ForwardPass {
    UnaryPotentials f;
    AffinityMatrix W;
    TransitionMatrix A;
    SoftmaxLoss seg;
    AffinityLoss aff;
};

ForwardPass forward(const FeatureStack& x, const LabelMap& labels, const ModelCheckpoint& model,
                    const TrainConfig& cfg) {
    if (x.height != labels.height || x.width != labels.width)
        throw InvalidInput("features and labels differ in size");
    if (x.k() != model.k() || model.unary.k != model.k())
        throw InvalidInput("feature stack has " + std::to_string(x.k()) + " channels, model expects " +
                           std::to_string(model.k()));
    const auto pattern = build_sparsity(x.height, x.width, cfg.train_radius, cfg.metric);
    ForwardPass p;
    p.f = unary_forward(x, model.unary);
    p.W = affinity_forward(x, pattern, model.affinity);
    for (std::size_t i = 0; i < pattern->num_pixels(); ++i) {
        double d = 0.0;
        for (std::size_t e = pattern->row_begin(i); e < pattern->row_end(i); ++e) d += p.W.w[e];
        if (pattern->row_begin(i) != pattern->row_end(i) && !(d > 0.0 && std::isfinite(d)))
            throw DivergenceError("affinities of pixel " + std::to_string(i) + " degenerated (degree " +
                                      std::to_string(d) + ")",
                                  model.iteration + 1);
    }
    p.A = transition(p.W);
    const UnaryPotentials y = rw_step(p.A, p.f, p.f, cfg.alpha);
    p.seg = softmax_loss_grad(y, labels);
    p.aff = affinity_loss_grad(p.W, ground_truth_affinity(labels, pattern));
    return p;
}

void sgd_update(std::vector<double>& params, std::vector<double>& velocity, const std::vector<double>& grad,
                const TrainConfig& cfg) {
    const double lr = cfg.learning_rate();
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = cfg.momentum * velocity[i] + lr * (grad[i] + cfg.weight_decay * params[i]);
        params[i] -= velocity[i];
    }
}

// Uniform integer in [0, n) from raw 64-bit draws; portable across standard libraries.
std::size_t draw_below(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

} // namespace

UnaryParams UnaryParams::zeros(int m, int k) {
    return UnaryParams{m, k, std::vector<double>(static_cast<std::size_t>(m) * k, 0.0),
                       std::vector<double>(static_cast<std::size_t>(m), 0.0)};
}

UnaryPotentials unary_forward(const FeatureStack& stack, const UnaryParams& params) {
    if (stack.k() != params.k)
        throw InvalidInput("unary_forward: stack has " + std::to_string(stack.k()) + " channels, params expect " +
                           std::to_string(params.k));
    if (params.weights.size() != static_cast<std::size_t>(params.m) * params.k ||
        params.bias.size() != static_cast<std::size_t>(params.m))
        throw InvalidInput("unary_forward: malformed parameters");
    UnaryPotentials f(stack.num_pixels(), params.m);
    for (std::size_t i = 0; i < stack.num_pixels(); ++i) {
        const auto x = stack.pixel(i);
        for (int c = 0; c < params.m; ++c) {
            const double* w = &params.weights[static_cast<std::size_t>(c) * params.k];
            double s = params.bias[c];
            for (int j = 0; j < params.k; ++j) s += w[j] * x[j];
            f(i, c) = s;
        }
    }
    return f;
}

UnaryPotentials softmax(const UnaryPotentials& y) {
    UnaryPotentials p(y.num_pixels, y.m);
    for (std::size_t i = 0; i < y.num_pixels; ++i) {
        const auto row = y.row(i);
        const double mx = *std::ranges::max_element(row);
        double z = 0.0;
        for (int c = 0; c < y.m; ++c) z += (p(i, c) = std::exp(row[c] - mx));
        for (int c = 0; c < y.m; ++c) p(i, c) /= z;
    }
    return p;
}

SoftmaxLoss softmax_loss_grad(const UnaryPotentials& y, const LabelMap& labels) {
    if (labels.num_pixels() != y.num_pixels) throw InvalidInput("softmax_loss_grad: label count mismatch");
    SoftmaxLoss out{0.0, UnaryPotentials(y.num_pixels, y.m)};
    if (y.num_pixels == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(y.num_pixels);
    double total = 0.0;
    for (std::size_t i = 0; i < y.num_pixels; ++i) {
        const auto label = labels.labels[i];
        if (label < 0 || label >= y.m)
            throw InvalidInput("softmax_loss_grad: label " + std::to_string(label) + " outside [0, " +
                               std::to_string(y.m) + ")");
        const auto row = y.row(i);
        const double mx = *std::ranges::max_element(row);
        double z = 0.0;
        for (int c = 0; c < y.m; ++c) z += std::exp(row[c] - mx);
        const double log_z = mx + std::log(z);
        total += log_z - row[label];
        for (int c = 0; c < y.m; ++c) {
            const double prob = std::exp(row[c] - log_z);
            out.dY(i, c) = (prob - (c == label ? 1.0 : 0.0)) * inv_n;
        }
    }
    out.loss = total * inv_n;
    return out;
}

void TrainConfig::validate() const {
    if (!(base_learning_rate >= 0.0 && lr_multiplier >= 0.0 && momentum >= 0.0 && weight_decay >= 0.0))
        throw InvalidInput("training rates must be non-negative");
    if (batch_size < 1) throw InvalidInput("batch_size must be >= 1");
    if (train_radius < 1) throw InvalidInput("train radius must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("train alpha must lie in [0,1]");
}

TrainConfig TrainConfig::published() {
    TrainConfig cfg;
    cfg.base_learning_rate = 1e-5;
    cfg.lr_multiplier = 1.0;
    cfg.momentum = 0.9;
    cfg.weight_decay = 5e-5;
    cfg.batch_size = 15;
    cfg.iterations = 2000;
    cfg.train_radius = 40;
    cfg.alpha = 0.01;
    return cfg;
}

ModelCheckpoint ModelCheckpoint::initial(const FilterBankConfig& bank, int m) {
    ModelCheckpoint model;
    model.bank = bank;
    model.affinity = AffinityParams::initial(bank.k());
    model.unary = UnaryParams::zeros(m, bank.k());
    return model;
}

TrainState::TrainState(ModelCheckpoint m)
    : model(std::move(m)),
      v_theta(model.affinity.theta.size(), 0.0),
      v_weights(model.unary.weights.size(), 0.0),
      v_bias(model.unary.bias.size(), 0.0) {}

double total_loss(double seg_loss, double aff_loss, const TrainConfig& cfg) {
    return cfg.seg_loss_weight * seg_loss + cfg.aff_loss_weight * aff_loss;
}

double objective(const FeatureStack& features, const LabelMap& labels, const ModelCheckpoint& model,
                 const TrainConfig& cfg) {
    const auto p = forward(features, labels, model, cfg);
    return total_loss(p.seg.loss, p.aff.loss, cfg);
}

Gradients compute_gradients(const FeatureStack& x, const LabelMap& labels, const ModelCheckpoint& model,
                            const TrainConfig& cfg) {
    ForwardPass p = forward(x, labels, model, cfg);
    const auto& pattern = *p.W.pattern;
    const double alpha = cfg.alpha;
    const int m = model.m();
    const int k = model.k();

    UnaryPotentials& dY = p.seg.dY;
    for (double& g : dY.values) g *= cfg.seg_loss_weight;

    // y = alpha*A*f + (1-alpha)*f: f enters through both terms.
    UnaryPotentials df = rw_backward_f(p.A, dY);
    for (std::size_t i = 0; i < df.values.size(); ++i)
        df.values[i] = alpha * df.values[i] + (1.0 - alpha) * dY.values[i];
    std::vector<double> dA = rw_backward_A(dY, p.f, pattern);
    for (double& g : dA) g *= alpha;

    std::vector<double> dW = transition_backward(p.W, p.A, dA);
    for (std::size_t e = 0; e < dW.size(); ++e) dW[e] += cfg.aff_loss_weight * p.aff.dW[e];

    Gradients g;
    g.seg_loss = p.seg.loss;
    g.aff_loss = p.aff.loss;
    g.theta = affinity_backward(x, model.affinity, p.W, dW);
    g.weights.assign(static_cast<std::size_t>(m) * k, 0.0);
    g.bias.assign(static_cast<std::size_t>(m), 0.0);
    for (std::size_t i = 0; i < x.num_pixels(); ++i) {
        const auto xi = x.pixel(i);
        for (int c = 0; c < m; ++c) {
            const double d = df(i, c);
            g.bias[c] += d;
            double* w = &g.weights[static_cast<std::size_t>(c) * k];
            for (int j = 0; j < k; ++j) w[j] += d * xi[j];
        }
    }
    return g;
}

StepLosses train_step(std::span<const FeatureStack> features, std::span<const LabelMap> labels,
                      TrainState& state, const TrainConfig& cfg) {
    cfg.validate();
    if (features.empty() || features.size() != labels.size())
        throw InvalidInput("train_step: batch must be nonempty with one label map per feature stack");

    Gradients sum;
    auto& model = state.model;
    for (const auto* v : {&model.affinity.theta, &model.unary.weights, &model.unary.bias})
        if (!std::ranges::all_of(*v, [](double x) { return std::isfinite(x); }))
            throw DivergenceError("non-finite parameters at iteration " + std::to_string(model.iteration + 1),
                                  model.iteration + 1);
    sum.theta.assign(model.affinity.theta.size(), 0.0);
    sum.weights.assign(model.unary.weights.size(), 0.0);
    sum.bias.assign(model.unary.bias.size(), 0.0);
    for (std::size_t s = 0; s < features.size(); ++s) {
        const Gradients g = compute_gradients(features[s], labels[s], model, cfg);
        sum.seg_loss += g.seg_loss;
        sum.aff_loss += g.aff_loss;
        for (std::size_t i = 0; i < g.theta.size(); ++i) sum.theta[i] += g.theta[i];
        for (std::size_t i = 0; i < g.weights.size(); ++i) sum.weights[i] += g.weights[i];
        for (std::size_t i = 0; i < g.bias.size(); ++i) sum.bias[i] += g.bias[i];
    }
    const double inv_b = 1.0 / static_cast<double>(features.size());
    for (auto* v : {&sum.theta, &sum.weights, &sum.bias})
        for (double& x : *v) x *= inv_b;

    StepLosses losses{sum.seg_loss * inv_b, sum.aff_loss * inv_b, 0.0};
    losses.total = total_loss(losses.seg_loss, losses.aff_loss, cfg);
    if (!std::isfinite(losses.total))
        throw DivergenceError("non-finite loss at iteration " + std::to_string(model.iteration + 1),
                              model.iteration + 1);

    sgd_update(model.affinity.theta, state.v_theta, sum.theta, cfg);
    sgd_update(model.unary.weights, state.v_weights, sum.weights, cfg);
    sgd_update(model.unary.bias, state.v_bias, sum.bias, cfg);
    ++model.iteration;
    return losses;
}

StepLosses train_step(const Sample& sample, TrainState& state, const TrainConfig& cfg) {
    const FeatureStack x = compute_features(sample.image, state.model.bank);
    return train_step(std::span<const FeatureStack>(&x, 1), std::span<const LabelMap>(&sample.labels, 1), state,
                      cfg);
}

std::string TrainResult::log_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "iter,seg_loss,aff_loss\n";
    for (const auto& e : log) out << e.iter << ',' << e.seg_loss << ',' << e.aff_loss << '\n';
    return out.str();
}

TrainResult train(std::span<const Sample> dataset, const TrainConfig& cfg, const ModelCheckpoint& initial,
                  const TrainProgress& progress) {
    cfg.validate();
    if (dataset.empty()) throw InvalidInput("train: dataset is empty");

    TrainState state(initial);
    std::mt19937_64 rng(cfg.seed);

    // Features depend only on the image and the fixed filter bank, so each
    // (sample, flip) pair is computed once.
    std::map<std::pair<std::size_t, bool>, std::pair<FeatureStack, LabelMap>> cache;
    const auto fetch = [&](std::size_t idx, bool flip) -> const std::pair<FeatureStack, LabelMap>& {
        auto it = cache.find({idx, flip});
        if (it == cache.end()) {
            const Sample& s = dataset[idx];
            auto entry = flip ? std::make_pair(compute_features(hflip(s.image), initial.bank), hflip(s.labels))
                              : std::make_pair(compute_features(s.image, initial.bank), s.labels);
            it = cache.emplace(std::make_pair(idx, flip), std::move(entry)).first;
        }
        return it->second;
    };

    std::vector<std::size_t> order(dataset.size());
    std::size_t cursor = order.size();
    TrainResult result;
    std::vector<FeatureStack> xs;
    std::vector<LabelMap> ys;
    for (std::size_t it = 1; it <= cfg.iterations; ++it) {
        xs.clear();
        ys.clear();
        for (std::size_t b = 0; b < cfg.batch_size; ++b) {
            if (cursor == order.size()) {
                for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
                for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[draw_below(rng, i)]);
                cursor = 0;
            }
            const std::size_t idx = order[cursor++];
            const bool flip = cfg.augment_hflip && (rng() & 1u);
            const auto& [x, y] = fetch(idx, flip);
            xs.push_back(x);
            ys.push_back(y);
        }
        StepLosses losses;
        try {
            losses = train_step(xs, ys, state, cfg);
        } catch (const DivergenceError& e) {
            throw DivergenceError("training diverged at iteration " + std::to_string(it) +
                                      " (non-finite loss); try a smaller learning rate",
                                  it);
        }
        result.log.push_back({it, losses.seg_loss, losses.aff_loss});
        if (progress) progress(result.log.back());
    }
    result.model = state.model;
    return result;
}

std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
    std::vector<double> out(series.size(), 0.0);
    double acc = 0.0;
    for (std::size_t t = 0; t < series.size(); ++t) {
        acc += series[t];
        if (t >= window) acc -= series[t - window];
        out[t] = acc / static_cast<double>(std::min(t + 1, window));
    }
    return out;
}

} // namespace rwn
