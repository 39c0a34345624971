#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rwn/features.hpp"
#include "rwn/solver.hpp"
#include "rwn/synth.hpp"
#include "rwn/trainer.hpp"

namespace rwn {

struct DataConfig {
    std::size_t train_count = 100;
    std::size_t test_count = 20;
};

/// Corruption applied to ground-truth unaries by the oracle-affinity harness.
struct CorruptionConfig {
    int band_width = 4;
    double flip_prob = 0.3;
    int blur_radius = 1;
    std::uint64_t seed = 5;
};

struct EvalConfig {
    double boundary_tolerance = 2.0;
    int thresholds = 50;
    int trimap_max_width = 10;
};

/// Every tunable of the pipeline. Text form is one "section.key = value" per
/// line; '#' starts a comment. Unknown keys are rejected.
struct Config {
    FilterBankConfig features;
    SceneSpec scene;
    DataConfig data;
    TrainConfig train;
    SolverConfig solver;
    int test_radius = 5;
    CorruptionConfig corrupt;
    EvalConfig eval;

    /// Throws InvalidInput for an unknown key or unparsable value.
    void set(std::string_view key, std::string_view value);
    std::string get(std::string_view key) const;

    /// Applies every line of `text` on top of the current values.
    void apply(std::string_view text);

    /// Canonical text: all keys, sorted, full precision.
    std::string serialize() const;

    static Config parse(std::string_view text);

    /// "default", "published" (literal published training recipe) or "smoke"
    /// (small scenes and 200 iterations).
    static Config preset(std::string_view name);

    static std::vector<std::string> keys();
};

} // namespace rwn
