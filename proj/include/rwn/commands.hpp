#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rwn/config.hpp"
#include "rwn/harness.hpp"

namespace rwn::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalFailure = 3 };

namespace fs = std::filesystem;

/// Image/label pairs, one "<image.ppm> <labels.pgm>" per line, paths
/// relative to the manifest's directory.
struct Manifest {
    std::vector<std::pair<fs::path, fs::path>> entries;
};

Manifest read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const Manifest& manifest);
std::vector<Sample> load_samples(const fs::path& manifest_path);

/// Writes <out>/train/*.ppm|pgm and <out>/test/*.ppm|pgm with manifests
/// <out>/train.txt and <out>/test.txt.
int cmd_generate(const Config& cfg, const fs::path& out_dir, std::ostream& log);

int cmd_train(const Config& cfg, const fs::path& manifest, const fs::path& out_checkpoint,
              const std::optional<fs::path>& loss_csv, std::ostream& log);

struct InferOptions {
    WalkSteps steps;              // nullopt: iterate to convergence
    std::optional<int> radius;    // default: config solver.radius
    std::optional<double> alpha;  // default: config solver.alpha
    std::optional<fs::path> probs_out;
    std::optional<fs::path> graph_dump;  // "i j value" triplets of W and A
};

/// Runs the unary branch and the walk on one image; writes the argmax label
/// PGM and, if requested, softmax probabilities as raw little-endian f64
/// with a "<h> <w> <m>" sidecar (<probs>.txt).
int cmd_infer(const Config& cfg, const fs::path& checkpoint, const fs::path& image, const fs::path& out_labels,
              const InferOptions& options, std::ostream& log);

/// Label maps for every manifest image, written to out_dir under the
/// label file's name.
int cmd_infer_manifest(const Config& cfg, const fs::path& checkpoint, const fs::path& manifest,
                       const fs::path& out_dir, const InferOptions& options, std::ostream& log);

struct EvalOutputs {
    fs::path metrics_csv;                  // image,mean_iou,overall_iou,mf,ap
    std::optional<fs::path> trimap_csv;    // width,error
    std::optional<fs::path> pr_csv;        // threshold,precision,recall
};

/// Scores every *.pgm in gt_dir against the same-named file in pred_dir.
int cmd_eval(const Config& cfg, const fs::path& pred_dir, const fs::path& gt_dir, const EvalOutputs& out,
             std::ostream& log);

enum class Sweep { steps, radius };

struct AblateOptions {
    Sweep sweep = Sweep::steps;
    std::size_t max_steps = 20;
    std::vector<int> radii{3, 5, 10, 20};
    int single_step_radius = 40;
};

int cmd_ablate(const Config& cfg, const fs::path& manifest, const AblateOptions& options, const fs::path& out_csv,
               std::ostream& log);

int cmd_bench(const Config& cfg, const std::vector<std::pair<int, int>>& sizes, int radius, bool include_dense,
              const fs::path& out_csv, std::ostream& log);

/// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace rwn::cli
