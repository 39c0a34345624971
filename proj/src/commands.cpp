#include "rwn/commands.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rwn/checkpoint.hpp"
#include "rwn/error.hpp"
#include "rwn/pnm.hpp"
#include "rwn/random_walk.hpp"

namespace rwn::cli {
namespace {

std::ofstream open_text(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

std::string index_name(std::size_t i) {
    std::ostringstream s;
    s << std::setw(5) << std::setfill('0') << i;
    return s.str();
}

void write_f64_le(const fs::path& path, const std::vector<double>& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (double v : values) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
        out.write(reinterpret_cast<const char*>(b), 8);
    }
}

void dump_graph(const fs::path& path, const AffinityMatrix& W, const TransitionMatrix& A) {
    auto out = open_text(path);
    out << std::setprecision(17);
    const auto& p = *W.pattern;
    out << "# W\n";
    for (std::size_t i = 0; i < p.num_pixels(); ++i)
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) out << i << ' ' << p.cols[e] << ' ' << W.w[e] << '\n';
    out << "# A\n";
    for (std::size_t i = 0; i < p.num_pixels(); ++i)
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) out << i << ' ' << p.cols[e] << ' ' << A.a[e] << '\n';
}

struct Prediction {
    LabelMap labels;
    UnaryPotentials probs;
};

Prediction predict(const Config& cfg, const ModelCheckpoint& model, const ImageTensor& image,
                   const InferOptions& options) {
    const FeatureStack x = compute_features(image, model.bank);
    const UnaryPotentials f = unary_forward(x, model.unary);
    SolverConfig solver = cfg.solver;
    if (options.alpha) solver.alpha = *options.alpha;
    const int radius = options.radius.value_or(cfg.test_radius);
    const auto pattern = build_sparsity(image.height, image.width, radius, cfg.train.metric);
    const AffinityMatrix W = affinity_forward(x, pattern, model.affinity);
    const TransitionMatrix A = transition(W);
    if (options.graph_dump) dump_graph(*options.graph_dump, W, A);
    const UnaryPotentials y = run_walk(A, f, solver, options.steps);
    return {argmax(y, image.height, image.width), softmax(y)};
}

} // namespace

Manifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open manifest " + path.string());
    Manifest m;
    const fs::path base = path.parent_path();
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        std::istringstream fields(line);
        std::string image, labels, extra;
        if (!(fields >> image)) continue;
        if (!(fields >> labels) || (fields >> extra))
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected '<image> <labels>'");
        m.entries.emplace_back(base / image, base / labels);
    }
    return m;
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
    auto out = open_text(path);
    const fs::path base = path.parent_path();
    for (const auto& [image, labels] : manifest.entries)
        out << fs::relative(image, base).generic_string() << ' ' << fs::relative(labels, base).generic_string() << '\n';
}

std::vector<Sample> load_samples(const fs::path& manifest_path) {
    std::vector<Sample> samples;
    for (const auto& [image, labels] : read_manifest(manifest_path).entries) {
        Sample s{read_ppm(image), read_pgm(labels)};
        if (s.image.height != s.labels.height || s.image.width != s.labels.width)
            throw FormatError(image.string() + " and " + labels.string() + " differ in size");
        samples.push_back(std::move(s));
    }
    return samples;
}

int cmd_generate(const Config& cfg, const fs::path& out_dir, std::ostream& log) {
    cfg.scene.validate();
    const auto write_split = [&](const std::string& split, std::size_t count, std::size_t first) {
        const fs::path dir = out_dir / split;
        fs::create_directories(dir);
        Manifest manifest;
        for (std::size_t i = 0; i < count; ++i) {
            const Sample s = generate_scene(cfg.scene, first + i);
            const fs::path image = dir / (index_name(i) + ".ppm");
            const fs::path labels = dir / (index_name(i) + ".pgm");
            write_ppm(image, s.image);
            write_pgm(labels, s.labels);
            manifest.entries.emplace_back(image, labels);
        }
        write_manifest(out_dir / (split + ".txt"), manifest);
    };
    write_split("train", cfg.data.train_count, 0);
    write_split("test", cfg.data.test_count, cfg.data.train_count);
    log << "generated " << cfg.data.train_count << " train and " << cfg.data.test_count << " test images in "
        << out_dir.string() << '\n';
    return kOk;
}

int cmd_train(const Config& cfg, const fs::path& manifest, const fs::path& out_checkpoint,
              const std::optional<fs::path>& loss_csv, std::ostream& log) {
    const auto samples = load_samples(manifest);
    if (samples.empty()) throw InvalidInput("training manifest " + manifest.string() + " is empty");
    const int m = cfg.scene.num_classes;
    for (const auto& s : samples)
        for (auto l : s.labels.labels)
            if (l < 0 || l >= m)
                throw InvalidInput("label " + std::to_string(l) + " exceeds scene.num_classes = " + std::to_string(m));

    const auto& t = cfg.train;
    log << "run: lr=" << t.learning_rate() << " base_lr=" << t.base_learning_rate << " lr_multiplier="
        << t.lr_multiplier << " momentum=" << t.momentum << " weight_decay=" << t.weight_decay
        << " batch=" << t.batch_size << " iterations=" << t.iterations << " alpha=" << t.alpha
        << " train_radius=" << t.train_radius << " seg_weight=" << t.seg_loss_weight
        << " aff_weight=" << t.aff_loss_weight << " seed=" << t.seed << " hflip=" << (t.augment_hflip ? 1 : 0)
        << " k=" << cfg.features.k() << " m=" << m << " samples=" << samples.size() << '\n';

    const auto progress = [&](const LossLogEntry& e) {
        if (e.iter % 50 == 0 || e.iter == t.iterations)
            log << "iter " << e.iter << " seg_loss " << e.seg_loss << " aff_loss " << e.aff_loss << '\n';
    };
    const TrainResult result = train(samples, t, ModelCheckpoint::initial(cfg.features, m), progress);
    save_checkpoint(out_checkpoint, result.model);
    if (loss_csv) open_text(*loss_csv) << result.log_csv();
    log << "wrote " << out_checkpoint.string() << '\n';
    return kOk;
}

int cmd_infer(const Config& cfg, const fs::path& checkpoint, const fs::path& image_path, const fs::path& out_labels,
              const InferOptions& options, std::ostream& log) {
    const ModelCheckpoint model = load_checkpoint(checkpoint);
    const ImageTensor image = read_ppm(image_path);
    const Prediction pred = predict(cfg, model, image, options);
    if (out_labels.has_parent_path()) fs::create_directories(out_labels.parent_path());
    write_pgm(out_labels, pred.labels);
    if (options.probs_out) {
        write_f64_le(*options.probs_out, pred.probs.values);
        auto side = open_text(fs::path(options.probs_out->string() + ".txt"));
        side << image.height << ' ' << image.width << ' ' << pred.probs.m << '\n';
    }
    log << "wrote " << out_labels.string() << '\n';
    return kOk;
}

int cmd_infer_manifest(const Config& cfg, const fs::path& checkpoint, const fs::path& manifest,
                       const fs::path& out_dir, const InferOptions& options, std::ostream& log) {
    const ModelCheckpoint model = load_checkpoint(checkpoint);
    fs::create_directories(out_dir);
    std::size_t n = 0;
    for (const auto& [image, labels] : read_manifest(manifest).entries) {
        write_pgm(out_dir / labels.filename(), predict(cfg, model, read_ppm(image), options).labels);
        ++n;
    }
    log << "wrote " << n << " label maps to " << out_dir.string() << '\n';
    return kOk;
}

int cmd_eval(const Config& cfg, const fs::path& pred_dir, const fs::path& gt_dir, const EvalOutputs& outputs,
             std::ostream& log) {
    std::vector<fs::path> gt_files;
    for (const auto& entry : fs::directory_iterator(gt_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") gt_files.push_back(entry.path());
    std::ranges::sort(gt_files);
    if (gt_files.empty()) throw FormatError("no .pgm label maps in " + gt_dir.string());
    for (const auto& g : gt_files)
        if (!fs::exists(pred_dir / g.filename()))
            throw FormatError("missing prediction for " + g.filename().string() + " (expected " +
                              (pred_dir / g.filename()).string() + ")");

    const int max_w = cfg.eval.trimap_max_width;
    std::vector<int> widths;
    for (int w = 1; w <= max_w; ++w) widths.push_back(w);
    std::vector<double> band_wrong(widths.size(), 0.0), band_total(widths.size(), 0.0);
    std::vector<PrPoint> pr_sum;
    std::size_t pr_count = 0;

    auto csv = open_text(outputs.metrics_csv);
    csv << "image,mean_iou,overall_iou,mf,ap\n" << std::setprecision(10);
    double iou_sum = 0.0;
    for (const auto& g : gt_files) {
        const LabelMap gt = read_pgm(g);
        const LabelMap pred = read_pgm(pred_dir / g.filename());
        if (pred.height != gt.height || pred.width != gt.width)
            throw FormatError(g.filename().string() + ": prediction and ground truth differ in size");
        int m = cfg.scene.num_classes;
        for (auto l : gt.labels) m = std::max(m, l + 1);
        for (auto l : pred.labels) m = std::max(m, l + 1);

        const double miou = mean_iou(pred, gt, m);
        iou_sum += miou;
        double mf = std::nan(""), ap = std::nan("");
        const PixelMask gt_boundary = label_boundary(gt);
        if (gt_boundary.count() > 0) {
            const auto pr = boundary_pr(extract_boundary_strength(one_hot(pred, m), pred.height, pred.width),
                                        gt_boundary, cfg.eval.boundary_tolerance, cfg.eval.thresholds);
            mf = pr.mf;
            ap = pr.ap;
            if (pr_sum.empty()) pr_sum.assign(pr.curve.size(), PrPoint{});
            for (std::size_t i = 0; i < pr.curve.size(); ++i) {
                pr_sum[i].threshold = pr.curve[i].threshold;
                pr_sum[i].precision += pr.curve[i].precision;
                pr_sum[i].recall += pr.curve[i].recall;
            }
            ++pr_count;
        }
        const auto dist = distance_transform(gt_boundary);
        for (std::size_t w = 0; w < widths.size(); ++w)
            for (std::size_t i = 0; i < dist.size(); ++i)
                if (dist[i] < widths[w]) {
                    band_total[w] += 1.0;
                    band_wrong[w] += pred.labels[i] != gt.labels[i];
                }
        csv << g.stem().string() << ',' << miou << ',' << overall_iou(pred, gt) << ',' << mf << ',' << ap << '\n';
    }
    if (outputs.trimap_csv) {
        auto out = open_text(*outputs.trimap_csv);
        out << "width,error\n" << std::setprecision(10);
        for (std::size_t w = 0; w < widths.size(); ++w)
            out << widths[w] << ',' << (band_total[w] > 0 ? band_wrong[w] / band_total[w] : std::nan("")) << '\n';
    }
    if (outputs.pr_csv) {
        auto out = open_text(*outputs.pr_csv);
        out << "threshold,precision,recall\n" << std::setprecision(10);
        for (const auto& p : pr_sum)
            out << p.threshold << ',' << p.precision / pr_count << ',' << p.recall / pr_count << '\n';
    }
    log << "evaluated " << gt_files.size() << " images, mean IOU " << 100.0 * iou_sum / gt_files.size() << '\n';
    return kOk;
}

int cmd_ablate(const Config& cfg, const fs::path& manifest, const AblateOptions& options, const fs::path& out_csv,
               std::ostream& log) {
    const auto samples = load_samples(manifest);
    if (samples.empty()) throw InvalidInput("ablation manifest " + manifest.string() + " is empty");
    const int m = cfg.scene.num_classes;
    const auto cases = build_oracle_cases(samples, cfg.corrupt, m);
    const auto rows = options.sweep == Sweep::steps
                          ? steps_sweep(cases, m, cfg.test_radius, cfg.solver, options.max_steps)
                          : radius_sweep(cases, m, options.radii, cfg.solver, options.single_step_radius);
    open_text(out_csv) << ablation_csv(rows);
    log << "baseline (corrupted) mean IOU " << mean_iou_points(baseline_predictions(cases), cases, m) << '\n';
    for (const auto& r : rows) log << r.setting << " R=" << r.radius << " mean IOU " << r.mean_iou << '\n';
    return kOk;
}

int cmd_bench(const Config& cfg, const std::vector<std::pair<int, int>>& sizes, int radius, bool include_dense,
              const fs::path& out_csv, std::ostream& log) {
    if (sizes.empty()) throw InvalidInput("bench needs at least one size");
    BenchOptions options;
    options.num_classes = cfg.scene.num_classes;
    options.include_dense = include_dense;
    const BenchReport report = bench_step_vs_solve(sizes, radius, cfg.solver, options);
    const std::string csv = report.to_csv();
    open_text(out_csv) << csv;
    log << csv;
    return kOk;
}

namespace {

std::vector<std::pair<int, int>> parse_sizes(const std::string& text) {
    const auto positive = [](std::string_view t, int& v) {
        const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        return ec == std::errc{} && end == t.data() + t.size() && v > 0;
    };
    std::vector<std::pair<int, int>> sizes;
    std::istringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        const std::string_view sv(item);
        const auto x = sv.find('x');
        int h = 0, w = 0;
        const bool ok = x == std::string_view::npos ? positive(sv, h) && positive(sv, w)
                                                    : positive(sv.substr(0, x), h) && positive(sv.substr(x + 1), w);
        if (!ok) throw InvalidInput("bad size '" + item + "' (expected HxW or N)");
        sizes.emplace_back(h, w);
    }
    return sizes;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read config file " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Random-walk label diffusion: data generation, training, inference, evaluation"};
    app.require_subcommand(0, 1);

    std::string preset = "default";
    std::string config_path;
    std::vector<std::string> overrides;
    bool print_config = false;
    app.add_option("--preset", preset, "Base configuration: default, published or smoke");
    app.add_option("--config", config_path, "Config file of 'section.key = value' lines");
    app.add_option("--set", overrides, "Override one key: section.key=value")->take_all();
    app.add_flag("--print-config", print_config, "Print the effective configuration and exit");

    std::string out_path, manifest, checkpoint, image, pred_dir, gt_dir, loss_csv, probs, graph_dump, trimap_csv,
        pr_csv, steps = "converge", sweep = "steps", sizes = "32x32,48x48,64x64,96x96,128x128";
    std::optional<int> radius;
    std::optional<double> alpha;
    std::size_t max_steps = 20;
    bool no_dense = false;

    auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
    gen->add_option("--out", out_path, "Output directory")->required();

    auto* tr = app.add_subcommand("train", "Jointly train the unary and affinity branches");
    tr->add_option("--manifest", manifest, "Training manifest")->required();
    tr->add_option("--out", out_path, "Checkpoint path")->required();
    tr->add_option("--loss-csv", loss_csv, "Loss log (iter,seg_loss,aff_loss)");

    auto* inf = app.add_subcommand("infer", "Predict labels for one image or a manifest");
    inf->add_option("--checkpoint", checkpoint)->required();
    auto* image_opt = inf->add_option("--image", image, "Input PPM");
    auto* man_opt = inf->add_option("--manifest", manifest, "Predict every manifest image into --out as a directory");
    image_opt->excludes(man_opt);
    inf->add_option("--out", out_path, "Label PGM (or directory with --manifest)")->required();
    inf->add_option("--steps", steps, "Walk steps, or 'converge'");
    inf->add_option("--radius", radius, "Walk radius (default solver.radius)");
    inf->add_option("--alpha", alpha, "Damping alpha (default solver.alpha)");
    inf->add_option("--probs", probs, "Raw little-endian f64 probability dump");
    inf->add_option("--dump-graph", graph_dump, "Write W and A as 'i j value' triplets");

    auto* ev = app.add_subcommand("eval", "Score predicted label maps against ground truth");
    ev->add_option("--pred", pred_dir)->required();
    ev->add_option("--gt", gt_dir)->required();
    ev->add_option("--out", out_path, "Metrics CSV")->required();
    ev->add_option("--trimap-csv", trimap_csv);
    ev->add_option("--pr-csv", pr_csv);

    auto* ab = app.add_subcommand("ablate", "Steps or radius sweep with oracle affinities");
    ab->add_option("--manifest", manifest)->required();
    ab->add_option("--sweep", sweep, "steps or radius")->check(CLI::IsMember({"steps", "radius"}));
    ab->add_option("--max-steps", max_steps);
    ab->add_option("--out", out_path, "Sweep CSV")->required();

    auto* be = app.add_subcommand("bench", "Time sparse steps against converged and dense solves");
    be->add_option("--sizes", sizes, "Comma-separated HxW list");
    be->add_option("--radius", radius, "Walk radius (default solver.radius)");
    be->add_flag("--no-dense", no_dense);
    be->add_option("--out", out_path, "Bench CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    Config cfg;
    try {
        cfg = Config::preset(preset);
        if (!config_path.empty()) cfg.apply(read_file(config_path));
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw InvalidInput("--set expects section.key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (print_config) {
            out << cfg.serialize();
            return kOk;
        }
        if (app.get_subcommands().empty()) {
            err << app.help();
            return kUsage;
        }
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*gen) return cmd_generate(cfg, out_path, out);
        if (*tr) return cmd_train(cfg, manifest, out_path, loss_csv.empty() ? std::nullopt : std::optional<fs::path>(loss_csv), out);
        if (*inf) {
            InferOptions o;
            if (steps != "converge") {
                try {
                    std::size_t used = 0;
                    const long long n = std::stoll(steps, &used);
                    if (used != steps.size() || n < 0) throw std::invalid_argument(steps);
                    o.steps = static_cast<std::size_t>(n);
                } catch (const std::exception&) {
                    err << "error: --steps must be a non-negative integer or 'converge'\n";
                    return kUsage;
                }
            }
            o.radius = radius;
            o.alpha = alpha;
            if (!probs.empty()) o.probs_out = probs;
            if (!graph_dump.empty()) o.graph_dump = graph_dump;
            if (!manifest.empty()) return cmd_infer_manifest(cfg, checkpoint, manifest, out_path, o, out);
            if (image.empty()) {
                err << "error: infer needs --image or --manifest\n";
                return kUsage;
            }
            return cmd_infer(cfg, checkpoint, image, out_path, o, out);
        }
        if (*ev) {
            EvalOutputs o{out_path, std::nullopt, std::nullopt};
            if (!trimap_csv.empty()) o.trimap_csv = trimap_csv;
            if (!pr_csv.empty()) o.pr_csv = pr_csv;
            return cmd_eval(cfg, pred_dir, gt_dir, o, out);
        }
        if (*ab) {
            AblateOptions o;
            o.sweep = sweep == "radius" ? Sweep::radius : Sweep::steps;
            o.max_steps = max_steps;
            return cmd_ablate(cfg, manifest, o, out_path, out);
        }
        if (*be) return cmd_bench(cfg, parse_sizes(sizes), radius.value_or(cfg.test_radius), !no_dense, out_path, out);
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsage;
}

} // namespace rwn::cli
