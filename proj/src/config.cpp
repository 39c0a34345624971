#include "rwn/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "rwn/error.hpp"

namespace rwn {
namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    throw InvalidInput("invalid value '" + std::string(value) + "' for " + std::string(key));
}

template <typename T>
T parse_int(std::string_view key, std::string_view v) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v);
    return out;
}

double parse_double(std::string_view key, std::string_view v) {
    const std::string s(v);
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(s, &used);
    } catch (const std::exception&) {
        bad_value(key, v);
    }
    if (used != s.size()) bad_value(key, v);
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad_value(key, v);
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* shape_name(ShapeType t) {
    switch (t) {
    case ShapeType::ellipse: return "ellipse";
    case ShapeType::rectangle: return "rectangle";
    case ShapeType::polygon: return "polygon";
    }
    return "?";
}

struct Field {
    std::function<std::string(const Config&)> get;
    std::function<void(Config&, std::string_view key, std::string_view)> set;
};

template <typename T>
Field int_field(T Config::*section, auto member) {
    using V = std::remove_reference_t<decltype(std::declval<T&>().*member)>;
    return {[=](const Config& c) { return std::to_string(c.*section.*member); },
            [=](Config& c, std::string_view k, std::string_view v) { c.*section.*member = parse_int<V>(k, v); }};
}

template <typename T>
Field double_field(T Config::*section, double T::*member) {
    return {[=](const Config& c) { return fmt_double(c.*section.*member); },
            [=](Config& c, std::string_view k, std::string_view v) { c.*section.*member = parse_double(k, v); }};
}

const std::map<std::string, Field, std::less<>>& fields() {
    static const std::map<std::string, Field, std::less<>> table = [] {
        std::map<std::string, Field, std::less<>> t;
        t["features.f1"] = int_field(&Config::features, &FilterBankConfig::f1);
        t["features.f2"] = int_field(&Config::features, &FilterBankConfig::f2);
        t["features.seed"] = int_field(&Config::features, &FilterBankConfig::seed);

        t["scene.height"] = int_field(&Config::scene, &SceneSpec::height);
        t["scene.width"] = int_field(&Config::scene, &SceneSpec::width);
        t["scene.num_classes"] = int_field(&Config::scene, &SceneSpec::num_classes);
        t["scene.min_shapes"] = int_field(&Config::scene, &SceneSpec::min_shapes);
        t["scene.max_shapes"] = int_field(&Config::scene, &SceneSpec::max_shapes);
        t["scene.texture_sigma"] = double_field(&Config::scene, &SceneSpec::texture_sigma);
        t["scene.noise_sigma"] = double_field(&Config::scene, &SceneSpec::noise_sigma);
        t["scene.seed"] = int_field(&Config::scene, &SceneSpec::seed);
        t["scene.shape_types"] = {
            [](const Config& c) {
                std::string s;
                for (auto type : c.scene.shape_types) s += (s.empty() ? "" : ",") + std::string(shape_name(type));
                return s;
            },
            [](Config& c, std::string_view k, std::string_view v) {
                std::vector<ShapeType> types;
                std::size_t pos = 0;
                while (pos <= v.size()) {
                    const auto comma = v.find(',', pos);
                    const auto item = trim(v.substr(pos, comma == std::string_view::npos ? v.npos : comma - pos));
                    if (item == "ellipse") types.push_back(ShapeType::ellipse);
                    else if (item == "rectangle") types.push_back(ShapeType::rectangle);
                    else if (item == "polygon") types.push_back(ShapeType::polygon);
                    else bad_value(k, v);
                    if (comma == std::string_view::npos) break;
                    pos = comma + 1;
                }
                c.scene.shape_types = std::move(types);
            }};

        t["data.train_count"] = int_field(&Config::data, &DataConfig::train_count);
        t["data.test_count"] = int_field(&Config::data, &DataConfig::test_count);

        t["train.base_learning_rate"] = double_field(&Config::train, &TrainConfig::base_learning_rate);
        t["train.lr_multiplier"] = double_field(&Config::train, &TrainConfig::lr_multiplier);
        t["train.momentum"] = double_field(&Config::train, &TrainConfig::momentum);
        t["train.weight_decay"] = double_field(&Config::train, &TrainConfig::weight_decay);
        t["train.batch_size"] = int_field(&Config::train, &TrainConfig::batch_size);
        t["train.iterations"] = int_field(&Config::train, &TrainConfig::iterations);
        t["train.radius"] = int_field(&Config::train, &TrainConfig::train_radius);
        t["train.alpha"] = double_field(&Config::train, &TrainConfig::alpha);
        t["train.seg_loss_weight"] = double_field(&Config::train, &TrainConfig::seg_loss_weight);
        t["train.aff_loss_weight"] = double_field(&Config::train, &TrainConfig::aff_loss_weight);
        t["train.seed"] = int_field(&Config::train, &TrainConfig::seed);
        t["train.augment_hflip"] = {
            [](const Config& c) { return std::string(c.train.augment_hflip ? "true" : "false"); },
            [](Config& c, std::string_view k, std::string_view v) { c.train.augment_hflip = parse_bool(k, v); }};

        t["graph.metric"] = {
            [](const Config& c) {
                return std::string(c.train.metric == NeighborhoodMetric::euclidean ? "euclidean" : "chebyshev");
            },
            [](Config& c, std::string_view k, std::string_view v) {
                if (v == "euclidean") c.train.metric = NeighborhoodMetric::euclidean;
                else if (v == "chebyshev") c.train.metric = NeighborhoodMetric::chebyshev;
                else bad_value(k, v);
            }};

        t["solver.alpha"] = double_field(&Config::solver, &SolverConfig::alpha);
        t["solver.tolerance"] = double_field(&Config::solver, &SolverConfig::tolerance);
        t["solver.max_iterations"] = int_field(&Config::solver, &SolverConfig::max_iterations);
        t["solver.mode"] = {
            [](const Config& c) {
                switch (c.solver.mode) {
                case SolverMode::iterate: return std::string("iterate");
                case SolverMode::neumann: return std::string("neumann");
                case SolverMode::dense_oracle: return std::string("dense_oracle");
                }
                return std::string("?");
            },
            [](Config& c, std::string_view k, std::string_view v) {
                if (v == "iterate") c.solver.mode = SolverMode::iterate;
                else if (v == "neumann") c.solver.mode = SolverMode::neumann;
                else if (v == "dense_oracle") c.solver.mode = SolverMode::dense_oracle;
                else bad_value(k, v);
            }};
        t["solver.radius"] = {
            [](const Config& c) { return std::to_string(c.test_radius); },
            [](Config& c, std::string_view k, std::string_view v) { c.test_radius = parse_int<int>(k, v); }};

        t["corrupt.band_width"] = int_field(&Config::corrupt, &CorruptionConfig::band_width);
        t["corrupt.flip_prob"] = double_field(&Config::corrupt, &CorruptionConfig::flip_prob);
        t["corrupt.blur_radius"] = int_field(&Config::corrupt, &CorruptionConfig::blur_radius);
        t["corrupt.seed"] = int_field(&Config::corrupt, &CorruptionConfig::seed);

        t["eval.boundary_tolerance"] = double_field(&Config::eval, &EvalConfig::boundary_tolerance);
        t["eval.thresholds"] = int_field(&Config::eval, &EvalConfig::thresholds);
        t["eval.trimap_max_width"] = int_field(&Config::eval, &EvalConfig::trimap_max_width);
        return t;
    }();
    return table;
}

const Field& lookup(std::string_view key) {
    const auto& t = fields();
    const auto it = t.find(key);
    if (it == t.end()) throw InvalidInput("unknown config key '" + std::string(key) + "'");
    return it->second;
}

} // namespace

void Config::set(std::string_view key, std::string_view value) {
    lookup(key).set(*this, key, trim(value));
}

std::string Config::get(std::string_view key) const {
    return lookup(key).get(*this);
}

void Config::apply(std::string_view text) {
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        std::string_view l = line;
        if (const auto hash = l.find('#'); hash != l.npos) l = l.substr(0, hash);
        l = trim(l);
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == l.npos) throw InvalidInput("config line " + std::to_string(line_no) + ": expected 'section.key = value'");
        set(trim(l.substr(0, eq)), trim(l.substr(eq + 1)));
    }
}

std::string Config::serialize() const {
    std::string out;
    for (const auto& [key, field] : fields()) out += key + " = " + field.get(*this) + "\n";
    return out;
}

Config Config::parse(std::string_view text) {
    Config c;
    c.apply(text);
    return c;
}

Config Config::preset(std::string_view name) {
    Config c;
    if (name == "default") return c;
    if (name == "published") {
        c.train = TrainConfig::published();
        return c;
    }
    if (name == "smoke") {
        c.scene.height = 16;
        c.scene.width = 16;
        c.scene.min_shapes = 1;
        c.scene.max_shapes = 3;
        c.data.train_count = 30;
        c.data.test_count = 10;
        c.train.iterations = 200;
        c.train.batch_size = 4;
        return c;
    }
    throw InvalidInput("unknown preset '" + std::string(name) + "' (expected default, published or smoke)");
}

std::vector<std::string> Config::keys() {
    std::vector<std::string> out;
    for (const auto& [key, field] : fields()) out.push_back(key);
    return out;
}

} // namespace rwn
