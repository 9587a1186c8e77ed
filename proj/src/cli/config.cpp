#include "ivoct/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace ivoct::config {

namespace {

namespace pt = boost::property_tree;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("expected a number");
    return v;
}

template <typename T>
T parse_unsigned(const std::string& s) {
    T v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("expected a non-negative integer");
    }
    return v;
}

int parse_int(const std::string& s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("expected an integer");
    return v;
}

bool parse_bool(const std::string& s) {
    std::string t = s;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw std::invalid_argument("expected true or false");
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

struct Field {
    std::string key;
    std::function<std::string()> get;
    std::function<void(const std::string&)> set;
};

struct Section {
    std::string name;
    std::vector<Field> fields;
};

template <typename T>
Field size_field(std::string key, T& ref) {
    return {std::move(key), [&ref] { return std::to_string(ref); },
            [&ref](const std::string& s) { ref = parse_unsigned<T>(s); }};
}

Field double_field(std::string key, double& ref) {
    return {std::move(key), [&ref] { return format_double(ref); },
            [&ref](const std::string& s) { ref = parse_double(s); }};
}

Field int_field(std::string key, int& ref) {
    return {std::move(key), [&ref] { return std::to_string(ref); },
            [&ref](const std::string& s) { ref = parse_int(s); }};
}

Field bool_field(std::string key, bool& ref) {
    return {std::move(key), [&ref] { return format_bool(ref); },
            [&ref](const std::string& s) { ref = parse_bool(s); }};
}

Field path_field(std::string key, std::filesystem::path& ref) {
    return {std::move(key), [&ref] { return ref.string(); },
            [&ref](const std::string& s) { ref = s; }};
}

Field representation_field(std::string key, Representation& ref) {
    return {std::move(key), [&ref] { return std::string(to_string(ref)); },
            [&ref](const std::string& s) { ref = parse_representation(s); }};
}

std::vector<Section> phantom_sections(phantom::PhantomSpec& p) {
    return {{"phantom",
             {size_field("num_patients", p.num_patients), size_field("frames_per_patient", p.frames_per_patient),
              size_field("total_frames", p.total_frames), double_field("plaque_prevalence", p.plaque_prevalence),
              size_field("depth_samples", p.depth_samples), size_field("num_ascans", p.num_ascans),
              bool_field("guide_wire", p.guide_wire), double_field("noise_level", p.noise_level),
              double_field("mu_normal", p.mu_normal), double_field("mu_plaque", p.mu_plaque),
              size_field("seed", p.seed)}}};
}

std::vector<Section> run_sections(RunConfig& c) {
    auto& a = c.augment;
    auto& m = c.model;
    auto& t = c.train;
    auto& p = c.paths;
    return {
        {"augment",
         {representation_field("representation", a.representation), size_field("resize_rows", a.resize_to.rows),
          size_field("resize_cols", a.resize_to.cols), size_field("crop_rows", a.crop_to.rows),
          size_field("crop_cols", a.crop_to.cols), double_field("flip_probability", a.flip_probability),
          double_field("rotation_min_deg", a.rotation_min_deg), double_field("rotation_max_deg", a.rotation_max_deg),
          size_field("seed", a.seed)}},
        {"model",
         {{"backbone", [&m] { return std::string(to_string(m.backbone)); },
           [&m](const std::string& s) { m.backbone = parse_backbone(s); }},
          bool_field("pretrained", m.pretrained), double_field("dropout_p", m.dropout_p),
          int_field("num_classes", m.num_classes), size_field("input_rows", m.input_size.rows),
          size_field("input_cols", m.input_size.cols), size_field("init_seed", c.init_seed)}},
        {"train",
         {int_field("epochs", t.epochs), int_field("batch_size", t.batch_size),
          {"learning_rate", [&t] { return t.learning_rate ? format_double(*t.learning_rate) : std::string("auto"); },
           [&t](const std::string& s) {
               if (s == "auto") {
                   t.learning_rate.reset();
               } else {
                   t.learning_rate = parse_double(s);
               }
           }},
          {"optimizer", [&t] { return std::string(model::to_string(t.optimizer)); },
           [&t](const std::string& s) { t.optimizer = model::parse_optimizer(s); }},
          double_field("momentum", t.momentum), size_field("seed", t.seed),
          representation_field("representation", t.representation), bool_field("freeze_backbone", t.freeze_backbone),
          bool_field("strict_deterministic", t.strict_deterministic), size_field("num_workers", t.num_workers)}},
        {"paths",
         {path_field("data_root", p.data_root), path_field("output_dir", p.output_dir),
          path_field("checkpoint", p.checkpoint), path_field("weights_cache", p.weights_cache)}},
    };
}

void apply_section(const Section& section, const pt::ptree& tree, const std::string& source) {
    for (const auto& [key, node] : tree) {
        if (!node.empty()) throw ConfigError(source + ": nested key '" + section.name + "." + key + "'");
        const auto it = std::find_if(section.fields.begin(), section.fields.end(),
                                     [&](const Field& f) { return f.key == key; });
        if (it == section.fields.end()) {
            throw ConfigError(source + ": unknown key '" + key + "' in [" + section.name + "]");
        }
        try {
            it->set(node.data());
        } catch (const std::exception& e) {
            throw ConfigError(source + ": [" + section.name + "] " + key + " = '" + node.data() + "': " + e.what());
        }
    }
}

void write_section(std::ostream& out, const Section& section) {
    out << '[' << section.name << "]\n";
    for (const auto& f : section.fields) out << f.key << " = " << f.get() << '\n';
    out << '\n';
}

}  // namespace

void RunConfig::validate() const {
    try {
        if (phantom) phantom->validate();
        augment.validate();
        model.validate();
        train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (augment.representation != train.representation) {
        throw ConfigError("augment.representation (" + std::string(to_string(augment.representation)) +
                          ") differs from train.representation (" + std::string(to_string(train.representation)) +
                          ")");
    }
    if (model.input_size != augment.crop_to) {
        throw ConfigError("model input size must equal the augmentation crop size");
    }
}

RunConfig default_run_config() {
    RunConfig c;
    c.phantom = phantom::PhantomSpec{};
    c.model.input_size = c.augment.crop_to;
    c.train.representation = c.augment.representation;
    return c;
}

RunConfig parse_run_config(std::istream& in, const std::string& source_name) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source_name + ": line " + std::to_string(e.line()) + ": " + e.message());
    }
    RunConfig c = default_run_config();
    c.phantom.reset();
    for (const auto& [name, node] : tree) {
        if (name == "phantom") {
            phantom::PhantomSpec spec;
            apply_section(phantom_sections(spec).front(), node, source_name);
            c.phantom = spec;
            continue;
        }
        const auto sections = run_sections(c);
        const auto it = std::find_if(sections.begin(), sections.end(), [&](const Section& s) { return s.name == name; });
        if (it == sections.end()) throw ConfigError(source_name + ": unknown section [" + name + "]");
        apply_section(*it, node, source_name);
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    return parse_run_config(in, path.string());
}

std::string format_run_config(const RunConfig& config) {
    RunConfig c = config;
    std::ostringstream out;
    if (c.phantom) write_section(out, phantom_sections(*c.phantom).front());
    for (const auto& s : run_sections(c)) write_section(out, s);
    return out.str();
}

}  // namespace ivoct::config
