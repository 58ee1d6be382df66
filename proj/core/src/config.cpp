#include "c4/config.hpp"

#include <fstream>
#include <sstream>

namespace c4 {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(trim(item)));
        } catch (const std::exception&) {
            throw FormatError("config: bad number in list for key '" + key + "'");
        }
    }
    return out;
}

double parse_num(const std::string& s, const std::string& key) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw FormatError("config: bad number for key '" + key + "'");
    }
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);

    RunConfig cfg;
    std::vector<double> channels, strides;
    int kernel = 3;
    bool have_arch = false;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));

        if (key == "batch_size") cfg.train.batch_size = static_cast<int>(parse_num(value, key));
        else if (key == "learning_rate") cfg.train.learning_rate = parse_num(value, key);
        else if (key == "pretrain_epochs") cfg.train.pretrain_epochs = static_cast<int>(parse_num(value, key));
        else if (key == "finetune_epochs") cfg.train.finetune_epochs = static_cast<int>(parse_num(value, key));
        else if (key == "seed") cfg.train.seed = static_cast<uint64_t>(parse_num(value, key));
        else if (key == "loss_weights") cfg.train.loss_weights = parse_list(value, key);
        else if (key == "stop_gradient") cfg.train.stop_gradient = parse_num(value, key) != 0.0;
        else if (key == "crop_scale_min") cfg.augment.crop_scale_min = parse_num(value, key);
        else if (key == "crop_scale_max") cfg.augment.crop_scale_max = parse_num(value, key);
        else if (key == "rotation_range") cfg.augment.rotation_range_degrees = parse_num(value, key);
        else if (key == "output_size") cfg.augment.output_size = static_cast<int>(parse_num(value, key));
        else if (key == "hflip_prob") cfg.augment.hflip_prob = parse_num(value, key);
        else if (key == "illum_rescale_min") cfg.augment.illum_rescale_min = parse_num(value, key);
        else if (key == "illum_rescale_max") cfg.augment.illum_rescale_max = parse_num(value, key);
        else if (key == "rescales_per_image") cfg.augment.rescales_per_image = static_cast<int>(parse_num(value, key));
        else if (key == "gamma") cfg.augment.gamma = parse_num(value, key);
        else if (key == "conv_channels") { channels = parse_list(value, key); have_arch = true; }
        else if (key == "conv_kernel") kernel = static_cast<int>(parse_num(value, key));
        else if (key == "conv_strides") { strides = parse_list(value, key); have_arch = true; }
        else if (key == "dropout_p") cfg.arch.dropout_p = parse_num(value, key);
        else throw FormatError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }

    if (have_arch) {
        if (channels.empty() || strides.size() != channels.size())
            throw FormatError("config: conv_channels and conv_strides must be lists of equal length");
        double dropout = cfg.arch.dropout_p;
        cfg.arch.layers.clear();
        for (size_t i = 0; i < channels.size(); ++i)
            cfg.arch.layers.push_back({static_cast<int>(channels[i]), kernel,
                                       static_cast<int>(strides[i]), kernel / 2});
        cfg.arch.dropout_p = dropout;
        cfg.arch.validate();
    }
    cfg.train.validate();
    cfg.augment.validate();
    return cfg;
}

void save_run_config(const RunConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open config file for writing: " + path);
    out << "batch_size = " << config.train.batch_size << '\n'
        << "learning_rate = " << config.train.learning_rate << '\n'
        << "pretrain_epochs = " << config.train.pretrain_epochs << '\n'
        << "finetune_epochs = " << config.train.finetune_epochs << '\n'
        << "seed = " << config.train.seed << '\n'
        << "stop_gradient = " << (config.train.stop_gradient ? 1 : 0) << '\n';
    if (!config.train.loss_weights.empty()) {
        out << "loss_weights = ";
        for (size_t i = 0; i < config.train.loss_weights.size(); ++i)
            out << (i ? "," : "") << config.train.loss_weights[i];
        out << '\n';
    }
    out << "crop_scale_min = " << config.augment.crop_scale_min << '\n'
        << "crop_scale_max = " << config.augment.crop_scale_max << '\n'
        << "rotation_range = " << config.augment.rotation_range_degrees << '\n'
        << "output_size = " << config.augment.output_size << '\n'
        << "hflip_prob = " << config.augment.hflip_prob << '\n'
        << "illum_rescale_min = " << config.augment.illum_rescale_min << '\n'
        << "illum_rescale_max = " << config.augment.illum_rescale_max << '\n'
        << "rescales_per_image = " << config.augment.rescales_per_image << '\n'
        << "gamma = " << config.augment.gamma << '\n';
    out << "conv_channels = ";
    for (size_t i = 0; i < config.arch.layers.size(); ++i)
        out << (i ? "," : "") << config.arch.layers[i].out_channels;
    out << "\nconv_strides = ";
    for (size_t i = 0; i < config.arch.layers.size(); ++i)
        out << (i ? "," : "") << config.arch.layers[i].stride;
    out << "\nconv_kernel = " << config.arch.layers[0].kernel << '\n'
        << "dropout_p = " << config.arch.dropout_p << '\n';
}

} // namespace c4
