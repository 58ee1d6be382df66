#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "c4/cascade.hpp"

namespace c4 {

namespace {

constexpr char kMagic[4] = {'C', '4', 'M', 'D'};
constexpr uint32_t kVersion = 1;

using json = nlohmann::json;

std::string tensor_name(int stage, size_t layer, const char* kind) {
    std::ostringstream os;
    os << "stage" << stage << ".conv" << layer << "." << kind;
    return os.str();
}

[[noreturn]] void truncated(size_t offset) {
    throw FormatError("model file truncated at offset " + std::to_string(offset));
}

} // namespace

void save_model(const CascadeModel& model, const std::string& path) {
    if (model.num_stages() < 1)
        throw ConfigError("save_model: empty model");
    const StageNetConfig& cfg = model.stages[0].config;

    json header;
    header["format"] = "c4-cascade";
    header["stages"] = model.num_stages();
    header["dropout_p"] = cfg.dropout_p;
    header["layers"] = json::array();
    for (const auto& l : cfg.layers)
        header["layers"].push_back({{"out_channels", l.out_channels},
                                    {"kernel", l.kernel},
                                    {"stride", l.stride},
                                    {"padding", l.padding}});
    header["tensors"] = json::array();
    for (int s = 0; s < model.num_stages(); ++s) {
        const StageNet& net = model.stages[static_cast<size_t>(s)];
        for (size_t i = 0; i < net.weights.size(); ++i) {
            header["tensors"].push_back(
                {{"name", tensor_name(s, i, "weight")}, {"shape", net.weights[i]->shape}});
            header["tensors"].push_back(
                {{"name", tensor_name(s, i, "bias")}, {"shape", net.biases[i]->shape}});
        }
    }
    const std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open model file for writing: " + path);
    out.write(kMagic, 4);
    uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    uint64_t header_len = header_str.size();
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& s : model.stages) {
        for (size_t i = 0; i < s.weights.size(); ++i) {
            out.write(reinterpret_cast<const char*>(s.weights[i]->values.data()),
                      static_cast<std::streamsize>(s.weights[i]->values.size() * sizeof(double)));
            out.write(reinterpret_cast<const char*>(s.biases[i]->values.data()),
                      static_cast<std::streamsize>(s.biases[i]->values.size() * sizeof(double)));
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

CascadeModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path);

    char magic[4];
    if (!in.read(magic, 4)) truncated(0);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad magic at offset 0 (not a model file)");

    uint32_t version = 0;
    if (!in.read(reinterpret_cast<char*>(&version), sizeof(version))) truncated(4);
    if (version != kVersion)
        throw FormatError("unsupported model version " + std::to_string(version) + " at offset 4");

    uint64_t header_len = 0;
    if (!in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len))) truncated(8);
    if (header_len == 0 || header_len > (1u << 24))
        throw FormatError("implausible header length at offset 8");

    std::string header_str(header_len, '\0');
    if (!in.read(header_str.data(), static_cast<std::streamsize>(header_len))) truncated(16);

    json header;
    try {
        header = json::parse(header_str);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad JSON header at offset 16: ") + e.what());
    }

    StageNetConfig cfg;
    int stages = 0;
    std::vector<std::pair<std::string, std::vector<int>>> index;
    try {
        if (header.at("format").get<std::string>() != "c4-cascade")
            throw FormatError("unknown model format tag");
        stages = header.at("stages").get<int>();
        cfg.dropout_p = header.at("dropout_p").get<double>();
        for (const auto& l : header.at("layers"))
            cfg.layers.push_back({l.at("out_channels").get<int>(), l.at("kernel").get<int>(),
                                  l.at("stride").get<int>(), l.at("padding").get<int>()});
        for (const auto& t : header.at("tensors"))
            index.emplace_back(t.at("name").get<std::string>(),
                               t.at("shape").get<std::vector<int>>());
    } catch (const json::exception& e) {
        throw FormatError(std::string("incomplete model header: ") + e.what());
    }
    if (stages < 1) throw FormatError("model header declares no stages");
    cfg.validate();
    if (index.size() != static_cast<size_t>(stages) * cfg.layers.size() * 2)
        throw FormatError("model header tensor index does not match architecture");

    // Build the model structurally, then overwrite parameters from payload.
    Rng scratch(0);
    CascadeModel model = make_cascade(cfg, stages, scratch);

    size_t offset = 16 + header_len;
    size_t idx = 0;
    for (int s = 0; s < stages; ++s) {
        StageNet& net = model.stages[static_cast<size_t>(s)];
        for (size_t i = 0; i < net.weights.size(); ++i) {
            for (TensorPtr t : {net.weights[i], net.biases[i]}) {
                const auto& [name, shape] = index[idx];
                const char* kind = (t == net.weights[i]) ? "weight" : "bias";
                if (name != tensor_name(s, i, kind) || shape != t->shape)
                    throw FormatError("model header tensor '" + name +
                                      "' does not match declared architecture");
                const size_t bytes = t->values.size() * sizeof(double);
                if (!in.read(reinterpret_cast<char*>(t->values.data()),
                             static_cast<std::streamsize>(bytes)))
                    truncated(offset);
                offset += bytes;
                ++idx;
            }
        }
    }
    // Payload longer than the header declares is as malformed as truncation.
    char extra;
    if (in.read(&extra, 1))
        throw FormatError("trailing bytes after model payload at offset " + std::to_string(offset));
    return model;
}

} // namespace c4
