#include "c4/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "c4/errors.hpp"
#include "c4/image_io.hpp"

namespace c4 {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

int DatasetManifest::num_folds() const {
    int mx = -1;
    for (const auto& e : entries) mx = std::max(mx, e.fold);
    return mx + 1;
}

std::vector<size_t> DatasetManifest::fold_indices(int fold) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < entries.size(); ++i)
        if (entries[i].fold == fold) out.push_back(i);
    return out;
}

std::vector<size_t> DatasetManifest::complement_indices(int fold) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < entries.size(); ++i)
        if (entries[i].fold != fold) out.push_back(i);
    return out;
}

DatasetManifest load_manifest(const std::string& path, bool check_files) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path);
    const std::filesystem::path base = std::filesystem::path(path).parent_path();

    DatasetManifest m;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv(line);
        if (lineno == 1 && !fields.empty() && fields[0] == "path") continue; // header
        if (fields.size() != 7)
            throw FormatError("manifest line " + std::to_string(lineno) +
                              ": expected 7 fields (path,r,g,b,mask,fold,camera)");
        ManifestEntry e;
        e.image_path = (base / fields[0]).string();
        try {
            e.truth = Illuminant{std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3])};
        } catch (const std::exception&) {
            throw FormatError("manifest line " + std::to_string(lineno) + ": bad illuminant value");
        }
        if (!e.truth.finite_positive())
            throw FormatError("manifest line " + std::to_string(lineno) +
                              ": illuminant must be strictly positive");
        if (!fields[4].empty()) e.mask_path = (base / fields[4]).string();
        if (!fields[5].empty()) {
            try {
                e.fold = std::stoi(fields[5]);
            } catch (const std::exception&) {
                throw FormatError("manifest line " + std::to_string(lineno) + ": bad fold value");
            }
            if (e.fold < 0)
                throw FormatError("manifest line " + std::to_string(lineno) + ": negative fold");
        }
        e.camera_id = fields[6];
        if (check_files) {
            if (!std::filesystem::exists(e.image_path))
                throw FormatError("manifest line " + std::to_string(lineno) +
                                  ": missing image file " + e.image_path);
            if (!e.mask_path.empty() && !std::filesystem::exists(e.mask_path))
                throw FormatError("manifest line " + std::to_string(lineno) +
                                  ": missing mask file " + e.mask_path);
        }
        m.entries.push_back(std::move(e));
    }
    return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open manifest for writing: " + path);
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    out << "path,r,g,b,mask,fold,camera\n";
    char buf[128];
    for (const auto& e : manifest.entries) {
        std::string img = std::filesystem::proximate(e.image_path, base).string();
        std::string mask =
            e.mask_path.empty() ? "" : std::filesystem::proximate(e.mask_path, base).string();
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", e.truth.r, e.truth.g, e.truth.b);
        out << img << ',' << buf << ',' << mask << ',';
        if (e.fold >= 0) out << e.fold;
        out << ',' << e.camera_id << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void assign_folds(DatasetManifest& manifest, int k, uint64_t seed) {
    if (k < 2) throw ConfigError("assign_folds: k must be >= 2");
    std::vector<size_t> order(manifest.entries.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 0xf01d));
    // Fisher-Yates
    for (size_t i = order.size(); i > 1; --i) {
        size_t j = rng.uniform_index(i);
        std::swap(order[i - 1], order[j]);
    }
    for (size_t i = 0; i < order.size(); ++i)
        manifest.entries[order[i]].fold = static_cast<int>(i % static_cast<size_t>(k));
}

Sample load_sample(const ManifestEntry& entry) {
    Sample s;
    s.image = read_png(entry.image_path);
    if (!entry.mask_path.empty()) read_mask_png(s.image, entry.mask_path);
    s.truth = entry.truth;
    s.id = entry.image_path;
    return s;
}

void MondrianSpec::validate() const {
    if (size < 2) throw ConfigError("MondrianSpec: canvas too small");
    if (min_patches < 1 || max_patches < min_patches)
        throw ConfigError("MondrianSpec: bad patch count range");
    if (!(reflectance_min > 0.0 && reflectance_max >= reflectance_min))
        throw ConfigError("MondrianSpec: bad reflectance range");
    if (!(illum_min > 0.0 && illum_max >= illum_min))
        throw ConfigError("MondrianSpec: bad illuminant range");
    if (noise_std < 0.0) throw ConfigError("MondrianSpec: negative noise std");
}

MondrianScene generate_mondrian_scene(const MondrianSpec& spec, Rng& rng) {
    spec.validate();
    const int n = spec.size;
    LinearImage refl(n, n);

    auto sample_reflectance = [&](double* rgb) {
        for (int c = 0; c < 3; ++c)
            rgb[c] = rng.uniform(spec.reflectance_min, spec.reflectance_max);
    };

    double bg[3];
    sample_reflectance(bg);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            for (int c = 0; c < 3; ++c) refl.at(y, x, c) = bg[c];

    const int patches = spec.min_patches +
                        static_cast<int>(rng.uniform_index(
                            static_cast<uint64_t>(spec.max_patches - spec.min_patches + 1)));
    for (int p = 0; p < patches; ++p) {
        int x0 = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n)));
        int y0 = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n)));
        int pw = 1 + static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n / 2)));
        int ph = 1 + static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n / 2)));
        double rgb[3];
        sample_reflectance(rgb);
        for (int y = y0; y < std::min(n, y0 + ph); ++y)
            for (int x = x0; x < std::min(n, x0 + pw); ++x)
                for (int c = 0; c < 3; ++c) refl.at(y, x, c) = rgb[c];
    }

    Illuminant illum;
    if (spec.fixed_illuminant) {
        illum = *spec.fixed_illuminant;
    } else {
        illum.r = rng.uniform(spec.illum_min, spec.illum_max);
        illum.g = rng.uniform(spec.illum_min, spec.illum_max);
        illum.b = rng.uniform(spec.illum_min, spec.illum_max);
    }
    illum = normalize_illuminant(illum);

    MondrianScene scene;
    scene.reflectance = refl;
    scene.truth = illum;
    scene.image = refl;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            for (int c = 0; c < 3; ++c) {
                double v = refl.at(y, x, c) * illum[c];
                if (spec.noise_std > 0.0) v += rng.normal() * spec.noise_std;
                scene.image.at(y, x, c) = std::max(0.0, v);
            }
    return scene;
}

std::pair<LinearImage, Illuminant> generate_mondrian(const MondrianSpec& spec, Rng& rng) {
    MondrianScene scene = generate_mondrian_scene(spec, rng);
    return {std::move(scene.image), scene.truth};
}

} // namespace c4
