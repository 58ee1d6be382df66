#pragma once

#include <optional>
#include <string>
#include <vector>

#include "c4/color.hpp"
#include "c4/rng.hpp"

namespace c4 {

struct ManifestEntry {
    std::string image_path;
    Illuminant truth;
    std::string mask_path;   // empty = no mask
    int fold = -1;           // -1 = unassigned
    std::string camera_id;
};

// CSV-backed dataset listing with fold assignments for cross-validation.
// Format: header "path,r,g,b,mask,fold,camera"; mask and fold may be empty.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;

    int num_folds() const;
    std::vector<size_t> fold_indices(int fold) const;
    std::vector<size_t> complement_indices(int fold) const;
};

// Throws FormatError with a line number for malformed rows; IoError for a
// missing file. check_files additionally requires every referenced image
// (and mask) to exist.
DatasetManifest load_manifest(const std::string& path, bool check_files = true);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

// Seeded random partition into k folds with sizes differing by at most 1.
void assign_folds(DatasetManifest& manifest, int k, uint64_t seed);

// An in-memory training/evaluation sample.
struct Sample {
    LinearImage image;
    Illuminant truth;
    std::string id;
};

// Loads the image (and mask, when present) for one manifest entry.
Sample load_sample(const ManifestEntry& entry);

// ---- synthetic scenes ---------------------------------------------------

// Parameters of the Mondrian generator: random axis-aligned rectangles of
// random reflectance under a random (or fixed) illuminant plus optional
// Gaussian noise clipped at zero.
struct MondrianSpec {
    int size = 64;                   // square canvas
    int min_patches = 5;
    int max_patches = 12;
    double reflectance_min = 0.05;
    double reflectance_max = 0.95;
    double illum_min = 0.6;          // per-channel sampling range
    double illum_max = 1.4;
    double noise_std = 0.0;
    // When set, used (after unit normalization) instead of sampling.
    std::optional<Illuminant> fixed_illuminant;

    void validate() const;
};

// Returns the rendered scene and its unit-norm ground-truth illuminant.
// With noise_std = 0 the pixelwise ratio scene/reflectance equals the
// ground truth exactly.
std::pair<LinearImage, Illuminant> generate_mondrian(const MondrianSpec& spec, Rng& rng);

// The same scene before the illuminant is applied; exposed for tests that
// need the reflectance layer.
struct MondrianScene {
    LinearImage reflectance;
    LinearImage image;
    Illuminant truth;
};
MondrianScene generate_mondrian_scene(const MondrianSpec& spec, Rng& rng);

} // namespace c4
