// Command-line front end: synth | train | estimate | correct | evaluate | study.
// Stdout carries only machine-readable results; diagnostics go to stderr.
// Exit codes: 0 success, 1 usage, 2 data/format error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "c4/augment.hpp"
#include "c4/cascade.hpp"
#include "c4/config.hpp"
#include "c4/dataset.hpp"
#include "c4/eval.hpp"
#include "c4/image_io.hpp"
#include "c4/static_estimators.hpp"
#include "c4/train.hpp"

namespace fs = std::filesystem;
using namespace c4;

namespace {

Illuminant parse_triplet(const std::string& text) {
    double r, g, b;
    char tail;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf%c", &r, &g, &b, &tail) != 3)
        throw ConfigError("expected an r,g,b triplet, got '" + text + "'");
    return {r, g, b};
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) out.push_back(std::stoi(item));
    if (out.empty()) throw ConfigError("expected a comma-separated integer list");
    return out;
}

RunConfig load_config_or_default(const std::string& path) {
    if (path.empty()) return RunConfig{};
    return load_run_config(path);
}

// Builds the estimator selected by --model / --static / --illuminant.
Predictor make_predictor(const std::string& model_path, const std::string& preset,
                         const std::string& illum, const RunConfig& cfg) {
    int selected = (!model_path.empty()) + (!preset.empty()) + (!illum.empty());
    if (selected != 1)
        throw ConfigError("exactly one of --model, --static, --illuminant is required");
    if (!model_path.empty()) {
        auto model = std::make_shared<CascadeModel>(load_model(model_path));
        AugmentConfig aug = cfg.augment;
        return [model, aug](const LinearImage& img) {
            return predict_cascade(*model, img, aug).back();
        };
    }
    if (!preset.empty()) {
        MinkowskiConfig mk = preset_by_name(preset);
        return [mk](const LinearImage& img) { return estimate_static(img, mk); };
    }
    Illuminant fixed = normalize_illuminant(parse_triplet(illum));
    return [fixed](const LinearImage&) { return fixed; };
}

int cmd_synth(int n, uint64_t seed, const std::string& out_dir, int size, double noise,
              int folds) {
    fs::create_directories(out_dir);
    MondrianSpec spec;
    spec.size = size;
    spec.noise_std = noise;
    spec.validate();
    Rng rng(derive_seed(seed, 0x5137, 0, 0));
    DatasetManifest manifest;
    for (int i = 0; i < n; ++i) {
        auto [img, truth] = generate_mondrian(spec, rng);
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%05d.png", i);
        write_png16(img, (fs::path(out_dir) / name).string());
        manifest.entries.push_back({name, truth, "", -1, ""});
    }
    if (folds > 0) assign_folds(manifest, folds, seed);
    std::string manifest_path = (fs::path(out_dir) / "manifest.csv").string();
    save_manifest(manifest, manifest_path);
    std::cerr << "wrote " << n << " scenes and manifest to " << out_dir << "\n";
    std::cout << manifest_path << "\n";
    return 0;
}

std::vector<Sample> load_all_samples(const DatasetManifest& manifest,
                                     const std::vector<size_t>& indices) {
    std::vector<Sample> out;
    out.reserve(indices.size());
    for (size_t i : indices) out.push_back(load_sample(manifest.entries[i]));
    return out;
}

int cmd_train(const std::string& manifest_path, const std::string& config_path, int stages,
              const std::string& out_path, const std::string& trace_path,
              std::optional<uint64_t> seed) {
    RunConfig cfg = load_config_or_default(config_path);
    if (seed) cfg.train.seed = *seed;
    DatasetManifest manifest = load_manifest(manifest_path);
    std::vector<size_t> all(manifest.entries.size());
    std::iota(all.begin(), all.end(), size_t{0});
    auto samples = load_all_samples(manifest, all);
    std::cerr << "training " << stages << "-stage cascade on " << samples.size()
              << " samples\n";
    TrainResult result = train(cfg.arch, stages, samples, cfg.train, cfg.augment);
    save_model(result.model, out_path);
    std::string trace = trace_path.empty() ? out_path + ".trace.csv" : trace_path;
    write_loss_trace_csv(result.epoch_loss_deg, trace);
    std::cerr << "model -> " << out_path << ", loss trace -> " << trace << "\n";
    std::cout << out_path << "\n";
    return 0;
}

int cmd_estimate(const std::string& model_path, const std::string& preset,
                 const std::string& illum, const std::string& image_path,
                 const std::string& config_path) {
    RunConfig cfg = load_config_or_default(config_path);
    Predictor predict = make_predictor(model_path, preset, illum, cfg);
    LinearImage img = read_png(image_path);
    Illuminant e = normalize_illuminant(predict(img));
    std::printf("%.6f %.6f %.6f\n", e.r, e.g, e.b);
    return 0;
}

int cmd_correct(const std::string& model_path, const std::string& preset,
                const std::string& illum, const std::string& image_path,
                const std::string& out_path, const std::string& config_path) {
    RunConfig cfg = load_config_or_default(config_path);
    Predictor predict = make_predictor(model_path, preset, illum, cfg);
    LinearImage img = read_png(image_path);
    Illuminant e = predict(img);
    LinearImage corrected = von_kries_correct(img, e);
    // rescale so the brightest value maps to 1.0; PNG output clips at 1
    double peak = 0.0;
    for (double v : corrected.data) peak = std::max(peak, v);
    if (peak > 0.0)
        for (double& v : corrected.data) v /= peak;
    write_png16(corrected, out_path);
    std::cerr << "corrected image -> " << out_path << "\n";
    std::cout << out_path << "\n";
    return 0;
}

int cmd_evaluate(const std::string& manifest_path, const std::string& model_path,
                 const std::string& preset, const std::string& config_path, int folds,
                 const std::string& report_path, uint64_t seed) {
    RunConfig cfg = load_config_or_default(config_path);
    DatasetManifest manifest = load_manifest(manifest_path);
    if (manifest.num_folds() < folds) assign_folds(manifest, folds, seed);

    PredictorFactory factory;
    std::string label;
    if (!model_path.empty() && preset.empty()) {
        label = fs::path(model_path).filename().string();
        factory = [&](const std::vector<Sample>&, uint64_t) {
            return make_predictor(model_path, "", "", cfg);
        };
    } else if (model_path.empty() && !preset.empty()) {
        label = preset;
        factory = [&](const std::vector<Sample>&, uint64_t) {
            return make_predictor("", preset, "", cfg);
        };
    } else {
        throw ConfigError("exactly one of --model, --static is required");
    }

    CrossValidationResult result = cross_validate(factory, manifest, seed);
    std::vector<std::pair<std::string, ErrorReport>> rows;
    for (size_t f = 0; f < result.per_fold.size(); ++f)
        rows.emplace_back(label + " fold" + std::to_string(f), result.per_fold[f]);
    rows.emplace_back(label + " pooled", result.pooled);
    if (!report_path.empty()) {
        write_report_csv(rows, report_path);
        std::cerr << "report -> " << report_path << "\n";
    }
    std::cout << format_report_table(rows);
    return 0;
}

int cmd_study(const std::string& sizes_text, const std::string& manifest_path,
              const std::string& config_path, int test_fold, uint64_t seed,
              const std::string& report_path) {
    std::vector<int> sizes = parse_int_list(sizes_text);
    RunConfig cfg = load_config_or_default(config_path);
    cfg.train.seed = seed;
    DatasetManifest manifest = load_manifest(manifest_path);
    if (manifest.num_folds() == 0)
        throw ConfigError("study needs fold assignments in the manifest (synth --folds)");
    auto train_set = load_all_samples(manifest, manifest.complement_indices(test_fold));
    auto test_set = load_all_samples(manifest, manifest.fold_indices(test_fold));
    std::cerr << "study: " << train_set.size() << " train / " << test_set.size()
              << " test samples\n";
    auto study = cascade_size_study(sizes, train_set, test_set, cfg);
    std::vector<std::pair<std::string, ErrorReport>> rows;
    for (const auto& row : study)
        rows.emplace_back("stages=" + std::to_string(row.stages), row.report);
    if (!report_path.empty()) {
        write_report_csv(rows, report_path);
        std::cerr << "report -> " << report_path << "\n";
    }
    std::cout << format_report_table(rows);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"color constancy toolkit: synthesis, training, estimation, evaluation"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic Mondrian dataset");
    int synth_n = 100, synth_size = 64, synth_folds = 3;
    uint64_t synth_seed = 0;
    double synth_noise = 0.0;
    std::string synth_out;
    synth->add_option("--n", synth_n, "number of scenes");
    synth->add_option("--seed", synth_seed, "rng seed");
    synth->add_option("--out-dir", synth_out, "output directory")->required();
    synth->add_option("--size", synth_size, "canvas side length");
    synth->add_option("--noise", synth_noise, "gaussian noise std");
    synth->add_option("--folds", synth_folds, "cross-validation folds (0 = none)");

    // train
    auto* train_cmd = app.add_subcommand("train", "train a cascade model");
    std::string train_manifest, train_config, train_out, train_trace;
    int train_stages = 3;
    std::optional<uint64_t> train_seed;
    train_cmd->add_option("--manifest", train_manifest, "dataset manifest CSV")->required();
    train_cmd->add_option("--config", train_config, "run config file");
    train_cmd->add_option("--stages", train_stages, "cascade length");
    train_cmd->add_option("--out", train_out, "output model path")->required();
    train_cmd->add_option("--trace", train_trace, "loss trace CSV path");
    uint64_t train_seed_raw = 0;
    auto* train_seed_opt = train_cmd->add_option("--seed", train_seed_raw, "rng seed");

    // estimate
    auto* est = app.add_subcommand("estimate", "print the illuminant estimate for an image");
    std::string est_model, est_static, est_illum, est_image, est_config;
    est->add_option("--model", est_model, "cascade model file");
    est->add_option("--static", est_static, "static preset name");
    est->add_option("--illuminant", est_illum, "fixed r,g,b triplet");
    est->add_option("--image", est_image, "input image")->required();
    est->add_option("--config", est_config, "run config file");

    // correct
    auto* corr = app.add_subcommand("correct", "write the white-balanced image");
    std::string corr_model, corr_static, corr_illum, corr_image, corr_out, corr_config;
    corr->add_option("--model", corr_model, "cascade model file");
    corr->add_option("--static", corr_static, "static preset name");
    corr->add_option("--illuminant", corr_illum, "fixed r,g,b triplet");
    corr->add_option("--image", corr_image, "input image")->required();
    corr->add_option("--out", corr_out, "output 16-bit PNG")->required();
    corr->add_option("--config", corr_config, "run config file");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "cross-validated error report");
    std::string eval_manifest, eval_model, eval_static, eval_config, eval_report;
    int eval_folds = 3;
    uint64_t eval_seed = 0;
    eval->add_option("--manifest", eval_manifest, "dataset manifest CSV")->required();
    eval->add_option("--model", eval_model, "cascade model file");
    eval->add_option("--static", eval_static, "static preset name");
    eval->add_option("--config", eval_config, "run config file");
    eval->add_option("--folds", eval_folds, "number of folds");
    eval->add_option("--report", eval_report, "CSV report path");
    eval->add_option("--seed", eval_seed, "rng seed");

    // study
    auto* study = app.add_subcommand("study", "cascade-size comparison on a fixed split");
    std::string study_sizes = "1,2,3", study_manifest, study_config, study_report;
    int study_fold = 0;
    uint64_t study_seed = 0;
    study->add_option("--sizes", study_sizes, "comma list of cascade lengths");
    study->add_option("--manifest", study_manifest, "dataset manifest CSV")->required();
    study->add_option("--config", study_config, "run config file");
    study->add_option("--test-fold", study_fold, "held-out fold");
    study->add_option("--seed", study_seed, "rng seed");
    study->add_option("--report", study_report, "CSV report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // CLI11 prints help/usage; collapse its error codes onto exit 1
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*synth)
            return cmd_synth(synth_n, synth_seed, synth_out, synth_size, synth_noise,
                             synth_folds);
        if (*train_cmd) {
            if (*train_seed_opt) train_seed = train_seed_raw;
            return cmd_train(train_manifest, train_config, train_stages, train_out,
                             train_trace, train_seed);
        }
        if (*est) return cmd_estimate(est_model, est_static, est_illum, est_image, est_config);
        if (*corr)
            return cmd_correct(corr_model, corr_static, corr_illum, corr_image, corr_out,
                               corr_config);
        if (*eval)
            return cmd_evaluate(eval_manifest, eval_model, eval_static, eval_config,
                                eval_folds, eval_report, eval_seed);
        if (*study)
            return cmd_study(study_sizes, study_manifest, study_config, study_fold,
                             study_seed, study_report);
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
