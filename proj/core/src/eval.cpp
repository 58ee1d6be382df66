#include "c4/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace c4 {

double percentile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw DomainError("percentile of empty sample");
    const double idx = p * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(idx));
    const size_t hi = static_cast<size_t>(std::ceil(idx));
    const double frac = idx - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ErrorReport summarize(const std::vector<std::pair<std::string, double>>& errors) {
    if (errors.empty()) throw DomainError("summarize: empty error list");
    ErrorReport r;
    r.per_sample = errors;
    r.n = errors.size();

    std::vector<double> sorted;
    sorted.reserve(errors.size());
    for (const auto& [id, e] : errors) sorted.push_back(e);
    std::sort(sorted.begin(), sorted.end());

    // summing in sorted order makes the mean independent of input order
    double sum = 0.0;
    for (double e : sorted) sum += e;
    r.mean = sum / static_cast<double>(r.n);
    r.median = percentile_sorted(sorted, 0.5);
    r.trimean = (percentile_sorted(sorted, 0.25) + 2.0 * r.median +
                 percentile_sorted(sorted, 0.75)) / 4.0;

    const size_t k = std::max<size_t>(1, r.n / 4);
    double best = 0.0, worst = 0.0;
    for (size_t i = 0; i < k; ++i) {
        best += sorted[i];
        worst += sorted[r.n - 1 - i];
    }
    r.best25_mean = best / static_cast<double>(k);
    r.worst25_mean = worst / static_cast<double>(k);
    return r;
}

ErrorReport summarize(const std::vector<AngularError>& errors) {
    std::vector<std::pair<std::string, double>> rows;
    rows.reserve(errors.size());
    for (size_t i = 0; i < errors.size(); ++i)
        rows.emplace_back(std::to_string(i), errors[i].degrees);
    return summarize(rows);
}

int worker_cap() {
    if (const char* env = std::getenv("C4_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

CrossValidationResult cross_validate_samples(const PredictorFactory& factory,
                                             const std::vector<Sample>& samples,
                                             const std::vector<int>& folds, uint64_t seed) {
    if (samples.size() != folds.size())
        throw ConfigError("cross_validate: fold list does not match sample list");
    if (samples.empty()) throw ConfigError("cross_validate: empty dataset");

    std::set<int> fold_ids(folds.begin(), folds.end());
    const int k = static_cast<int>(fold_ids.size());
    if (k < 2) throw ConfigError("cross_validate: need at least 2 folds");

    std::vector<int> fold_list(fold_ids.begin(), fold_ids.end());
    std::vector<std::vector<std::pair<std::string, double>>> fold_errors(fold_list.size());

    auto run_fold = [&](size_t fi) {
        const int fold = fold_list[fi];
        std::vector<Sample> train_split;
        std::vector<const Sample*> test_split;
        std::set<std::string> train_ids;
        for (size_t i = 0; i < samples.size(); ++i) {
            if (folds[i] == fold) {
                test_split.push_back(&samples[i]);
            } else {
                train_split.push_back(samples[i]);
                train_ids.insert(samples[i].id);
            }
        }
        Predictor predictor;
        try {
            predictor = factory(train_split, derive_seed(seed, 0xcf01, static_cast<uint64_t>(fold)));
        } catch (const Error& e) {
            throw ConfigError("cross_validate fold " + std::to_string(fold) + ": " + e.what());
        }
        for (const Sample* s : test_split) {
            if (train_ids.count(s->id))
                throw ConfigError("cross_validate: sample '" + s->id +
                                  "' appears in both splits of fold " + std::to_string(fold));
            Illuminant est = predictor(s->image);
            fold_errors[fi].emplace_back(s->id, angular_error(est, s->truth).degrees);
        }
    };

    const int cap = worker_cap();
    if (cap > 1 && fold_list.size() > 1) {
        std::vector<std::thread> pool;
        std::exception_ptr first_error;
        std::mutex err_mutex;
        size_t next = 0;
        std::mutex next_mutex;
        auto worker = [&]() {
            for (;;) {
                size_t fi;
                {
                    std::lock_guard<std::mutex> lock(next_mutex);
                    if (next >= fold_list.size()) return;
                    fi = next++;
                }
                try {
                    run_fold(fi);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        const size_t n_threads = std::min<size_t>(static_cast<size_t>(cap), fold_list.size());
        for (size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    } else {
        for (size_t fi = 0; fi < fold_list.size(); ++fi) run_fold(fi);
    }

    CrossValidationResult result;
    std::vector<std::pair<std::string, double>> pooled;
    for (auto& fe : fold_errors) {
        result.per_fold.push_back(summarize(fe));
        pooled.insert(pooled.end(), fe.begin(), fe.end());
    }
    result.pooled = summarize(pooled);
    return result;
}

CrossValidationResult cross_validate(const PredictorFactory& factory,
                                     const DatasetManifest& manifest, uint64_t seed) {
    std::vector<Sample> samples;
    std::vector<int> folds;
    for (const auto& e : manifest.entries) {
        if (e.fold < 0)
            throw ConfigError("cross_validate: manifest entry without fold assignment: " +
                              e.image_path);
        samples.push_back(load_sample(e));
        folds.push_back(e.fold);
    }
    return cross_validate_samples(factory, samples, folds, seed);
}

std::vector<double> stage_improvement_ratio(
    const std::vector<std::vector<double>>& stage_errors) {
    if (stage_errors.empty())
        throw ConfigError("stage_improvement_ratio: no samples");
    const size_t stages = stage_errors[0].size();
    if (stages < 2)
        throw ConfigError("stage_improvement_ratio: need at least 2 stages");
    std::vector<double> ratios(stages - 1, 0.0);
    for (const auto& errs : stage_errors) {
        if (errs.size() != stages)
            throw ConfigError("stage_improvement_ratio: ragged error table");
        for (size_t l = 0; l + 1 < stages; ++l)
            if (errs[l + 1] < errs[l]) ratios[l] += 1.0;
    }
    for (double& r : ratios) r /= static_cast<double>(stage_errors.size());
    return ratios;
}

std::vector<CascadeStudyRow> cascade_size_study(const std::vector<int>& sizes,
                                                const std::vector<Sample>& train_set,
                                                const std::vector<Sample>& test_set,
                                                const RunConfig& config) {
    if (sizes.empty()) throw ConfigError("cascade_size_study: no sizes requested");
    std::vector<CascadeStudyRow> rows;
    for (int stages : sizes) {
        TrainConfig tc = config.train;
        // uniform weights per requested L unless explicitly configured
        if (static_cast<int>(tc.loss_weights.size()) != stages) tc.loss_weights.clear();
        TrainResult trained = train(config.arch, stages, train_set, tc, config.augment);
        std::vector<std::pair<std::string, double>> errors;
        for (const auto& s : test_set) {
            auto estimates = predict_cascade(trained.model, s.image, config.augment);
            errors.emplace_back(s.id, angular_error(estimates.back(), s.truth).degrees);
        }
        rows.push_back({stages, summarize(errors)});
    }
    return rows;
}

void write_report_csv(const std::vector<std::pair<std::string, ErrorReport>>& rows,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open report for writing: " + path);
    out << "name,n,mean,median,trimean,best25,worst25\n";
    char buf[192];
    for (const auto& [name, r] : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n", name.c_str(), r.n,
                      r.mean, r.median, r.trimean, r.best25_mean, r.worst25_mean);
        out << buf;
    }
}

std::string format_report_table(const std::vector<std::pair<std::string, ErrorReport>>& rows) {
    std::ostringstream os;
    size_t name_w = 8;
    for (const auto& [name, r] : rows) name_w = std::max(name_w, name.size());
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-*s %8s %8s %8s %9s %9s %6s\n", static_cast<int>(name_w),
                  "", "Mean", "Median", "Tri-mean", "Best 25%", "Worst 25%", "N");
    os << buf;
    for (const auto& [name, r] : rows) {
        std::snprintf(buf, sizeof(buf), "%-*s %8.3f %8.3f %8.3f %9.3f %9.3f %6zu\n",
                      static_cast<int>(name_w), name.c_str(), r.mean, r.median, r.trimean,
                      r.best25_mean, r.worst25_mean, r.n);
        os << buf;
    }
    return os.str();
}

} // namespace c4
