#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "c4/config.hpp"
#include "c4/train.hpp"

using namespace c4;
namespace fs = std::filesystem;

namespace {

std::vector<Sample> tiny_dataset(int n, uint64_t seed, int size = 16) {
    MondrianSpec spec;
    spec.size = size;
    Rng rng(seed);
    std::vector<Sample> out;
    for (int i = 0; i < n; ++i) {
        auto [img, truth] = generate_mondrian(spec, rng);
        out.push_back({std::move(img), truth, "m" + std::to_string(i)});
    }
    return out;
}

StageNetConfig tiny_arch() {
    StageNetConfig cfg;
    cfg.layers = {{4, 3, 2, 1}, {3, 3, 1, 1}};
    cfg.dropout_p = 0.1;
    return cfg;
}

AugmentConfig tiny_augment() {
    AugmentConfig cfg;
    cfg.output_size = 16;
    cfg.rescales_per_image = 1;
    return cfg;
}

} // namespace

TEST_CASE("training is bit-reproducible for a fixed seed") {
    auto data = tiny_dataset(8, 1);
    TrainConfig tc;
    tc.batch_size = 4;
    tc.pretrain_epochs = 2;
    tc.finetune_epochs = 2;
    tc.seed = 11;
    auto a = train(tiny_arch(), 2, data, tc, tiny_augment());
    auto b = train(tiny_arch(), 2, data, tc, tiny_augment());
    REQUIRE(a.epoch_loss_deg.size() == b.epoch_loss_deg.size());
    CHECK(a.epoch_loss_deg == b.epoch_loss_deg); // bitwise
    auto pa = a.model.parameters(), pb = b.model.parameters();
    REQUIRE(pa.size() == pb.size());
    for (size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->values == pb[i]->values);

    tc.seed = 12;
    auto c = train(tiny_arch(), 2, data, tc, tiny_augment());
    CHECK(a.epoch_loss_deg != c.epoch_loss_deg);
}

TEST_CASE("the loss trace covers both phases and training makes progress") {
    auto data = tiny_dataset(16, 2);
    TrainConfig tc;
    tc.batch_size = 8;
    tc.pretrain_epochs = 8;
    tc.finetune_epochs = 4;
    tc.seed = 3;
    auto result = train(tiny_arch(), 2, data, tc, tiny_augment());
    REQUIRE(result.epoch_loss_deg.size() == 12);
    REQUIRE(result.model.num_stages() == 2);
    for (double l : result.epoch_loss_deg) {
        CHECK(std::isfinite(l));
        CHECK(l >= 0.0);
    }
    // mean loss over the last half of pretrain should beat the first epoch
    double first = result.epoch_loss_deg[0];
    double late = 0.0;
    for (int e = 4; e < 8; ++e) late += result.epoch_loss_deg[e];
    late /= 4.0;
    CHECK(late < first);
}

TEST_CASE("phase two starts from replicated phase-one weights") {
    auto data = tiny_dataset(8, 4);
    TrainConfig tc;
    tc.batch_size = 4;
    tc.pretrain_epochs = 2;
    tc.finetune_epochs = 0; // stop right after replication
    tc.seed = 5;
    auto result = train(tiny_arch(), 3, data, tc, tiny_augment());
    REQUIRE(result.model.num_stages() == 3);
    for (int s = 1; s < 3; ++s)
        for (size_t l = 0; l < result.model.stages[0].weights.size(); ++l) {
            CHECK(result.model.stages[s].weights[l]->values ==
                  result.model.stages[0].weights[l]->values);
            CHECK(result.model.stages[s].biases[l]->values ==
                  result.model.stages[0].biases[l]->values);
        }
}

TEST_CASE("fine-tuning decouples the stages") {
    auto data = tiny_dataset(8, 6);
    TrainConfig tc;
    tc.batch_size = 4;
    tc.pretrain_epochs = 1;
    tc.finetune_epochs = 2;
    tc.seed = 7;
    auto result = train(tiny_arch(), 2, data, tc, tiny_augment());
    bool diverged = false;
    for (size_t l = 0; l < result.model.stages[0].weights.size(); ++l)
        diverged |= (result.model.stages[0].weights[l]->values !=
                     result.model.stages[1].weights[l]->values);
    CHECK(diverged);
}

TEST_CASE("expand_dataset emits the configured number of rescaled copies") {
    auto data = tiny_dataset(5, 8);
    AugmentConfig cfg = tiny_augment();
    cfg.rescales_per_image = 3;
    auto expanded = expand_dataset(data, cfg, 99);
    REQUIRE(expanded.size() == 15);
    // reflectance is preserved for every copy
    for (size_t i = 0; i < expanded.size(); ++i) {
        const Sample& src = data[i / 3];
        const Sample& cp = expanded[i];
        CHECK(cp.id.find(src.id) == 0);
        for (size_t p = 0; p < src.image.pixel_count(); ++p)
            for (int c = 0; c < 3; ++c)
                CHECK(cp.image.data[p * 3 + c] / cp.truth[c] ==
                      doctest::Approx(src.image.data[p * 3 + c] / src.truth[c])
                          .epsilon(1e-9));
    }
    auto again = expand_dataset(data, cfg, 99);
    CHECK(again[4].image.data == expanded[4].image.data);
    auto other = expand_dataset(data, cfg, 100);
    CHECK(other[4].image.data != expanded[4].image.data);
}

TEST_CASE("predict_cascade returns one unit-norm estimate per stage") {
    auto data = tiny_dataset(6, 9);
    TrainConfig tc;
    tc.batch_size = 3;
    tc.pretrain_epochs = 1;
    tc.finetune_epochs = 1;
    tc.seed = 1;
    auto result = train(tiny_arch(), 3, data, tc, tiny_augment());
    auto estimates = predict_cascade(result.model, data[0].image, tiny_augment());
    REQUIRE(estimates.size() == 3);
    for (const auto& e : estimates) {
        CHECK(e.norm() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(e.finite_positive());
    }
    // prediction is deterministic (no dropout at test time)
    auto again = predict_cascade(result.model, data[0].image, tiny_augment());
    CHECK(estimates[2].r == again[2].r);
}

TEST_CASE("invalid train configs are rejected") {
    TrainConfig tc;
    tc.batch_size = 0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    TrainConfig tc2;
    tc2.learning_rate = 0.0;
    CHECK_THROWS_AS(tc2.validate(), ConfigError);
    TrainConfig tc3;
    tc3.pretrain_epochs = -1;
    CHECK_THROWS_AS(tc3.validate(), ConfigError);
}

TEST_CASE("mismatched loss weights fail at train time") {
    auto data = tiny_dataset(4, 10);
    TrainConfig tc;
    tc.batch_size = 2;
    tc.pretrain_epochs = 1;
    tc.finetune_epochs = 1;
    tc.loss_weights = {1.0, 1.0}; // but 3 stages requested
    CHECK_THROWS_AS(train(tiny_arch(), 3, data, tc, tiny_augment()), ConfigError);
}

TEST_CASE("loss trace CSV round trip") {
    auto path = (fs::temp_directory_path() / "c4_trace.csv").string();
    write_loss_trace_csv({3.5, 2.25, 1.125}, path);
    std::ifstream in(path);
    std::string header, l1, l2, l3;
    std::getline(in, header);
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    CHECK(header == "epoch,mean_loss_deg");
    CHECK(l1.find("1,") == 0);
    CHECK(l2.find("2,") == 0);
    CHECK(l3.find("1.125") != std::string::npos);
    fs::remove(path);
}

TEST_CASE("run config round trips through the key-value file") {
    RunConfig cfg;
    cfg.train.batch_size = 7;
    cfg.train.learning_rate = 1.5e-3;
    cfg.train.pretrain_epochs = 13;
    cfg.train.loss_weights = {0.25, 0.75};
    cfg.train.stop_gradient = true;
    cfg.augment.output_size = 24;
    cfg.augment.rescales_per_image = 2;
    cfg.arch.layers = {{4, 3, 2, 1}, {3, 3, 1, 1}};
    cfg.arch.dropout_p = 0.25;
    auto path = (fs::temp_directory_path() / "c4_run.cfg").string();
    save_run_config(cfg, path);
    RunConfig back = load_run_config(path);
    CHECK(back.train.batch_size == 7);
    CHECK(back.train.learning_rate == 1.5e-3);
    CHECK(back.train.loss_weights == cfg.train.loss_weights);
    CHECK(back.train.stop_gradient);
    CHECK(back.augment.output_size == 24);
    REQUIRE(back.arch.layers.size() == 2);
    CHECK(back.arch.layers[1].out_channels == 3);
    CHECK(back.arch.layers[0].stride == 2);
    CHECK(back.arch.layers[1].kernel == 3);
    CHECK(back.arch.layers[1].padding == 1);
    CHECK(back.arch.dropout_p == 0.25);
    fs::remove(path);
}

TEST_CASE("unknown config keys are rejected") {
    auto path = (fs::temp_directory_path() / "c4_badrun.cfg").string();
    {
        std::ofstream out(path);
        out << "batch_size = 4\nwarp_speed = 9\n";
    }
    CHECK_THROWS_AS(load_run_config(path), FormatError);
    fs::remove(path);
}
